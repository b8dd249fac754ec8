"""Closed-form scalar expressions: parsing, printing and jet evaluation.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom [ "^" unary ] ;          (* exponent folds to an integer *)
    atom     = number | name | func "(" expr ")" | "(" expr ")" ;
    func     = "sqrt" | "exp" | "log" | "sin" | "cos" | "abs" ;
    number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
             | "." digits [ ("e" | "E") [ "+" | "-" ] digits ] ;
    name     = letter { letter | digit | "_" } ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``; ``^`` is right
associative and its exponent must be an integer constant.

Evaluation works on any scalar type supporting ``+ - * /`` (floats or
:class:`~nullstat.jet.Jet`), so compiled expressions compose with nested jets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import jet as _jet
from .jet import Jet, JetDomainError

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Pow", "Call",
    "ExprSyntaxError", "UnknownVariableError", "ExprEvalError",
    "parse", "to_string", "jet_eval", "evaluate", "directional_derivatives",
    "mixed_partial", "FUNCTIONS",
]

FUNCTIONS = ("sqrt", "exp", "log", "sin", "cos", "abs")


class ExprSyntaxError(ValueError):
    def __init__(self, message, offset, text=""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.text = text


class UnknownVariableError(ValueError):
    def __init__(self, name, offset=None):
        super().__init__(f"unknown variable {name!r}")
        self.name = name
        self.offset = offset


class ExprEvalError(ArithmeticError):
    """Domain error or division by zero while evaluating an expression."""


# -- AST -------------------------------------------------------------------


class Expr:
    """Base class for immutable expression trees."""

    __slots__ = ()

    def variables(self):
        out = set()
        _collect_vars(self, out)
        return out

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


def _collect_vars(e, out):
    if isinstance(e, Var):
        out.add(e.name)
    elif isinstance(e, (Neg,)):
        _collect_vars(e.arg, out)
    elif isinstance(e, BinOp):
        _collect_vars(e.left, out)
        _collect_vars(e.right, out)
    elif isinstance(e, Pow):
        _collect_vars(e.base, out)
    elif isinstance(e, Call):
        _collect_vars(e.arg, out)


# -- tokenizer / parser ----------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text, allowed):
        self.text = text
        self.allowed = allowed
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.take()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", off, self.text)

    def parse(self):
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off, self.text)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        b = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            off = self.peek()[2]
            exp_tree = self.unary()
            value = _const_value(exp_tree)
            if value is None or value != int(value):
                raise ExprSyntaxError("exponent must be an integer constant", off, self.text)
            return Pow(b, int(value))
        return b

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                if val not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {val!r}", off, self.text)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs an argument", off, self.text)
            if self.allowed is not None and val not in self.allowed:
                raise UnknownVariableError(val, off)
            return Var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off, self.text)


def _const_value(e):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Neg):
        v = _const_value(e.arg)
        return None if v is None else -v
    if isinstance(e, Pow):
        v = _const_value(e.base)
        return None if v is None else v ** e.exponent
    if isinstance(e, BinOp):
        a, b = _const_value(e.left), _const_value(e.right)
        if a is None or b is None:
            return None
        if e.op == "/" and b == 0:
            return None
        return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b else 0}[e.op]
    return None


def parse(text: str, allowed_vars: Sequence[str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree over ``allowed_vars``."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0, text or "")
    allowed = None if allowed_vars is None else frozenset(allowed_vars)
    return _Parser(text, allowed).parse()


# -- printing --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Pow):
        return 4
    return 5


def to_string(e: Expr) -> str:
    """Serialize so that ``parse(to_string(e)) == e``."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 3 else f"-({inner})"
    if isinstance(e, Pow):
        b = to_string(e.base)
        if _prec(e.base) < 5:
            b = f"({b})"
        n = e.exponent
        return f"{b}^{n}" if n >= 0 else f"{b}^({n})"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = to_string(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = to_string(e.right)
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


# -- evaluation ------------------------------------------------------------

_FN = {
    "sqrt": _jet.sqrt,
    "exp": _jet.exp,
    "log": _jet.log,
    "sin": _jet.sin,
    "cos": _jet.cos,
    "abs": _jet.fabs,
}


def _div(a, b):
    if _jet.base(b) == 0:
        raise ExprEvalError("division by zero")
    return a / b


def _source(e, names):
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return names[e.name]
    if isinstance(e, Neg):
        return f"(-{_source(e.arg, names)})"
    if isinstance(e, BinOp):
        a, b = _source(e.left, names), _source(e.right, names)
        if e.op == "/":
            return f"_div({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, Pow):
        return f"_ipow({_source(e.base, names)}, {e.exponent})"
    if isinstance(e, Call):
        return f"_fn_{e.func}({_source(e.arg, names)})"
    raise TypeError(e)


class Compiled:
    """An expression compiled to a Python function of positional arguments."""

    def __init__(self, e: Expr, variables: Sequence[str]):
        self.expr = e
        self.variables = tuple(variables)
        names = {v: f"a{i}" for i, v in enumerate(self.variables)}
        missing = e.variables() - set(self.variables)
        if missing:
            raise UnknownVariableError(sorted(missing)[0])
        args = ", ".join(names[v] for v in self.variables)
        src = f"def _f({args}):\n    return {_source(e, names)}\n"
        ns = {"_div": _div, "_ipow": _jet.ipow}
        ns.update({f"_fn_{k}": v for k, v in _FN.items()})
        exec(compile(src, "<expr>", "exec"), ns)
        self._f = ns["_f"]
        self.is_constant = not e.variables()

    def __call__(self, *args):
        try:
            return self._f(*args)
        except JetDomainError as err:
            raise ExprEvalError(str(err)) from None
        except (ZeroDivisionError, OverflowError) as err:
            raise ExprEvalError(str(err)) from None
        except ValueError as err:
            raise ExprEvalError(str(err)) from None


def compile_expr(e: Expr, variables: Sequence[str]) -> Compiled:
    return Compiled(e, variables)


def evaluate(e: Expr, point: Mapping[str, float]):
    names = sorted(e.variables())
    return Compiled(e, names)(*[point[n] for n in names])


def jet_eval(e: Expr, point: Mapping[str, float], direction: Mapping[str, float],
             order: int) -> Jet:
    """Jet of ``e`` at ``point`` along ``direction`` up to ``order``.

    Coefficient k is the k-th raw directional derivative.
    """
    if not 0 <= order <= _jet.MAX_ORDER:
        raise ValueError(f"jet order must be in [0, {_jet.MAX_ORDER}]")
    tag = _jet.new_tag()
    names = sorted(e.variables())
    args = [Jet.variable(point[n], direction.get(n, 0.0), order, tag) for n in names]
    out = Compiled(e, names)(*args)
    if isinstance(out, Jet) and out.tag == tag:
        return out
    return Jet.constant(out, order, tag)


def directional_derivatives(e, point, direction, order):
    """List of raw derivatives ``[f, D f, ..., D^order f]`` along ``direction``."""
    return list(jet_eval(e, point, direction, order).c)


def mixed_partial(e: Expr, point: Mapping[str, float], a: str, b: str) -> float:
    """Second mixed partial by polarization of order-2 jets.

    ``d_a d_b f = (D2_{e_a+e_b} f - D2_{e_a} f - D2_{e_b} f) / 2``.
    """
    if a == b:
        return jet_eval(e, point, {a: 1.0}, 2).c[2]
    both = jet_eval(e, point, {a: 1.0, b: 1.0}, 2).c[2]
    da = jet_eval(e, point, {a: 1.0}, 2).c[2]
    db = jet_eval(e, point, {b: 1.0}, 2).c[2]
    return 0.5 * (both - da - db)
