"""Univariate Taylor jets carrying raw directional derivatives.

A :class:`Jet` of order ``n`` stores ``(c0, c1, ..., cn)`` where ``ck`` is the
k-th derivative along one seed direction (raw derivatives: the Taylor
coefficient of ``t**k`` is ``ck / k!``).

Jets nest.  Every jet carries an integer ``tag`` identifying the perturbation
it differentiates with respect to; coefficients may themselves be jets with a
*smaller* tag.  When two jets with different tags meet, the one with the
smaller tag is treated as a constant of the other.  Fresh tags always come
from :func:`new_tag`, so a perturbation introduced deeper in a call stack is
always the outermost layer of the values it touches, and extraction with
:func:`coef` undoes it cleanly.
"""

import itertools
import math
from math import comb

import numpy as np

__all__ = [
    "Jet",
    "JetDomainError",
    "new_tag",
    "base",
    "coef",
    "seed",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "fabs",
    "ipow",
    "MAX_ORDER",
]

MAX_ORDER = 4

_tags = itertools.count(1)


class JetDomainError(ArithmeticError):
    """Raised for sqrt/log of non-positive values, abs at 0, division by 0."""


def new_tag():
    return next(_tags)


def _tag(x):
    return x.tag if isinstance(x, Jet) else 0


class Jet:
    __slots__ = ("c", "tag")

    def __init__(self, coeffs, tag):
        self.c = tuple(coeffs)
        self.tag = tag

    @property
    def order(self):
        return len(self.c) - 1

    @classmethod
    def variable(cls, value, direction=1.0, order=1, tag=None):
        """Jet of ``value + t * direction`` truncated at ``order``."""
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        if tag is None:
            tag = new_tag()
        coeffs = [value]
        if order >= 1:
            coeffs.append(direction)
        coeffs.extend([0.0] * (order - 1))
        return cls(coeffs, tag)

    @classmethod
    def constant(cls, value, order, tag=0):
        return cls([value] + [0.0] * order, tag)

    def __repr__(self):
        return f"Jet({list(self.c)!r}, tag={self.tag})"

    def __eq__(self, other):
        if isinstance(other, Jet):
            return self.tag == other.tag and self.c == other.c
        return NotImplemented

    __hash__ = None

    # -- arithmetic ------------------------------------------------------
    def _lift(self, other):
        """Return (self coeffs, other coeffs) at a common order, or None when
        ``other`` acts as a scalar."""
        if isinstance(other, Jet) and other.tag == self.tag:
            n = min(len(self.c), len(other.c))
            return self.c[:n], other.c[:n]
        return None

    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        ot = _tag(other)
        if ot > self.tag:
            return other.__radd__(self)
        pair = self._lift(other)
        if pair is None:
            return Jet((self.c[0] + other,) + self.c[1:], self.tag)
        a, b = pair
        return Jet([x + y for x, y in zip(a, b)], self.tag)

    def __radd__(self, other):
        return Jet((other + self.c[0],) + self.c[1:], self.tag)

    def __neg__(self):
        return Jet([-x for x in self.c], self.tag)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        ot = _tag(other)
        if ot > self.tag:
            return other.__rsub__(self)
        pair = self._lift(other)
        if pair is None:
            return Jet((self.c[0] - other,) + self.c[1:], self.tag)
        a, b = pair
        return Jet([x - y for x, y in zip(a, b)], self.tag)

    def __rsub__(self, other):
        return Jet((other - self.c[0],) + tuple(-x for x in self.c[1:]), self.tag)

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        ot = _tag(other)
        if ot > self.tag:
            return other.__rmul__(self)
        pair = self._lift(other)
        if pair is None:
            return Jet([x * other for x in self.c], self.tag)
        a, b = pair
        out = []
        for k in range(len(a)):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                term = a[i] * b[k - i]
                acc = acc + (term if comb(k, i) == 1 else comb(k, i) * term)
            out.append(acc)
        return Jet(out, self.tag)

    def __rmul__(self, other):
        return Jet([other * x for x in self.c], self.tag)

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        ot = _tag(other)
        if ot > self.tag:
            return other.__rtruediv__(self)
        pair = self._lift(other)
        if pair is None:
            if base(other) == 0:
                raise JetDomainError("division by zero")
            return Jet([x / other for x in self.c], self.tag)
        a, b = pair
        return Jet(_from_taylor(_tdiv(_to_taylor(a), _to_taylor(b))), self.tag)

    def __rtruediv__(self, other):
        a = (other,) + (0.0,) * (len(self.c) - 1)
        return Jet(_from_taylor(_tdiv(_to_taylor(a), _to_taylor(self.c))), self.tag)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("jets support integer exponents only")
        return ipow(self, n)

    # comparisons act on the base value so pivoting code can stay generic
    def __abs__(self):
        return fabs(self)

    def __float__(self):
        return float(base(self))


# -- helpers on generic scalars ------------------------------------------


def base(x):
    """Underlying float of a (possibly nested) jet."""
    while isinstance(x, Jet):
        x = x.c[0]
    return x


def coef(x, tag, k):
    """k-th raw derivative of ``x`` with respect to perturbation ``tag``."""
    if isinstance(x, Jet):
        if x.tag == tag:
            return x.c[k] if k < len(x.c) else 0.0
        if x.tag > tag:
            return Jet([coef(y, tag, k) for y in x.c], x.tag)
    return x if k == 0 else 0.0


def seed(value, tag, order=1):
    """``value + t`` as a jet in perturbation ``tag``."""
    return Jet.variable(value, 1.0, order, tag)


_FACT = [math.factorial(k) for k in range(MAX_ORDER + 1)]


def _to_taylor(c):
    return [x if k < 2 else x / _FACT[k] for k, x in enumerate(c)]


def _from_taylor(t):
    return [x if k < 2 else x * _FACT[k] for k, x in enumerate(t)]


def _tdiv(a, b):
    b0 = b[0]
    if base(b0) == 0:
        raise JetDomainError("division by zero")
    q = []
    for k in range(len(a)):
        acc = a[k]
        for i in range(1, k + 1):
            acc = acc - b[i] * q[k - i]
        q.append(acc / b0)
    return q


def _scalar_fn(name):
    return {"sqrt": math.sqrt, "exp": math.exp, "log": math.log,
            "sin": math.sin, "cos": math.cos}[name]


def sqrt(x):
    if not isinstance(x, Jet):
        if x < 0:
            raise JetDomainError(f"sqrt of negative value {x!r}")
        return math.sqrt(x)
    a = _to_taylor(x.c)
    if base(a[0]) <= 0 and len(a) > 1:
        raise JetDomainError("sqrt is not differentiable at non-positive values")
    s = [sqrt(a[0])]
    for k in range(1, len(a)):
        acc = a[k]
        for j in range(1, k):
            acc = acc - s[j] * s[k - j]
        s.append(acc / (2 * s[0]))
    return Jet(_from_taylor(s), x.tag)


def exp(x):
    if not isinstance(x, Jet):
        return math.exp(x)
    a = _to_taylor(x.c)
    e = [exp(a[0])]
    for k in range(1, len(a)):
        acc = 0.0
        for j in range(1, k + 1):
            acc = acc + j * a[j] * e[k - j]
        e.append(acc / k)
    return Jet(_from_taylor(e), x.tag)


def log(x):
    if not isinstance(x, Jet):
        if x <= 0:
            raise JetDomainError(f"log of non-positive value {x!r}")
        return math.log(x)
    a = _to_taylor(x.c)
    if base(a[0]) <= 0:
        raise JetDomainError("log of non-positive value")
    out = [log(a[0])]
    for k in range(1, len(a)):
        acc = a[k]
        for j in range(1, k):
            acc = acc - (j * out[j] * a[k - j]) / k
        out.append(acc / a[0])
    return Jet(_from_taylor(out), x.tag)


def _sincos(x):
    a = _to_taylor(x.c)
    s = [sin(a[0])]
    c = [cos(a[0])]
    for k in range(1, len(a)):
        sk = 0.0
        ck = 0.0
        for j in range(1, k + 1):
            sk = sk + j * a[j] * c[k - j]
            ck = ck - j * a[j] * s[k - j]
        s.append(sk / k)
        c.append(ck / k)
    return Jet(_from_taylor(s), x.tag), Jet(_from_taylor(c), x.tag)


def sin(x):
    if not isinstance(x, Jet):
        return math.sin(x)
    return _sincos(x)[0]


def cos(x):
    if not isinstance(x, Jet):
        return math.cos(x)
    return _sincos(x)[1]


def fabs(x):
    if not isinstance(x, Jet):
        return abs(x)
    b = base(x)
    if b == 0 and len(x.c) > 1:
        raise JetDomainError("abs is not differentiable at 0")
    return x if b > 0 else -x


def ipow(x, n):
    if n < 0:
        return 1.0 / ipow(x, -n)
    if not isinstance(x, Jet):
        return x ** n
    result = None
    square = x
    while n:
        if n & 1:
            result = square if result is None else result * square
        n >>= 1
        if n:
            square = square * square
    if result is None:
        return Jet.constant(1.0, x.order, x.tag)
    return result
