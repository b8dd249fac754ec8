"""Lightlike hypersurface: embedding, radical field, screen, transversal N.

All construction happens in :func:`frame_core`, which works on generic
scalars (floats or nested jets) so the induced-geometry layer can
differentiate every frame field through its closed form.  Discrete choices
(pivots, dropped screen directions, Gram-Schmidt order) are made on base
values only, which keeps them fixed inside a jet stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import jet as _jet
from .ambient import AmbientSpace, metric_at
from .expr import BinOp, Compiled, Num, parse
from .jet import base, coef, new_tag
from .linalg import SingularMatrixError, obj, solve, to_float

__all__ = [
    "Hypersurface",
    "NullFramePoint",
    "FrameError",
    "NotLightlikeError",
    "RadicalMismatchError",
    "TransversalError",
    "GramSchmidtBreakdown",
    "frame_core",
    "induced_metric_at",
    "radical_at",
    "transversal_at",
    "null_frame_at",
]


class FrameError(ValueError):
    pass


class NotLightlikeError(FrameError):
    pass


class RadicalMismatchError(FrameError):
    pass


class TransversalError(FrameError):
    pass


class GramSchmidtBreakdown(FrameError):
    pass


@dataclass(frozen=True)
class Hypersurface:
    params: tuple
    embedding: tuple  # Expr per ambient coordinate
    xi: tuple | None = None  # Expr per parameter
    screen: tuple | None = None  # m tuples of Expr per parameter
    domain: tuple = ()

    def __post_init__(self):
        k = len(self.params)
        if self.xi is not None and len(self.xi) != k:
            raise ValueError(f"xi needs {k} components")
        if self.screen is not None:
            if len(self.screen) != k - 1 or any(len(w) != k for w in self.screen):
                raise ValueError(f"screen needs {k - 1} vectors of {k} components")
        if self.domain and len(self.domain) != k:
            raise ValueError("domain needs one interval per parameter")
        c = {"phi": [Compiled(e, self.params) for e in self.embedding]}
        if self.xi is not None:
            c["xi"] = [Compiled(e, self.params) for e in self.xi]
        if self.screen is not None:
            c["screen"] = [[Compiled(e, self.params) for e in w] for w in self.screen]
        object.__setattr__(self, "_compiled", c)

    @property
    def m(self):
        return len(self.params) - 1

    @classmethod
    def from_strings(cls, params, embedding, xi=None, screen=None, domain=()):
        params = tuple(params)
        emb = tuple(parse(str(s), params) for s in embedding)
        xis = None if xi is None else tuple(parse(str(s), params) for s in xi)
        scr = None if screen is None else tuple(tuple(parse(str(s), params) for s in w)
                                                for w in screen)
        return cls(params, emb, xis, scr, tuple(tuple(map(float, d)) for d in domain))

    def scaled_xi(self, lam):
        """Same hypersurface with the pinned radical field multiplied by ``lam``."""
        if self.xi is None:
            raise ValueError("scaling needs a pinned xi")
        xi = tuple(BinOp("*", Num(float(lam)), e) for e in self.xi)
        return Hypersurface(self.params, self.embedding, xi, self.screen, self.domain)


def _embedding_jets(h, u):
    """``x = phi(u)`` and ``T[i] = d_i phi`` for generic ``u``."""
    fns = h._compiled["phi"]
    k = len(u)
    T = np.empty((k, len(fns)), dtype=object)
    x = None
    for i in range(k):
        tag = new_tag()
        us = list(u)
        us[i] = u[i] + _jet.seed(0.0, tag)
        vals = [f(*us) for f in fns]
        if x is None:
            x = [coef(v, tag, 0) for v in vals]
        T[i] = [coef(v, tag, 1) for v in vals]
    return x, T


def _kernel_vector(gram):
    """Deterministic kernel: largest base component fixed, norm 1, that component positive."""
    gf = to_float(gram)
    _, _, vt = np.linalg.svd(gf)
    v0 = vt[-1]
    mags = np.abs(v0)
    k = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-9))[0])
    n = len(gf)
    rest = [i for i in range(n) if i != k]
    sub = obj(gram)[np.ix_(rest, rest)]
    rhs = -obj(gram)[rest, k]
    part = solve(sub, rhs)
    v = np.empty(n, dtype=object)
    v[k] = 1.0
    v[rest] = part
    norm = _jet.sqrt(sum(vi * vi for vi in v))
    return v / norm


def _default_screen(xi_p):
    xf = np.abs(to_float(xi_p))
    drop = int(np.argmax(xf))
    nn = sum(x * x for x in xi_p)
    W = []
    for j in range(len(xi_p)):
        if j == drop:
            continue
        e = np.zeros(len(xi_p), dtype=object)
        e[j] = 1.0
        W.append(e - (xi_p[j] / nn) * obj(xi_p))
    return np.array(W, dtype=object)


def _gram_schmidt(W, G, tol=1e-10):
    """Pseudo-orthonormalize rows of ``W`` w.r.t. ``G``; returns (E, eps, order)."""
    remaining = [obj(w) for w in W]
    idx = list(range(len(W)))
    E, eps, order = [], [], []
    while remaining:
        norms = [w @ G @ w for w in remaining]
        mags = [abs(base(v)) for v in norms]
        best = max(mags)
        j = next(i for i, v in enumerate(mags) if v >= best * (1 - 1e-9))
        if mags[j] < tol:
            raise GramSchmidtBreakdown(
                f"screen Gram-Schmidt breakdown (|g(v,v)| = {mags[j]:.3g}); "
                "try a different screen or ordering")
        v = remaining.pop(j)
        order.append(idx.pop(j))
        s = 1 if base(norms[j]) > 0 else -1
        e = v / _jet.sqrt(norms[j] * s)
        E.append(e)
        eps.append(s)
        remaining = [w - (s * (w @ G @ e)) * e for w in remaining]
    return np.array(E, dtype=object), eps, order


def frame_core(space: AmbientSpace, h: Hypersurface, u, xi_p=None, W_p=None,
               with_E=True):
    """Assemble the null frame at generic parameter point ``u``.

    ``xi_p``/``W_p`` override the manifest radical field / screen (parameter
    components).  Returns a namespace with ``x, T, G, gram, xi_p, xi, W_p, W,
    S, N, eta`` and optionally ``E_p, E, eps``.
    """
    x, T = _embedding_jets(h, u)
    G = obj(space.metric_values(x))
    gram = T @ G @ T.T
    c = h._compiled
    if xi_p is None:
        if "xi" in c:
            xi_p = np.array([f(*u) for f in c["xi"]], dtype=object)
        else:
            xi_p = _kernel_vector(gram)
    xi_p = obj(xi_p)
    if W_p is None:
        if "screen" in c:
            W_p = np.array([[f(*u) for f in w] for w in c["screen"]], dtype=object)
        else:
            W_p = _default_screen(xi_p)
    W_p = obj(W_p)
    xi = xi_p @ T
    W = W_p @ T
    S = W @ G @ W.T
    Gxi = G @ xi
    a = int(np.argmax(np.abs(to_float(Gxi))))
    if abs(base(Gxi[a])) < 1e-14:
        raise TransversalError("radical field has zero ambient metric dual")
    ea = np.zeros(len(x), dtype=object)
    ea[a] = 1.0
    try:
        coeffs = solve(S, W @ G[:, a])
    except SingularMatrixError:
        raise TransversalError("screen Gram matrix is singular") from None
    V = ea - coeffs @ W
    gVx = V @ Gxi
    gVV = V @ G @ V
    N = (V - (gVV / (2 * gVx)) * xi) / gVx
    out = SimpleNamespace(u=list(u), x=x, T=T, G=G, gram=gram, xi_p=xi_p, xi=xi,
                          W_p=W_p, W=W, S=S, N=N, eta=T @ G @ N)
    if with_E:
        out.E_p, out.eps, out.E_order = _gram_schmidt(W_p, gram)
        out.E = out.E_p @ T
    return out


# -- float-level API ------------------------------------------------------------


def _u(p):
    return [float(v) for v in p]


def induced_metric_at(h: Hypersurface, space: AmbientSpace, p):
    """Gram matrix of the coordinate tangent frame and its numerical rank."""
    u = _u(p)
    x, T = _embedding_jets(h, u)
    x = [float(v) for v in x]
    T = np.asarray(T, dtype=float)
    metric_at(space, x)
    gram = T @ np.asarray(space.metric_values(x), dtype=float) @ T.T
    if np.linalg.matrix_rank(T, tol=1e-10 * max(np.abs(T).max(), 1e-300)) < h.m + 1:
        raise NotLightlikeError("embedding Jacobian is rank deficient")
    sv = np.linalg.svd(gram, compute_uv=False)
    rank = int(np.sum(sv > 1e-10 * max(sv[0], 1e-300)))
    if rank == h.m + 1:
        raise NotLightlikeError(f"induced metric is non-degenerate at {u}")
    if rank < h.m:
        raise NotLightlikeError(f"induced metric has nullity {h.m + 1 - rank} > 1 at {u}")
    return gram, rank


def radical_at(h: Hypersurface, space: AmbientSpace, p, tol=1e-9):
    """Radical field in parameter components (pinned one verified against the kernel)."""
    gram, _ = induced_metric_at(h, space, p)
    if "xi" in h._compiled:
        xi_p = np.array([f(*_u(p)) for f in h._compiled["xi"]], dtype=float)
        res = np.abs(gram @ xi_p).max()
        if res > tol * max(1.0, np.abs(gram).max() * np.abs(xi_p).max()):
            raise RadicalMismatchError(f"supplied xi is not in the radical (residual {res:.3g})")
        return xi_p
    return np.asarray(_kernel_vector(gram), dtype=float)


def transversal_at(h: Hypersurface, space: AmbientSpace, p, xi_p=None, W_p=None):
    return null_frame_at(h, space, p, xi_p=xi_p, W_p=W_p).N


@dataclass
class NullFramePoint:
    p: tuple
    x: np.ndarray
    T: np.ndarray
    xi_p: np.ndarray
    xi: np.ndarray
    W_p: np.ndarray
    W: np.ndarray
    E_p: np.ndarray
    E: np.ndarray
    eps: tuple
    N: np.ndarray
    gram: np.ndarray
    G: np.ndarray
    eta_coeffs: np.ndarray  # eta(d_i) = g(T_i, N)
    residuals: dict = field(default_factory=dict)

    @property
    def frame_matrix(self):
        """Columns ``[W_1 .. W_m | xi | N]``."""
        return np.column_stack(list(self.W) + [self.xi, self.N])

    def g(self, a, b):
        return float(np.asarray(a) @ self.G @ np.asarray(b))

    def eta(self, v):
        return self.g(v, self.N)

    def push(self, comps):
        """Ambient vector of a tangent vector given in parameter components."""
        return np.asarray(comps, dtype=float) @ self.T

    def to_dict(self):
        return {
            "p": list(self.p), "x": self.x.tolist(), "T": self.T.tolist(),
            "xi_param": self.xi_p.tolist(), "xi": self.xi.tolist(),
            "screen_param": self.W_p.tolist(), "W": self.W.tolist(),
            "E_param": self.E_p.tolist(), "E": self.E.tolist(), "eps": list(self.eps), "N": self.N.tolist(),
            "gram": self.gram.tolist(), "eta": self.eta_coeffs.tolist(),
            "residuals": self.residuals,
        }


def null_frame_at(h: Hypersurface, space: AmbientSpace, p, xi_p=None, W_p=None,
                  tol=1e-9) -> NullFramePoint:
    """Evaluated quasi-orthonormal frame with all invariants checked."""
    induced_metric_at(h, space, p)
    if xi_p is None:
        xi_p = radical_at(h, space, p)
    core = frame_core(space, h, _u(p), xi_p=xi_p, W_p=W_p)
    f = lambda a: np.asarray(to_float(np.asarray(a, dtype=object)), dtype=float)
    G = np.asarray(to_float(core.G), dtype=float)
    fr = NullFramePoint(
        tuple(_u(p)), f(core.x), f(core.T), f(core.xi_p), f(core.xi), f(core.W_p), f(core.W),
        f(core.E_p), f(core.E), tuple(core.eps), f(core.N), f(core.gram), G, f(core.eta))
    S = fr.W @ G @ fr.W.T
    if abs(np.linalg.det(S)) < 1e-12 * max(np.abs(S).max(), 1e-300) ** len(S):
        raise TransversalError("screen Gram matrix is degenerate")
    scale = max(1.0, np.abs(fr.N).max() * np.abs(fr.xi).max())
    res = {
        "g(N,N)": abs(fr.g(fr.N, fr.N)),
        "g(xi,N)-1": abs(fr.g(fr.xi, fr.N) - 1.0),
        "g(N,W)": float(np.abs(fr.W @ G @ fr.N).max()) if h.m else 0.0,
        "g(xi,T)": float(np.abs(fr.T @ G @ fr.xi).max()),
        "E-orthonormal": float(np.abs(fr.E @ G @ fr.E.T - np.diag(fr.eps)).max()) if h.m else 0.0,
    }
    fr.residuals = res
    bad = {k: v for k, v in res.items() if v > tol * scale}
    if bad:
        raise TransversalError(f"null frame invariants violated: {bad}")
    if np.linalg.cond(fr.frame_matrix) > 1e12:
        raise TransversalError("frame [W|xi|N] is singular")
    return fr
