"""Ambient statistical manifold: metric, dual connection pair, curvature.

Index conventions (0-based coordinates):

* ``gamma[a, b, c]`` is the coefficient of ``D_{e_b} e_c`` along ``e_a``, so
  ``(D_X Y)^a = X(Y^a) + gamma[a, b, c] X^b Y^c``.
* ``R[a, b, c, d]`` is the component with ``R(X, Y) Z = R[a, b, c, d] Z^b X^c Y^d e_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Mapping, Sequence

import numpy as np

from . import jet as _jet
from .expr import Compiled, Expr, jet_eval, parse
from .jet import Jet, base, coef, new_tag
from .linalg import SingularMatrixError, inv, obj

__all__ = [
    "AmbientSpace",
    "ConnPair",
    "MetricAt",
    "DegenerateMetricError",
    "StatValidationReport",
    "metric_at",
    "christoffel_lc_at",
    "connection_pair_at",
    "connection_derivatives_at",
    "validate_statistical",
    "ambient_curvature_at",
    "constant_curvature_residual",
    "fit_constant_curvature",
    "default_probes",
]


class DegenerateMetricError(ValueError):
    pass


@dataclass(frozen=True)
class AmbientSpace:
    coords: tuple
    metric: tuple  # dim x dim tuple of Expr
    mode: str = "K_lower"
    K_lower: Mapping = field(default_factory=dict)  # (a, b, c) -> Expr, ordered components
    gamma: tuple | None = None
    gamma_star: tuple | None = None
    constant_c: float | None = None

    def __post_init__(self):
        n = len(self.coords)
        if len(self.metric) != n or any(len(r) != n for r in self.metric):
            raise ValueError(f"metric must be {n}x{n}")
        if self.mode not in ("K_lower", "explicit"):
            raise ValueError(f"unknown connection mode {self.mode!r}")
        if self.mode == "explicit" and (self.gamma is None or self.gamma_star is None):
            raise ValueError("explicit mode needs gamma and gamma_star")
        for key in self.K_lower:
            if len(key) != 3 or any(not 0 <= k < n for k in key):
                raise IndexError(f"K_lower index {key} out of range for dim {n}")
        object.__setattr__(self, "_compiled", self._compile())

    @property
    def dim(self):
        return len(self.coords)

    @classmethod
    def from_strings(cls, coords, metric, K_lower=None, gamma=None, gamma_star=None,
                     constant_c=None):
        coords = tuple(coords)
        met = tuple(tuple(parse(str(s), coords) for s in row) for row in metric)
        if gamma is not None:
            g = tuple(tuple(tuple(parse(str(s), coords) for s in r2) for r2 in r1) for r1 in gamma)
            gs = tuple(tuple(tuple(parse(str(s), coords) for s in r2) for r2 in r1)
                       for r1 in gamma_star)
            return cls(coords, met, "explicit", {}, g, gs, constant_c)
        return cls(coords, met, "K_lower", expand_K(K_lower or {}, coords), None, None,
                   constant_c)

    def _compile(self):
        n = self.dim
        c = {}
        c["metric"] = [[Compiled(self.metric[i][j], self.coords) for j in range(n)] for i in range(n)]
        c["metric_const"] = all(f.is_constant for row in c["metric"] for f in row)
        c["K"] = {k: Compiled(e, self.coords) for k, e in self.K_lower.items()}
        if self.mode == "explicit":
            c["gamma"] = [[[Compiled(e, self.coords) for e in r2] for r2 in r1] for r1 in self.gamma]
            c["gamma_star"] = [[[Compiled(e, self.coords) for e in r2] for r2 in r1]
                               for r1 in self.gamma_star]
        if c["metric_const"]:
            g0 = np.array([[f(*[0.0] * n) for f in row] for row in c["metric"]], dtype=float)
            c["metric_value"] = g0
            try:
                c["metric_inv"] = np.linalg.inv(g0)
            except np.linalg.LinAlgError:
                c["metric_inv"] = None
        return c

    # -- generic-scalar evaluation (floats or jets) ----------------------
    def metric_values(self, x):
        c = self._compiled
        if c["metric_const"]:
            return c["metric_value"]
        n = self.dim
        g = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(i, n):
                g[i, j] = c["metric"][i][j](*x)
                g[j, i] = g[i, j]
        return g

    def metric_with_derivatives(self, x):
        """Metric and ``dg[c, a, b] = d_c g_ab`` at a generic point."""
        n = self.dim
        c = self._compiled
        if c["metric_const"]:
            return c["metric_value"], np.zeros((n, n, n))
        dg = np.empty((n, n, n), dtype=object)
        g = np.empty((n, n), dtype=object)
        for d in range(n):
            tag = new_tag()
            xs = list(x)
            xs[d] = x[d] + _jet.seed(0.0, tag)
            for i in range(n):
                for j in range(i, n):
                    v = c["metric"][i][j](*xs)
                    if d == 0:
                        g[i, j] = g[j, i] = coef(v, tag, 0)
                    dg[d, i, j] = dg[d, j, i] = coef(v, tag, 1)
        return g, dg

    def metric_inverse(self, g):
        c = self._compiled
        if c["metric_const"] and c["metric_inv"] is not None:
            return c["metric_inv"]
        return inv(g)

    def connection_coefficients(self, x):
        """``(gamma0, gamma, gamma_star)`` at a generic point."""
        n = self.dim
        c = self._compiled
        g, dg = self.metric_with_derivatives(x)
        ginv = self.metric_inverse(g)
        if c["metric_const"]:
            gamma0 = np.zeros((n, n, n))
        else:
            # S[d, b, c] = d_b g_dc + d_c g_db - d_d g_bc
            S = (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
            gamma0 = 0.5 * np.einsum("ad,dbc->abc", obj(ginv), obj(S))
        if self.mode == "explicit":
            gam = np.array([[[f(*x) for f in r2] for r2 in r1] for r1 in c["gamma"]], dtype=object)
            gams = np.array([[[f(*x) for f in r2] for r2 in r1] for r1 in c["gamma_star"]],
                            dtype=object)
            return (gam + gams) / 2, gam, gams
        if not c["K"]:
            return gamma0, gamma0, gamma0
        Kl = np.zeros((n, n, n), dtype=object)
        for (a, b, cc), f in c["K"].items():
            Kl[a, b, cc] = f(*x)
        K = np.einsum("ad,dbc->abc", obj(ginv), Kl)
        return gamma0, gamma0 + K, gamma0 - K

    def raw_K_lower(self, x):
        n = self.dim
        Kl = np.zeros((n, n, n))
        for k, f in self._compiled["K"].items():
            Kl[k] = f(*x)
        return Kl


def expand_K(K_lower: Mapping, coords: Sequence[str]):
    """Expand manifest K entries into ordered components.

    A sorted key ``a<=b<=c`` fills every permutation not given explicitly; an
    unsorted key sets that single ordered component.
    """
    explicit = {}
    sorted_keys = {}
    for key, text in K_lower.items():
        idx = _parse_key(key)
        e = text if isinstance(text, Expr) else parse(str(text), coords)
        if list(idx) == sorted(idx):
            sorted_keys[idx] = e
        explicit[idx] = e
    out = dict(explicit)
    for idx, e in sorted_keys.items():
        for perm in set(permutations(idx)):
            out.setdefault(perm, e)
    return out


def _parse_key(key):
    if isinstance(key, tuple):
        return tuple(int(k) for k in key)
    parts = str(key).split(",")
    if len(parts) != 3:
        raise ValueError(f"K_lower key {key!r} must be 'a,b,c'")
    return tuple(int(p) for p in parts)


# -- float-level operations ---------------------------------------------


@dataclass
class MetricAt:
    g: np.ndarray
    inv: np.ndarray
    signature: tuple

    @property
    def index(self):
        return sum(1 for s in self.signature if s < 0)


def metric_at(space: AmbientSpace, x) -> MetricAt:
    g = np.asarray(space.metric_values(list(map(float, x))), dtype=float)
    scale = max(np.abs(g).max(), 1e-300) ** space.dim
    det = np.linalg.det(g)
    if abs(det) < 1e-12 * scale:
        raise DegenerateMetricError(f"degenerate metric at {list(x)} (det={det:.3g})")
    ginv = np.linalg.inv(g)
    w = np.linalg.eigvalsh(g)
    return MetricAt(g, ginv, tuple(int(np.sign(v)) for v in w))


def christoffel_lc_at(space: AmbientSpace, x) -> np.ndarray:
    metric_at(space, x)
    return np.asarray(space.connection_coefficients(list(map(float, x)))[0], dtype=float)


@dataclass
class ConnPair:
    point: tuple
    gamma: np.ndarray
    gamma_star: np.ndarray
    gamma0: np.ndarray


def connection_pair_at(space: AmbientSpace, x) -> ConnPair:
    metric_at(space, x)
    x = [float(v) for v in x]
    g0, g, gs = space.connection_coefficients(x)
    if space.mode == "explicit":
        g0 = (np.asarray(g, float) + np.asarray(gs, float)) / 2
    return ConnPair(tuple(x), np.asarray(g, float), np.asarray(gs, float), np.asarray(g0, float))


def _metric_hessian(space, x):
    """``ddg[c, d, a, b] = d_c d_d g_ab`` by polarization of order-2 jets."""
    n = space.dim
    point = dict(zip(space.coords, x))
    H = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(a, n):
            e = space.metric[a][b]
            if not e.variables():
                continue
            for c in range(n):
                for d in range(c, n):
                    if c == d:
                        v = jet_eval(e, point, {space.coords[c]: 1.0}, 2).c[2]
                    else:
                        both = jet_eval(e, point, {space.coords[c]: 1.0, space.coords[d]: 1.0}, 2).c[2]
                        dc = jet_eval(e, point, {space.coords[c]: 1.0}, 2).c[2]
                        dd = jet_eval(e, point, {space.coords[d]: 1.0}, 2).c[2]
                        v = 0.5 * (both - dc - dd)
                    H[c, d, a, b] = H[d, c, a, b] = H[c, d, b, a] = H[d, c, b, a] = v
    return H


def connection_derivatives_at(space: AmbientSpace, x):
    """``(dgamma0, dgamma, dgamma_star)`` with ``dgamma[e, a, b, c] = d_e gamma[a, b, c]``."""
    x = [float(v) for v in x]
    n = space.dim
    c = space._compiled
    g, dg = space.metric_with_derivatives(x)
    g = np.asarray(g, float)
    dg = np.asarray(dg, float)
    ginv = np.linalg.inv(g)
    # d_e g^{ad} = -g^{ap} d_e g_pq g^{qd}
    dginv = -np.einsum("ap,epq,qd->ead", ginv, dg, ginv)
    if c["metric_const"]:
        dgam0 = np.zeros((n, n, n, n))
    else:
        H = _metric_hessian(space, x)
        S = np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg
        dS = (np.transpose(H, (0, 2, 1, 3)) + np.transpose(H, (0, 2, 3, 1)) - H)
        dgam0 = 0.5 * (np.einsum("ead,dbc->eabc", dginv, S) + np.einsum("ad,edbc->eabc", ginv, dS))
    if space.mode == "explicit":
        dg1 = _jet_partials(space, c["gamma"], x)
        dg2 = _jet_partials(space, c["gamma_star"], x)
        return (dg1 + dg2) / 2, dg1, dg2
    if not c["K"]:
        return dgam0, dgam0, dgam0
    Kl = space.raw_K_lower(x)
    dKl = np.zeros((n, n, n, n))
    for e in range(n):
        tag = new_tag()
        xs = list(x)
        xs[e] = x[e] + _jet.seed(0.0, tag)
        for k, f in c["K"].items():
            dKl[(e,) + k] = coef(f(*xs), tag, 1)
    dK = np.einsum("ead,dbc->eabc", dginv, Kl) + np.einsum("ad,edbc->eabc", ginv, dKl)
    return dgam0, dgam0 + dK, dgam0 - dK


def _jet_partials(space, fns, x):
    n = space.dim
    out = np.zeros((n, n, n, n))
    for e in range(n):
        tag = new_tag()
        xs = list(x)
        xs[e] = x[e] + _jet.seed(0.0, tag)
        for a in range(n):
            for b in range(n):
                for cc in range(n):
                    out[e, a, b, cc] = coef(fns[a][b][cc](*xs), tag, 1)
    return out


def curvature_from(gamma, dgamma):
    """``R[a,b,c,d] = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb``."""
    dterm = np.einsum("cadb->abcd", dgamma)
    quad = np.einsum("ace,edb->abcd", gamma, gamma)
    return dterm - np.transpose(dterm, (0, 1, 3, 2)) + quad - np.transpose(quad, (0, 1, 3, 2))


def ambient_curvature_at(space: AmbientSpace, x, which: str = "D") -> np.ndarray:
    """Curvature of the ambient connection ``which`` in {"D", "D*", "D0"}."""
    pair = connection_pair_at(space, x)
    d0, d1, d2 = connection_derivatives_at(space, x)
    gam, dgam = {"D": (pair.gamma, d1), "D*": (pair.gamma_star, d2),
                 "D0": (pair.gamma0, d0)}[which]
    return curvature_from(gam, dgam)


def apply_curvature(R, X, Y, Z):
    return np.einsum("abcd,b,c,d->a", R, Z, X, Y)


# -- probes / validation ---------------------------------------------------


def default_probes(dim, rng, n_random=8):
    """Coordinate basis plus seeded random vectors, as ``{label: vector}``."""
    probes = {f"e{i}": np.eye(dim)[i] for i in range(dim)}
    for k in range(n_random):
        probes[f"r{k}"] = rng.standard_normal(dim)
    return probes


@dataclass
class StatValidationReport:
    torsion_residual: float
    codazzi_residual: float
    duality_residual: float
    tolerance: float
    worst: dict
    duality_by_triple: dict = field(default_factory=dict)
    asymmetric_K: list = field(default_factory=list)

    @property
    def passed(self):
        return (self.torsion_residual < self.tolerance
                and self.codazzi_residual < self.tolerance
                and self.duality_residual < self.tolerance)

    def to_dict(self):
        return {
            "torsion_residual": self.torsion_residual,
            "codazzi_residual": self.codazzi_residual,
            "duality_residual": self.duality_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst": self.worst,
            "duality_by_triple": self.duality_by_triple,
            "asymmetric_K": self.asymmetric_K,
        }


def _metric_defects(space, x):
    """Tensors ``Q[c,a,b] = (D_c g)_ab`` and ``U[c,a,b]`` = duality defect density."""
    g, dg = space.metric_with_derivatives(x)
    g = np.asarray(g, float)
    dg = np.asarray(dg, float)
    pair = connection_pair_at(space, x)
    Q = dg - np.einsum("dca,db->cab", pair.gamma, g) - np.einsum("dcb,ad->cab", pair.gamma, g)
    U = dg - np.einsum("dca,db->cab", pair.gamma, g) - np.einsum("dcb,ad->cab", pair.gamma_star, g)
    return g, pair, Q, U


def duality_defect(space, x, Z, X, Y):
    """``Z g(X,Y) - g(D_Z X, Y) - g(X, D*_Z Y)`` for vectors at ``x``."""
    _, _, _, U = _metric_defects(space, x)
    return float(np.einsum("cab,c,a,b->", U, Z, X, Y))


def validate_statistical(space: AmbientSpace, points, probes=None, tol=1e-9,
                         rng=None, record_triples=None) -> StatValidationReport:
    """Residuals of the statistical-structure conditions and of duality.

    ``probes`` is ``None`` (coordinate basis plus 8 seeded random vectors), a
    ``{label: vector}`` mapping, or a callable ``point -> {label: vector}``.
    Per-triple duality maxima are recorded when ``record_triples`` is true
    (default: only for user-supplied probe sets).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if record_triples is None:
        record_triples = probes is not None
    worst = {k: {"value": 0.0} for k in ("torsion", "codazzi", "duality")}
    by_triple = {}
    for pi, x in enumerate(points):
        x = [float(v) for v in x]
        g, pair, Q, U = _metric_defects(space, x)
        T = pair.gamma - np.transpose(pair.gamma, (0, 2, 1))
        amax = np.unravel_index(np.argmax(np.abs(T)), T.shape)
        tval = float(np.abs(T)[amax])
        if tval > worst["torsion"]["value"] or pi == 0:
            if tval >= worst["torsion"]["value"]:
                worst["torsion"] = {"value": tval, "point": x, "index": [int(i) for i in amax]}
        if callable(probes):
            pr = probes(x)
        elif probes is None:
            pr = default_probes(space.dim, rng)
        else:
            pr = probes
        labels = list(pr)
        V = np.array([pr[k] for k in labels], dtype=float)
        # codazzi(X,Y,Z) = Q(X,Y,Z) - Q(Y,X,Z) - g(T(X,Y), Z)
        gT = np.einsum("ad,dbc->abc", g, T)  # g(T(e_b, e_c), e_a) -> [a,b,c]
        cod = (np.einsum("cab,ic,ja,kb->ijk", Q, V, V, V)
               - np.einsum("cab,jc,ia,kb->ijk", Q, V, V, V)
               - np.einsum("abc,ib,jc,ka->ijk", gT, V, V, V))
        dual = np.einsum("cab,ic,ja,kb->ijk", U, V, V, V)
        for name, arr in (("codazzi", cod), ("duality", dual)):
            idx = np.unravel_index(np.argmax(np.abs(arr)), arr.shape)
            val = float(np.abs(arr)[idx])
            if val >= worst[name]["value"]:
                worst[name] = {"value": val, "point": x,
                               "probes": [labels[i] for i in idx]}
        if record_triples:
            for i, j, k in product(range(len(labels)), repeat=3):
                key = f"{labels[i]},{labels[j]},{labels[k]}"
                by_triple[key] = max(by_triple.get(key, 0.0), float(abs(dual[i, j, k])))
    asym = asymmetric_K_components(space, points) if space.mode == "K_lower" else []
    return StatValidationReport(
        worst["torsion"]["value"], worst["codazzi"]["value"], worst["duality"]["value"],
        tol, worst, by_triple, asym)


def asymmetric_K_components(space, points, tol=1e-12):
    """Ordered index triples whose lowered K differs from a permutation."""
    out = []
    keys = set(space.K_lower)
    for key in sorted(keys):
        for perm in set(permutations(key)):
            if perm <= key and perm in keys:
                continue
            worst = 0.0
            for x in points:
                Kl = space.raw_K_lower([float(v) for v in x])
                worst = max(worst, abs(Kl[key] - Kl[perm]))
            if worst > tol:
                out.append({"triple": list(key), "partner": list(perm), "residual": worst})
    return out


def _curv_operator_terms(space, x, probes):
    m = metric_at(space, x)
    R = ambient_curvature_at(space, x, "D")
    V = list(probes.values())
    Rs, Qs = [], []
    for X, Y, Z in product(V, repeat=3):
        Rs.append(apply_curvature(R, X, Y, Z))
        Qs.append((Y @ m.g @ Z) * X - (X @ m.g @ Z) * Y)
    return np.array(Rs), np.array(Qs)


def constant_curvature_residual(space: AmbientSpace, x, c: float, probes=None, rng=None):
    """``max || R(X,Y)Z - c (g(Y,Z) X - g(X,Z) Y) ||`` over probe triples."""
    if probes is None:
        probes = default_probes(space.dim, rng or np.random.default_rng(0), 2)
    Rs, Qs = _curv_operator_terms(space, [float(v) for v in x], probes)
    return float(np.max(np.linalg.norm(Rs - c * Qs, axis=1)))


def fit_constant_curvature(space: AmbientSpace, points, probes=None, rng=None):
    """Least-squares ``c`` over points and probe triples; returns ``(c, residual)``."""
    rng = rng or np.random.default_rng(0)
    if probes is None:
        probes = default_probes(space.dim, rng, 2)
    num = den = 0.0
    terms = []
    for x in points:
        Rs, Qs = _curv_operator_terms(space, [float(v) for v in x], probes)
        num += float(np.sum(Rs * Qs))
        den += float(np.sum(Qs * Qs))
        terms.append((Rs, Qs))
    c = num / den if den > 1e-300 else 0.0
    res = max(float(np.max(np.linalg.norm(Rs - c * Qs, axis=1))) for Rs, Qs in terms)
    return c, res
