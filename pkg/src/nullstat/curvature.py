"""Induced curvature, Gauss-Codazzi residuals, Ricci-type tensors, scalars.

Tangent vectors are parameter components; probe fields are :class:`Germ`
objects so that derivative terms such as ``(D_X B)(Y,Z)`` and ``d tau``
see genuine fields rather than frozen vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from .induced import Germ, LocalGeometry

__all__ = [
    "induced_curvature_at",
    "gauss_codazzi_residuals",
    "gauss_codazzi_sides",
    "ricci02_at",
    "ricci02_both",
    "ricci_matrix",
    "curvature_scalars_at",
    "CurvatureReport",
    "curvature_report",
    "frame_germs",
    "random_germs",
    "probe_triples",
    "GC_IDS",
]

GC_IDS = ("gauss-screen", "gauss-screen*", "codazzi", "codazzi*", "transversal", "transversal*",
          "transversal-radical", "transversal-radical*", "radical-pairing", "radical-pairing*",
          "radical-pairing*-literal")


def _lg(space, h, p, lg):
    return lg if lg is not None else LocalGeometry(space, h, p)


def induced_curvature_at(space, h, p, conn="D", X=None, Y=None, Z=None, lg=None):
    """``R(X,Y)Z`` (or ``R*``) in parameter components; full tensor if no fields."""
    lg = _lg(space, h, p, lg)
    star = conn in ("D*", "star")
    if X is None:
        return lg.R_star if star else lg.R
    return lg.curv(star, _v(X), _v(Y), _v(Z))


def _v(X):
    return X.v if isinstance(X, Germ) else np.asarray(X, dtype=float)


# -- probe fields ---------------------------------------------------------------


def frame_germs(lg):
    """Germs of the screen frame E_1..E_m and xi, keyed by name."""
    out = {f"E{i + 1}": lg.field(f"E{i + 1}") for i in range(lg.m)}
    out["xi"] = lg.field("xi")
    return out


def random_germs(lg, rng, n):
    return {f"r{i}": Germ(rng.standard_normal(lg.k), rng.standard_normal((lg.k, lg.k)))
            for i in range(n)}


def probe_triples(lg, rng, n_random=10):
    """All distinct frame triples plus ``n_random`` random-field triples.

    Each entry is ``(labels, (X, Y, Z, W))``; the fourth field pairs with
    four-slot identities.
    """
    fr = frame_germs(lg)
    names = list(fr)
    out = []
    for a, b, c in permutations(names, 3):
        w = names[(names.index(c) + 1) % len(names)]
        out.append(((a, b, c, w), (fr[a], fr[b], fr[c], fr[w])))
    rnd = random_germs(lg, rng, 4 * n_random)
    keys = list(rnd)
    for i in range(n_random):
        lab = tuple(keys[4 * i:4 * i + 4])
        out.append((lab, tuple(rnd[k] for k in lab)))
    return out


# -- Gauss-Codazzi ----------------------------------------------------------------


def gauss_codazzi_sides(lg: LocalGeometry, X: Germ, Y: Germ, Z: Germ, W: Germ):
    """``{id: (lhs, rhs)}`` for every Gauss-Codazzi component equation."""
    x, y, z = X.v, Y.v, Z.v
    xi_a, N = lg.xi, lg.N
    Xa, Ya, Za = lg.push(x), lg.push(y), lg.push(z)
    PW = lg.P(W.v)
    PWa = lg.push(PW)
    B = lambda s, a, b: lg.form("B*" if s else "B", a, b)
    out = {}
    for s, tag in ((False, ""), (True, "*")):
        Rt = lg.curv_ambient(s, Xa, Ya, Za)
        Rz = lg.curv(s, x, y, z)
        # screen part: the opposite screen form pairs with the shape operator
        lhs = lg.gt(Rt, PWa)
        rhs = (lg.g(Rz, PW) - B(s, y, z) * lg.Cform(not s, x, PW)
               + B(s, x, z) * lg.Cform(not s, y, PW))
        out["gauss-screen*" if s else "gauss-screen"] = (lhs, rhs)
        # radical part (Codazzi): tau* pairs with D~, tau with D~*
        lhs = lg.gt(Rt, xi_a)
        t = lambda a: lg.tau_of(not s, a)
        rhs = (B(s, y, z) * t(x) - B(s, x, z) * t(y)
               + lg.dB(s, X, Y, Z) - lg.dB(s, Y, X, Z))
        out["codazzi*" if s else "codazzi"] = (lhs, rhs)
        # transversal part
        etaA = lambda a: lg.eta(lg.A(not s, a))
        lhs = lg.gt(Rt, N)
        rhs = lg.eta(Rz) - B(s, y, z) * etaA(x) + B(s, x, z) * etaA(y)
        out["transversal*" if s else "transversal"] = (lhs, rhs)
        # transversal part with third slot xi
        xi = lg.xi_p
        Rtx = lg.curv_ambient(s, Xa, Ya, xi_a)
        lhs = lg.gt(Rtx, N)
        rhs = lg.eta(lg.curv(s, x, y, xi)) - B(s, y, xi) * etaA(x) + B(s, x, xi) * etaA(y)
        out["transversal-radical*" if s else "transversal-radical"] = (lhs, rhs)
    # g(R(X,Y)xi, N) through the screen data and d tau
    xi = lg.xi_p
    lhs = lg.eta(lg.curv(False, x, y, xi))
    rhs = (lg.Cform(False, y, lg.Abar_xi(False, x)) - lg.Cform(False, x, lg.Abar_xi(False, y))
           - lg.two_dtau(False, X, Y))
    out["radical-pairing"] = (lhs, rhs)
    lhs = lg.eta(lg.curv(True, x, y, xi))
    base = lg.Cform(True, y, lg.Abar_xi(True, x)) - lg.Cform(True, x, lg.Abar_xi(True, y))
    out["radical-pairing*"] = (lhs, base - lg.two_dtau(True, X, Y))
    out["radical-pairing*-literal"] = (lhs, base - lg.two_dtau(False, X, Y))
    return out


def gauss_codazzi_residuals(space, h, p, probes=None, rng=None, lg=None, n_random=10):
    """Max ``|lhs - rhs|`` per identity over the probe triples."""
    lg = _lg(space, h, p, lg)
    if probes is None:
        probes = probe_triples(lg, rng if rng is not None else np.random.default_rng(0), n_random)
    res = {}
    for _, (X, Y, Z, W) in probes:
        for key, (a, b) in gauss_codazzi_sides(lg, X, Y, Z, W).items():
            res[key] = max(res.get(key, 0.0), abs(a - b))
    return res


# -- Ricci-type tensors -----------------------------------------------------------


def ricci02_both(lg: LocalGeometry, star, X, Y):
    """``(primary, secondary, derived)`` values of the Ricci-type tensor.

    primary: sum_i eps_i g(R(X,E_i)Y,E_i) + g(R(X,xi)Y,N).
    secondary: Ric~(X,Y) - B(X,Y) tr A*_N + g(A*_N X, Abar*_xi Y) + g(R(X,xi)Y,N).
    derived: the same expansion without the double-counted ambient xi-N term
    and with the trace restricted to the screen.
    """
    X, Y = _v(X), _v(Y)
    xi = lg.xi_p
    eps = lg.eps
    E = lg.E_p
    prim = sum(eps[i] * lg.g(lg.curv(star, X, E[i], Y), E[i]) for i in range(lg.m))
    rxn = lg.eta(lg.curv(star, X, xi, Y))
    prim += rxn
    Xa, Ya = lg.push(X), lg.push(Y)
    screen_amb = sum(eps[i] * lg.gt(lg.curv_ambient(star, Xa, lg.E[i], Ya), lg.E[i])
                     for i in range(lg.m))
    amb_xn = lg.gt(lg.curv_ambient(star, Xa, lg.xi, Ya), lg.N)
    ric_t = screen_amb + amb_xn
    Aop = lambda a: lg.A(not star, a)  # A*_N for D, A_N for D*
    tr_screen = sum(eps[i] * lg.g(Aop(E[i]), E[i]) for i in range(lg.m))
    tr_full = tr_screen + lg.eta(Aop(xi))
    b = lg.form("B*" if star else "B", X, Y)
    mixed = lg.g(Aop(X), lg.Abar_xi(not star, Y))
    sec = ric_t - b * tr_full + mixed + rxn
    der = screen_amb - b * tr_screen + mixed + rxn
    return prim, sec, der


def ricci02_at(space, h, p, conn="D", X=None, Y=None, lg=None, path="primary"):
    lg = _lg(space, h, p, lg)
    vals = ricci02_both(lg, conn in ("D*", "star"), X, Y)
    return vals[{"primary": 0, "secondary": 1, "derived": 2}[path]]


def ricci_matrix(lg, star):
    """Primary Ricci-type tensor over the frame {E_1..E_m, xi}."""
    basis = list(lg.E_p) + [lg.xi_p]
    return np.array([[ricci02_both(lg, star, a, b)[0] for b in basis] for a in basis])


# -- scalars --------------------------------------------------------------------------


def curvature_scalars_at(space, h, p, c=None, lg=None):
    """Mean, sectional, null-sectional curvatures and the scalar decompositions.

    When ``c`` is given, both readings of the constant-curvature expansions are
    returned as ``(lhs, rhs)`` pairs under ``"checks"``.
    """
    lg = _lg(space, h, p, lg)
    m, eps, E, xi = lg.m, lg.eps, lg.E_p, lg.xi_p
    B = lambda a, b: lg.form("B", a, b)
    Cs = lambda a, b: lg.Cform(True, a, b)
    H = sum(eps[i] * B(E[i], E[i]) for i in range(m)) / m
    kappa = np.full((m, m), np.nan)
    flagged = []
    for i in range(m):
        for j in range(m):
            den = lg.g(E[i], E[i]) * lg.g(E[j], E[j]) - lg.g(E[j], E[i]) ** 2
            if abs(den) < 1e-12:
                flagged.append([i, j])
                continue
            kappa[i, j] = lg.g(lg.curv(False, E[j], E[i], E[j]), E[i]) / den
    r_screen = float(np.nansum(kappa))
    k_null = np.array([lg.g(lg.curv(False, xi, E[i], xi), E[i]) / lg.g(E[i], E[i])
                       for i in range(m)])
    k_iN = np.array([lg.eta(lg.curv(False, E[i], xi, E[i])) for i in range(m)])
    sigma = r_screen + float(np.sum(k_null + k_iN))
    out = {"H": H, "kappa": kappa.tolist(), "degenerate_planes": flagged,
           "r_screen": r_screen, "kappa_null": k_null.tolist(), "kappa_iN": k_iN.tolist(),
           "sigma": sigma}
    ric_xx = ricci02_both(lg, False, xi, xi)[0]
    checks = {
        "radical-ricci-summed": (ric_xx, float(np.sum(k_null))),
        "radical-ricci-per-i": (ric_xx, k_null.tolist()),
    }
    if c is not None:
        Bm = np.array([[B(a, b) for b in E] for a in E])
        Cm = np.array([[Cs(a, b) for b in E] for a in E])
        lit = c * m * (1 - m) + sum(Bm[j, i] * Cm[i, j] - Bm[i, i] * Cm[j, j]
                                    for i in range(m) for j in range(m))
        wtd = c * m * (1 - m) + sum(eps[i] * eps[j] * (Bm[j, i] * Cm[i, j] - Bm[i, i] * Cm[j, j])
                                    for i in range(m) for j in range(m) if i != j)
        checks["screen-scalar-literal"] = (r_screen, lit)
        checks["screen-scalar-weighted"] = (r_screen, wtd)
        terms = np.array([B(E[i], xi) * Cs(xi, E[i]) - B(xi, xi) * Cs(E[i], E[i]) for i in range(m)])
        checks["null-sectional-literal"] = (float(np.sum(k_null)), float(np.sum(terms)))
        checks["null-sectional-weighted"] = (float(np.sum(k_null)), float(np.sum(np.array(eps) * terms)))
        etaAs = lambda a: lg.eta(lg.A(True, a))
        bx = np.array([B(xi, E[i]) * etaAs(E[i]) for i in range(m)])
        be = np.array([B(E[i], E[i]) * etaAs(xi) for i in range(m)])
        checks["mixed-sectional-summed"] = (float(np.sum(k_iN)), -c * m - float(np.sum(bx)) - float(np.sum(be)))
        checks["mixed-sectional-literal"] = (k_iN.tolist(), [-c * m - float(np.sum(bx)) - be[i] for i in range(m)])
        checks["mixed-sectional-derived"] = (float(np.sum(k_iN)),
                                 -c * float(np.sum(eps)) + float(np.sum(bx)) - float(np.sum(be)))
    out["checks"] = checks
    return out


@dataclass
class CurvatureReport:
    point: list
    R_components: dict
    R_star_components: dict
    ricci02: list
    ricci02_star: list
    asymmetry_defect: list
    scalars: dict
    gauss_codazzi: dict = field(default_factory=dict)

    def to_dict(self):
        return dict(self.__dict__)


def curvature_report(space, h, p, c=None, rng=None, lg=None, n_random=10):
    lg = _lg(space, h, p, lg)
    rng = rng if rng is not None else np.random.default_rng(0)
    fr = frame_germs(lg)
    names = list(fr)
    Rc, Rsc = {}, {}
    for a, b, cc in permutations(names, 3):
        key = f"{a},{b},{cc}"
        Rc[key] = lg.push(lg.curv(False, fr[a].v, fr[b].v, fr[cc].v)).tolist()
        Rsc[key] = lg.push(lg.curv(True, fr[a].v, fr[b].v, fr[cc].v)).tolist()
    ric = ricci_matrix(lg, False)
    rics = ricci_matrix(lg, True)
    gc = gauss_codazzi_residuals(None, None, None, rng=rng, lg=lg, n_random=n_random)
    return CurvatureReport(list(lg.p), Rc, Rsc, ric.tolist(), rics.tolist(),
                           (ric - ric.T).tolist(), curvature_scalars_at(None, None, None, c, lg), gc)
