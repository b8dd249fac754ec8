"""Dual Gauss-Weingarten decompositions and the induced objects.

Operator naming follows the pairing of the dual decompositions::

    D~_X Y  = D_X Y  + B(X,Y) N        D~_X N  = -A*_N X + tau*(X) N
    D~*_X Y = D*_X Y + B*(X,Y) N       D~*_X N = -A_N X  + tau(X) N

so ``A*_N`` and ``tau*`` come from the *unstarred* ambient connection.  On
the screen::

    D_X PY  = nabla_X PY  + C(X,PY) xi     D_X xi  = -Abar_xi X  - tau(X) xi
    D*_X PY = nabla*_X PY + C*(X,PY) xi    D*_X xi = -Abar*_xi X - tau*(X) xi

The xi-coefficients of ``D_X xi`` and ``D*_X xi`` are stored separately as
``eps`` and ``eps_star`` (``eps = -tau`` is an identity, not a definition).

Arrays index the coordinate tangent frame ``d_i`` of the parameters:
``Gam[a, i, j]`` with ``D_{d_i} d_j = Gam[a, i, j] d_a``; ``B[i, j]``;
``A_N[i]`` (parameter components of ``A_N d_i``); ``C[i, k]`` = ``C(d_i, W_k)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from types import SimpleNamespace

import numpy as np

from . import jet as _jet
from .ambient import AmbientSpace, ambient_curvature_at, curvature_from
from .expr import Compiled, parse
from .hypersurface import Hypersurface, frame_core, null_frame_at
from .jet import coef, new_tag
from .linalg import inv, obj, to_float

__all__ = [
    "local_core",
    "LocalGeometry",
    "local_geometry",
    "TangentField",
    "Germ",
    "FormPackage",
    "fundamental_forms_at",
    "induced_connection_coeffs_at",
    "screen_connection_at",
    "eta_project",
    "gauss_split",
    "ambient_derivative_along",
]

_KEYS = ("T", "xi_p", "xi", "W_p", "W", "N", "gram", "eta", "E_p")


def _coef_array(a, tag, k):
    return np.vectorize(lambda z: coef(z, tag, k), otypes=[object])(np.asarray(a, dtype=object))


def _extract(ns, tag, k):
    return {key: _coef_array(getattr(ns, key), tag, k) for key in _KEYS}


def local_core(space: AmbientSpace, h: Hypersurface, u):
    """Gauss-Weingarten data at generic parameter point ``u``.

    Returns a namespace of object arrays (floats or jets).
    """
    k = len(u)
    m = k - 1
    vals, dvals = None, []
    for i in range(k):
        tag = new_tag()
        us = list(u)
        us[i] = u[i] + _jet.seed(0.0, tag)
        core = frame_core(space, h, us)
        if vals is None:
            vals = _extract(core, tag, 0)
            vals["x"] = [coef(v, tag, 0) for v in core.x]
            vals["eps"] = core.eps
        dvals.append(_extract(core, tag, 1))
    v = SimpleNamespace(**vals)
    d = {key: np.array([dv[key] for dv in dvals], dtype=object) for key in _KEYS}
    d = SimpleNamespace(**d)  # d.X[i] = d_i X

    _, gam, gam_s = space.connection_coefficients(v.x)
    gam, gam_s = obj(gam), obj(gam_s)
    T = v.T
    F = np.column_stack(list(v.W) + [v.xi, v.N]) if m else np.column_stack([v.xi, v.N])
    Finv = inv(F)

    def amb(g, i, Y):
        return np.einsum("abc,b,c->a", g, T[i], Y)

    def split(vec):
        c = Finv @ vec
        return c[:m], c[m], c[m + 1]

    def tangent(sc, xc):
        return (sc @ v.W_p if m else 0.0) + xc * v.xi_p

    out = SimpleNamespace(v=v, d=d, Finv=Finv, gamma=gam, gamma_star=gam_s)
    for name, g in (("", gam), ("s", gam_s)):
        Gam = np.empty((k, k, k), dtype=object)
        Bf = np.empty((k, k), dtype=object)
        for i in range(k):
            for j in range(k):
                sc, xc, nc = split(d.T[i][j] + amb(g, i, T[j]))
                Gam[:, i, j] = tangent(sc, xc)
                Bf[i, j] = nc
        AN = np.empty((k, k), dtype=object)
        tN = np.empty(k, dtype=object)
        Dxi = np.empty((k, k), dtype=object)
        Abar = np.empty((k, m), dtype=object)
        epsx = np.empty(k, dtype=object)
        Bxi = np.empty(k, dtype=object)
        C = np.empty((k, m), dtype=object)
        nab = np.empty((k, m, m), dtype=object)
        BW = np.empty((k, m), dtype=object)
        for i in range(k):
            sc, xc, nc = split(d.N[i] + amb(g, i, v.N))
            AN[i] = -tangent(sc, xc)
            tN[i] = nc
            sc, xc, nc = split(d.xi[i] + amb(g, i, v.xi))
            Dxi[i] = tangent(sc, xc)
            Abar[i] = -sc
            epsx[i] = xc
            Bxi[i] = nc
            for kk in range(m):
                sc, xc, nc = split(d.W[i][kk] + amb(g, i, v.W[kk]))
                C[i, kk] = xc
                nab[i, kk] = sc
                BW[i, kk] = nc
        # A_N pairs with D~*, A*_N with D~ (see module docstring)
        other = "s" if name == "" else ""
        setattr(out, "Gam" + name, Gam)
        setattr(out, "B" + name, Bf)
        setattr(out, "AN" + other, AN)
        setattr(out, "tau" + other, tN)
        setattr(out, "Dxi" + name, Dxi)
        setattr(out, "Abar" + name, Abar)
        setattr(out, "epsx" + name, epsx)
        setattr(out, "Bxi" + name, Bxi)
        setattr(out, "C" + name, C)
        setattr(out, "nab" + name, nab)
        setattr(out, "BW" + name, BW)
    return out


_FLOAT_KEYS = ("Gam", "Gams", "B", "Bs", "AN", "ANs", "tau", "taus", "Dxi", "Dxis",
               "Abar", "Abars", "epsx", "epsxs", "Bxi", "Bxis", "C", "Cs", "nab", "nabs",
               "BW", "BWs", "Finv", "gamma", "gamma_star")

_DERIV_KEYS = ("Gam", "Gams", "B", "Bs", "tau", "taus")


def _f(a):
    return np.asarray(to_float(np.asarray(a, dtype=object)), dtype=float)


@dataclass
class Germ:
    """First-order germ of a tangent field: value and ``d[i] = d_i`` of the
    parameter components."""

    v: np.ndarray
    d: np.ndarray

    @classmethod
    def constant(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(v, np.zeros((len(v), len(v))))


class LocalGeometry:
    """All induced objects at one parameter point, as float arrays.

    Derivative data for curvature (``dGam`` etc.) is computed lazily.
    """

    def __init__(self, space: AmbientSpace, h: Hypersurface, p):
        self.space = space
        self.h = h
        self.p = [float(x) for x in p]
        self.frame = null_frame_at(h, space, self.p)
        core = local_core(space, h, self.p)
        self.k = len(self.p)
        self.m = self.k - 1
        for key in _FLOAT_KEYS:
            setattr(self, key, _f(getattr(core, key)))
        v, d = core.v, core.d
        for key in _KEYS:
            setattr(self, "eta_c" if key == "eta" else key, _f(getattr(v, key)))
            setattr(self, "d" + key, _f(getattr(d, key)))
        self.x = _f(v.x)
        self.eps = tuple(v.eps)
        self.G = np.asarray(space.metric_values(list(self.x)), dtype=float)
        self.E = self.E_p @ self.T

    # -- lazily computed derivative data ----------------------------------
    @cached_property
    def _derivs(self):
        out = {key: np.zeros((self.k,) + getattr(self, key).shape) for key in _DERIV_KEYS}
        for l in range(self.k):
            tag = new_tag()
            us = list(self.p)
            us[l] = self.p[l] + _jet.seed(0.0, tag)
            core = local_core(self.space, self.h, us)
            for key in _DERIV_KEYS:
                arr = np.asarray(getattr(core, key), dtype=object)
                out[key][l] = _f(_coef_array(arr, tag, 1))
        return out

    def deriv(self, key):
        """``d[l] = d_l key`` for ``key`` in Gam, Gams, B, Bs, tau, taus."""
        return self._derivs[key]

    @cached_property
    def R(self):
        """Induced curvature of D: ``R[a,b,c,d]``, ``R(X,Y)Z = R[a,b,c,d] Z^b X^c Y^d``."""
        return curvature_from(self.Gam, self.deriv("Gam"))

    @cached_property
    def R_star(self):
        return curvature_from(self.Gams, self.deriv("Gams"))

    @cached_property
    def R_ambient(self):
        return ambient_curvature_at(self.space, self.x, "D")

    @cached_property
    def R_ambient_star(self):
        return ambient_curvature_at(self.space, self.x, "D*")

    # -- pointwise algebra ----------------------------------------------------
    def push(self, X):
        return np.asarray(X, dtype=float) @ self.T

    def gt(self, a, b):
        """Ambient metric on ambient vectors."""
        return float(np.asarray(a) @ self.G @ np.asarray(b))

    def g(self, X, Y):
        """Induced (degenerate) metric on parameter components."""
        return float(np.asarray(X) @ self.gram @ np.asarray(Y))

    def split(self, vec):
        """Ambient vector -> (screen coefficients, xi coefficient, N coefficient)."""
        c = self.Finv @ np.asarray(vec, dtype=float)
        return c[:self.m], float(c[self.m]), float(c[self.m + 1])

    def tangent(self, sc, xc):
        return np.asarray(sc) @ self.W_p + xc * self.xi_p

    def eta(self, X):
        return float(np.asarray(X) @ self.eta_c)

    def P(self, X):
        return np.asarray(X, dtype=float) - self.eta(X) * self.xi_p

    def screen_coeffs(self, X):
        return self.split(self.push(X))[0]

    def field(self, name):
        """Germ of a named frame field: xi, W1.., E1.., d1.. (coordinate)."""
        if name == "xi":
            return Germ(self.xi_p, self.dxi_p)
        if name[0] == "W":
            i = int(name[1:]) - 1
            return Germ(self.W_p[i], self.dW_p[:, i])
        if name[0] == "E":
            i = int(name[1:]) - 1
            return Germ(self.E_p[i], self.dE_p[:, i])
        if name[0] == "d":
            return Germ.constant(np.eye(self.k)[int(name[1:]) - 1])
        raise KeyError(f"unknown frame field {name!r}")

    def named_fields(self):
        return ["xi"] + [f"W{i + 1}" for i in range(self.m)]

    # bilinear forms on parameter components
    def form(self, name, X, Y):
        M = {"B": self.B, "B*": self.Bs}[name]
        return float(np.asarray(X) @ M @ np.asarray(Y))

    def A(self, star, X):
        """``A_N X`` (star=False) or ``A*_N X`` in parameter components."""
        return np.asarray(X) @ (self.ANs if star else self.AN)

    def tau_of(self, star, X):
        return float(np.asarray(X) @ (self.taus if star else self.tau))

    def Abar_xi(self, star, X):
        """``Abar_xi X`` or ``Abar*_xi X`` in parameter components."""
        return (np.asarray(X) @ (self.Abars if star else self.Abar)) @ self.W_p

    def Cform(self, star, X, Y):
        """``C(X, PY)`` or ``C*(X, PY)``."""
        return float(np.asarray(X) @ (self.Cs if star else self.C) @ self.screen_coeffs(Y))

    def D(self, star, X: Germ, Y: Germ):
        """``D_X Y`` (or ``D*``) in parameter components."""
        Gam = self.Gams if star else self.Gam
        return X.v @ Y.d + np.einsum("aij,i,j->a", Gam, X.v, Y.v)

    def ambient_D(self, star, X: Germ, Y: Germ):
        """``D~_X Y`` for tangent fields, ambient components."""
        gam = self.gamma_star if star else self.gamma
        dY = np.einsum("j,ija->ia", Y.v, self.dT) + Y.d @ self.T  # d_i (Y^j T_j)
        return X.v @ dY + np.einsum("abc,b,c->a", gam, self.push(X.v), self.push(Y.v))

    def bracket(self, X: Germ, Y: Germ):
        return X.v @ Y.d - Y.v @ X.d

    def P_germ(self, Y: Germ):
        """Germ of ``PY = Y - eta(Y) xi``."""
        e = self.eta(Y.v)
        de = Y.d @ self.eta_c + self.deta @ Y.v
        return Germ(Y.v - e * self.xi_p, Y.d - e * self.dxi_p - np.outer(de, self.xi_p))

    def nabla(self, star, X: Germ, Y: Germ):
        """``(nabla_X PY, C(X,PY))`` from the split of ``D_X PY``."""
        DPY = self.D(star, X, self.P_germ(Y))
        sc, xc, _ = self.split(self.push(DPY))
        return sc @ self.W_p, xc

    def dB(self, star, X: Germ, Y: Germ, Z: Germ):
        """``(D_X B)(Y,Z)`` (or the starred pair) from germs."""
        Bm = self.Bs if star else self.B
        dBm = self.deriv("Bs" if star else "B")
        XBYZ = (np.einsum("ljk,l,j,k->", dBm, X.v, Y.v, Z.v)
                + (X.v @ Y.d) @ Bm @ Z.v + Y.v @ Bm @ (X.v @ Z.d))
        return float(XBYZ - self.D(star, X, Y) @ Bm @ Z.v - Y.v @ Bm @ self.D(star, X, Z))

    def two_dtau(self, star, X: Germ, Y: Germ):
        """``X(tau(Y)) - Y(tau(X)) - tau([X,Y])`` for tau (or tau*)."""
        t = self.taus if star else self.tau
        dt = self.deriv("taus" if star else "tau")
        XtY = X.v @ dt @ Y.v + (X.v @ Y.d) @ t
        YtX = Y.v @ dt @ X.v + (Y.v @ X.d) @ t
        return float(XtY - YtX - self.bracket(X, Y) @ t)

    def curv(self, star, X, Y, Z):
        """Induced ``R(X,Y)Z`` (or ``R*``) in parameter components."""
        R = self.R_star if star else self.R
        return np.einsum("abcd,b,c,d->a", R, Z, X, Y)

    def curv_ambient(self, star, X, Y, Z):
        """Ambient ``R~(X,Y)Z`` on ambient vectors."""
        R = self.R_ambient_star if star else self.R_ambient
        return np.einsum("abcd,b,c,d->a", R, Z, X, Y)


def local_geometry(space, h, p):
    return LocalGeometry(space, h, p)


# -- tangent fields ---------------------------------------------------------------


@dataclass(frozen=True)
class TangentField:
    """Tangent field given by parameter-component expressions or a frame name."""

    components: tuple | None = None
    name: str | None = None

    @classmethod
    def named(cls, name):
        return cls(None, name)

    @classmethod
    def from_strings(cls, comps, params):
        return cls(tuple(parse(str(c), params) for c in comps))

    def germ(self, lg: LocalGeometry) -> Germ:
        if self.name is not None:
            return lg.field(self.name)
        params = lg.h.params
        fns = [Compiled(e, params) for e in self.components]
        k = len(params)
        v = np.array([float(f(*lg.p)) for f in fns])
        d = np.zeros((k, k))
        for i in range(k):
            tag = new_tag()
            us = list(lg.p)
            us[i] = lg.p[i] + _jet.seed(0.0, tag)
            d[i] = [float(coef(f(*us), tag, 1)) for f in fns]
        return Germ(v, d)


def _germ(lg, X):
    if isinstance(X, Germ):
        return X
    if isinstance(X, TangentField):
        return X.germ(lg)
    if isinstance(X, str):
        return lg.field(X)
    return Germ.constant(X)


# -- public operations ------------------------------------------------------------


def eta_project(frame, X):
    """``(PX, eta(X))`` for an ambient tangent vector ``X``."""
    X = np.asarray(X, dtype=float)
    e = frame.eta(X)
    return X - e * frame.xi, e


def gauss_split(frame, v):
    """Coefficients of ``v`` in ``[W_1..W_m | xi | N]``."""
    c = np.linalg.solve(frame.frame_matrix, np.asarray(v, dtype=float))
    m = len(frame.W)
    return c[:m], float(c[m]), float(c[m + 1])


def ambient_derivative_along(space, h, conn, X, Y, p, lg=None):
    """Ambient derivative of a field along ``h`` in direction of tangent field ``X``.

    ``conn`` is "D~", "D~*" or "D~0"; ``Y`` is a tangent field, a frame name
    ("xi", "N", "W1", ...), or a tuple of ambient-component expressions in the
    parameters.
    """
    lg = lg or LocalGeometry(space, h, p)
    Xg = _germ(lg, X)
    gams = {"D~": lg.gamma, "D~*": lg.gamma_star, "D~0": (lg.gamma + lg.gamma_star) / 2}
    gam = gams[conn]
    if isinstance(Y, str) and Y == "N":
        val, dval = lg.N, lg.dN
    elif isinstance(Y, tuple):
        fns = [Compiled(parse(str(e), h.params) if isinstance(e, str) else e, h.params) for e in Y]
        val = np.array([float(f(*lg.p)) for f in fns])
        dval = np.zeros((lg.k, len(val)))
        for i in range(lg.k):
            tag = new_tag()
            us = list(lg.p)
            us[i] = lg.p[i] + _jet.seed(0.0, tag)
            dval[i] = [float(coef(f(*us), tag, 1)) for f in fns]
    else:
        Yg = _germ(lg, Y)
        val = lg.push(Yg.v)
        dval = np.einsum("j,ija->ia", Yg.v, lg.dT) + Yg.d @ lg.T
    return Xg.v @ dval + np.einsum("abc,b,c->a", gam, lg.push(Xg.v), val)


@dataclass
class FormPackage:
    B: float
    B_star: float
    tau: float
    tau_star: float
    A_N_X: np.ndarray
    A_N_star_X: np.ndarray
    C_XPY: float
    C_star_XPY: float
    Abar_xi_X: np.ndarray
    Abar_xi_star_X: np.ndarray
    D_XY: tuple  # (screen part, eta part), parameter components
    D_star_XY: tuple
    tau_consistency: float = 0.0

    def to_dict(self):
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, tuple):
                out[k] = {"screen": np.asarray(v[0]).tolist(), "eta": float(v[1])}
            elif isinstance(v, np.ndarray):
                out[k] = v.tolist()
            else:
                out[k] = float(v)
        return out


def fundamental_forms_at(space, h, p, X, Y, lg=None) -> FormPackage:
    lg = lg or LocalGeometry(space, h, p)
    Xg, Yg = _germ(lg, X), _germ(lg, Y)
    parts = []
    for star in (False, True):
        DXY = lg.D(star, Xg, Yg)
        e = lg.eta(DXY)
        parts.append((lg.P(DXY), e))
    tau_gap = float(np.max(np.abs(np.concatenate([lg.tau + lg.epsx, lg.taus + lg.epsxs]))))
    return FormPackage(
        B=lg.form("B", Xg.v, Yg.v), B_star=lg.form("B*", Xg.v, Yg.v),
        tau=lg.tau_of(False, Xg.v), tau_star=lg.tau_of(True, Xg.v),
        A_N_X=lg.push(lg.A(False, Xg.v)), A_N_star_X=lg.push(lg.A(True, Xg.v)),
        C_XPY=lg.Cform(False, Xg.v, Yg.v), C_star_XPY=lg.Cform(True, Xg.v, Yg.v),
        Abar_xi_X=Xg.v @ lg.Abar, Abar_xi_star_X=Xg.v @ lg.Abars,
        D_XY=parts[0], D_star_XY=parts[1], tau_consistency=tau_gap)


def induced_connection_coeffs_at(space, h, p, conn="D", lg=None):
    lg = lg or LocalGeometry(space, h, p)
    return lg.Gams if conn in ("D*", "star") else lg.Gam


def screen_connection_at(space, h, p, conn="nabla", lg=None):
    """Screen connection coefficients ``nab[i, k, l]`` (W-basis) and ``C[i, k]``."""
    lg = lg or LocalGeometry(space, h, p)
    if conn in ("nabla*", "star"):
        return lg.nabs, lg.Cs
    return lg.nab, lg.C
