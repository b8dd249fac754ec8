"""Identity checks over sampled points, guards, and hypersurface classification.

Every check evaluates ``|lhs - rhs|`` (or a witness magnitude) per probe
tuple at each sample point.  A check whose hypothesis is not met by the
fixture (e.g. it needs a statistical ambient) is *skipped*, never run.
"""

from __future__ import annotations

import warnings
import zlib
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.stats import qmc

from .ambient import (_metric_defects, ambient_curvature_at, christoffel_lc_at, connection_pair_at,
                      constant_curvature_residual, default_probes, fit_constant_curvature,
                      validate_statistical)
from .curvature import (curvature_scalars_at, frame_germs, gauss_codazzi_sides,
                        ricci02_both)
from .curvature import probe_triples as _gc_triples
from .hypersurface import FrameError, _embedding_jets
from .induced import Germ, LocalGeometry

__all__ = [
    "IdentityCheck",
    "CheckResult",
    "SuiteConfig",
    "REGISTRY",
    "stream",
    "sample_points",
    "compute_guards",
    "run_identity_suite",
    "classify_hypersurface",
    "SuiteRun",
]

PASS, FAIL, REPORTED, SKIPPED = "pass", "fail", "reported-only", "skipped (guard)"


# -- configuration, sampling, random streams -------------------------------------


@dataclass
class SuiteConfig:
    tol1: float = 1e-9
    tol2: float = 1e-7
    tol3: float = 1e-5
    expect_tol: float = 1e-8
    n_random: int = 10
    seed: int = 0
    c: float | None = None  # constant curvature; fitted when None

    def tol(self, cls):
        return {"tol1": self.tol1, "tol2": self.tol2, "tol3": self.tol3,
                "expect": self.expect_tol}[cls]

    @classmethod
    def from_run(cls, run, **kw):
        t = run.get("tolerances", {})
        kw.setdefault("seed", int(run.get("seed", 0)))
        return cls(tol1=t.get("tol1", 1e-9), tol2=t.get("tol2", 1e-7), tol3=t.get("tol3", 1e-5), **kw)


def stream(seed, label, index=0):
    """Counter-based generator for the stream keyed by ``(label, index)``."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(label.encode()), int(index)])
    return np.random.Generator(np.random.Philox(ss))


def sample_points(domain, n=32, seed=0, extra=None):
    """``n`` unscrambled Sobol points plus ``extra`` (default ``n // 2``)
    seeded uniform points, scaled to ``domain``."""
    domain = np.asarray(domain, dtype=float)
    d = len(domain)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        base = qmc.Sobol(d, scramble=False).random(n) if n else np.zeros((0, d))
    extra = n // 2 if extra is None else extra
    rnd = stream(seed, "sampling").random((extra, d))
    unit = np.vstack([base, rnd])
    lo, hi = domain[:, 0], domain[:, 1]
    return [list(map(float, lo + u * (hi - lo))) for u in unit]


# -- probe tuples -----------------------------------------------------------------


def _random_germ(lg, rng):
    return Germ(rng.standard_normal(lg.k), rng.standard_normal((lg.k, lg.k)))


def probe_tuples(lg, rng, arity, n_random=10, screen=False):
    """All frame tuples over {E_1..E_m, xi} (screen: {E_i}) plus random ones.

    Random germs are projected to the screen when ``screen`` is set.
    """
    fr = frame_germs(lg)
    if screen:
        fr = {k: v for k, v in fr.items() if k != "xi"}
    names = list(fr)
    out = [(labs, tuple(fr[n] for n in labs)) for labs in product(names, repeat=arity)]
    for r in range(n_random):
        gs = []
        for _ in range(arity):
            g = _random_germ(lg, rng)
            gs.append(lg.P_germ(g) if screen else g)
        out.append((tuple(f"r{r}.{j}" for j in range(arity)), tuple(gs)))
    return out


def _mixed_tuples(lg, rng, n_random, screen_slots, arity):
    """Tuples where the slots in ``screen_slots`` carry screen fields."""
    fr = frame_germs(lg)
    scr = [k for k in fr if k != "xi"]
    pools = [scr if j in screen_slots else list(fr) for j in range(arity)]
    out = [(labs, tuple(fr[n] for n in labs)) for labs in product(*pools)]
    for r in range(n_random):
        gs = []
        for j in range(arity):
            g = _random_germ(lg, rng)
            gs.append(lg.P_germ(g) if j in screen_slots else g)
        out.append((tuple(f"r{r}.{j}" for j in range(arity)), tuple(gs)))
    return out


def _vmax(a):
    a = np.atleast_1d(np.asarray(a, dtype=float))
    return float(np.max(np.abs(a))) if a.size else 0.0


# -- building blocks on germs ----------------------------------------------------------


def _Xg(lg, X, Y, Z):
    """Directional derivative ``X g(Y, Z)`` of the induced metric."""
    return float(np.einsum("ijk,i,j,k->", lg.dgram, X.v, Y.v, Z.v)
                 + lg.g(X.v @ Y.d, Z.v) + lg.g(Y.v, X.v @ Z.d))


def _Dg(lg, star, X, Y, Z):
    """``(D_X g)(Y, Z)``."""
    return _Xg(lg, X, Y, Z) - lg.g(lg.D(star, X, Y), Z.v) - lg.g(Y.v, lg.D(star, X, Z))


# -- check registry ---------------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    id: str
    description: str
    anchor: str
    evaluator: object  # (ctx, lg, rng) -> list of (residual, labels)
    guards: tuple = ()
    tol_class: str = "tol2"
    reported: bool = False
    level: str = "induced"  # ambient | induced | curvature | value


REGISTRY: dict[str, IdentityCheck] = {}


def register(id, description, anchor, guards=(), tol="tol2", reported=False, level="induced"):
    def deco(fn):
        REGISTRY[id] = IdentityCheck(id, description, anchor, fn, tuple(guards), tol, reported, level)
        return fn
    return deco


# ambient ----------------------------------------------------------------------


def _amb_probes(lg, rng):
    pr = {"xi": lg.xi, "N": lg.N}
    for i in range(lg.m):
        pr[f"W{i + 1}"] = lg.W[i]
    for k, v in default_probes(len(lg.x), rng).items():
        pr[k] = v
    return pr


@register("amb.torsion", "ambient connection D~ is torsion free",
          "torsion T(X,Y) = D~_X Y - D~_Y X - [X,Y] vanishes", tol="tol1", level="ambient")
def _amb_torsion(ctx, lg, rng):
    pair = connection_pair_at(ctx.space, list(lg.x))
    out = []
    for name, gam in (("D~", pair.gamma), ("D~*", pair.gamma_star)):
        T = np.abs(gam - np.transpose(gam, (0, 2, 1)))
        idx = np.unravel_index(np.argmax(T), T.shape)
        out.append((float(T[idx]), (name,) + tuple(f"e{i}" for i in idx[1:])))
    return out


@register("amb.codazzi", "(D~_X g)(Y,Z) is symmetric in X and Y",
          "Codazzi condition of a statistical structure", tol="tol1", level="ambient")
def _amb_codazzi(ctx, lg, rng):
    _, _, Q, _ = _metric_defects(ctx.space, list(lg.x))
    pr = _amb_probes(lg, rng)
    labels = list(pr)
    V = np.array([pr[k] for k in labels])
    Qv = np.einsum("cab,ic,ja,kb->ijk", Q, V, V, V)
    r = np.abs(Qv - np.transpose(Qv, (1, 0, 2)))
    return [(float(r[i, j, k]), (labels[i], labels[j], labels[k]))
            for i, j, k in product(range(len(labels)), repeat=3)]


@register("amb.duality", "Z g(X,Y) = g(D~_Z X, Y) + g(X, D~*_Z Y) on the null frame",
          "duality of the ambient connection pair", tol="tol1", level="ambient")
def _amb_duality(ctx, lg, rng):
    _, _, _, U = _metric_defects(ctx.space, list(lg.x))
    pr = {"xi": lg.xi, "N": lg.N}
    for i in range(lg.m):
        pr[f"W{i + 1}"] = lg.W[i]
    return [(abs(float(np.einsum("cab,c,a,b->", U, Z, X, Y))), (z, x, y))
            for (z, Z), (x, X), (y, Y) in product(pr.items(), repeat=3)]


@register("amb.curvature-duality", "g(R~*(X,Y)Z,W) = -g(R~(X,Y)W,Z)",
          "curvature tensors of dual connections", guards=("statistical",), level="ambient")
def _amb_curv_duality(ctx, lg, rng):
    out = []
    V = list(default_probes(len(lg.x), rng, 4).items())
    for (a, X), (b, Y), (c, Z), (d, W) in product(V[-4:], repeat=4):
        r = lg.gt(lg.curv_ambient(True, X, Y, Z), W) + lg.gt(lg.curv_ambient(False, X, Y, W), Z)
        out.append((abs(r), (a, b, c, d)))
    return out


@register("amb.bianchi", "first Bianchi identity for R~ and R~*", "cyclic sum of R~ vanishes",
          guards=("torsion_free",), level="ambient")
def _amb_bianchi(ctx, lg, rng):
    out = []
    for star, R in ((False, lg.R_ambient), (True, lg.R_ambient_star)):
        S = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
        out.append((_vmax(S), ("R~*" if star else "R~",)))
    return out


@register("amb.constant-curvature", "R~(X,Y)Z - c(g(Y,Z)X - g(X,Z)Y) for the run's c",
          "constant curvature of the ambient", reported=True, level="ambient")
def _amb_cc(ctx, lg, rng):
    return [(constant_curvature_residual(ctx.space, list(lg.x), ctx.c, rng=rng), (f"c={ctx.c!r}",))]


# induced: metric and duality --------------------------------------------------


@register("ind.torsion", "induced connections D and D* are torsion free",
          "symmetry of the induced connection coefficients", guards=("torsion_free",))
def _ind_torsion(ctx, lg, rng):
    return [(_vmax(G - np.transpose(G, (0, 2, 1))), (n,))
            for n, G in (("D", lg.Gam), ("D*", lg.Gams))]


@register("ind.B-symmetry", "second fundamental forms B and B* are symmetric",
          "B(X,Y) = B(Y,X)", guards=("torsion_free",))
def _ind_bsym(ctx, lg, rng):
    return [(_vmax(M - M.T), (n,)) for n, M in (("B", lg.B), ("B*", lg.Bs))]


@register("ind.duality-defect", "Xg(Y,Z) - g(D_X Y,Z) - g(Y,D*_X Z) = B(X,Y)eta(Z) + B*(X,Z)eta(Y)",
          "induced connections fail duality by the second fundamental forms", guards=("statistical",))
def _ind_duality_defect(ctx, lg, rng):
    out = []
    for labs, (X, Y, Z) in probe_tuples(lg, rng, 3, ctx.cfg.n_random):
        lhs = _Xg(lg, X, Y, Z) - lg.g(lg.D(False, X, Y), Z.v) - lg.g(Y.v, lg.D(True, X, Z))
        rhs = lg.form("B", X.v, Y.v) * lg.eta(Z.v) + lg.form("B*", X.v, Z.v) * lg.eta(Y.v)
        out.append((abs(lhs - rhs), labs))
    return out


@register("ind.nondual-witness", "max |Xg(Y,Z) - g(D_X Y,Z) - g(Y,D*_X Z)| as evidence",
          "induced connections are not dual", reported=True)
def _ind_nondual(ctx, lg, rng):
    return [(abs(_Xg(lg, X, Y, Z) - lg.g(lg.D(False, X, Y), Z.v) - lg.g(Y.v, lg.D(True, X, Z))), labs)
            for labs, (X, Y, Z) in probe_tuples(lg, rng, 3, ctx.cfg.n_random)]


@register("ind.metric-sum", "(D_X g)(Y,Z) + (D*_X g)(Y,Z) = (B+B*)(X,Y)eta(Z) + (B+B*)(X,Z)eta(Y)",
          "sum of the non-metricities", guards=("statistical",))
def _ind_metric_sum(ctx, lg, rng):
    out = []
    for labs, (X, Y, Z) in probe_tuples(lg, rng, 3, ctx.cfg.n_random):
        lhs = _Dg(lg, False, X, Y, Z) + _Dg(lg, True, X, Y, Z)
        s = lambda a, b: lg.form("B", a, b) + lg.form("B*", a, b)
        rhs = s(X.v, Y.v) * lg.eta(Z.v) + s(X.v, Z.v) * lg.eta(Y.v)
        out.append((abs(lhs - rhs), labs))
    return out


@register("ind.nondegenerate-witness", "max |B(X,xi)| and |B*(X,xi)| as evidence",
          "B and B* need not vanish on the radical", reported=True)
def _ind_witness(ctx, lg, rng):
    out = []
    for labs, (X,) in probe_tuples(lg, rng, 1, ctx.cfg.n_random):
        out.append((abs(lg.form("B", X.v, lg.xi_p)), ("B",) + labs))
        out.append((abs(lg.form("B*", X.v, lg.xi_p)), ("B*",) + labs))
    return out


@register("ind.xi-forms-cancel", "B(X,xi) + B*(X,xi) = 0", "radical values of the forms cancel",
          guards=("statistical",))
def _ind_34a(ctx, lg, rng):
    return [(abs(lg.form("B", X.v, lg.xi_p) + lg.form("B*", X.v, lg.xi_p)), labs)
            for labs, (X,) in probe_tuples(lg, rng, 1, ctx.cfg.n_random)]


@register("ind.shape-eta-cancel", "eta(A_N X + A*_N X) = 0", "transversal parts of the shape operators cancel",
          guards=("statistical",))
def _ind_34b(ctx, lg, rng):
    return [(abs(lg.eta(lg.A(False, X.v) + lg.A(True, X.v))), labs)
            for labs, (X,) in probe_tuples(lg, rng, 1, ctx.cfg.n_random)]


@register("ind.screen-form-shape", "C(X,PY) = g(A_N X,PY) and C*(X,PY) = g(A*_N X,PY)",
          "screen forms equal the shape operator pairings", guards=("statistical",))
def _ind_18(ctx, lg, rng):
    out = []
    for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random):
        PY = lg.P(Y.v)
        for star, tag in ((False, "C"), (True, "C*")):
            out.append((abs(lg.Cform(star, X.v, Y.v) - lg.g(lg.A(star, X.v), PY)), (tag,) + labs))
    return out


def _radical_B(ctx, lg, rng, star, literal):
    out = []
    other = "B" if star else "B*"
    for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random):
        lhs = lg.form("B*" if star else "B", X.v, Y.v)
        g_term = lg.g(lg.Abar_xi(not star, X.v), Y.v)
        bx = lg.form(other, X.v, lg.xi_p)
        rhs = g_term + bx if literal else g_term - bx * lg.eta(Y.v)
        out.append((abs(lhs - rhs), labs))
    return out


@register("ind.radical-shape-B-literal", "B(X,Y) = g(Abar*_xi X,Y) + B*(X,xi), as printed",
          "B through the dual radical shape operator", reported=True)
def _ind_07l(ctx, lg, rng):
    return _radical_B(ctx, lg, rng, False, True)


@register("ind.radical-shape-B", "B(X,Y) = g(Abar*_xi X,Y) - B*(X,xi) eta(Y)",
          "B through the dual radical shape operator", guards=("statistical",))
def _ind_07d(ctx, lg, rng):
    return _radical_B(ctx, lg, rng, False, False)


@register("ind.radical-shape-B*-literal", "B*(X,Y) = g(Abar_xi X,Y) + B(X,xi), as printed",
          "B* through the radical shape operator", reported=True)
def _ind_08l(ctx, lg, rng):
    return _radical_B(ctx, lg, rng, True, True)


@register("ind.radical-shape-B*", "B*(X,Y) = g(Abar_xi X,Y) - B(X,xi) eta(Y)",
          "B* through the radical shape operator", guards=("statistical",))
def _ind_08d(ctx, lg, rng):
    return _radical_B(ctx, lg, rng, True, False)


@register("ind.radical-shape-xi", "Abar*_xi xi + Abar_xi xi = 0",
          "radical shape operators cancel on xi", guards=("statistical",))
def _ind_abar_xi(ctx, lg, rng):
    return [(_vmax(lg.Abar_xi(True, lg.xi_p) + lg.Abar_xi(False, lg.xi_p)), ("xi",))]


@register("ind.eps-tau", "eta(D_X xi) = -tau(X) and eta(D*_X xi) = -tau*(X)",
          "xi-coefficient of D xi against the transversal 1-form", guards=("statistical",))
def _ind_eps_tau(ctx, lg, rng):
    out = []
    for labs, (X,) in probe_tuples(lg, rng, 1, ctx.cfg.n_random):
        out.append((abs(X.v @ (lg.epsx + lg.tau)), ("D",) + labs))
        out.append((abs(X.v @ (lg.epsxs + lg.taus)), ("D*",) + labs))
    return out


# screen ---------------------------------------------------------------------------


@register("ind.screen-duality", "Xg(Y,Z) = g(nabla_X Y,Z) + g(Y,nabla*_X Z) for screen Y, Z",
          "screen connections are dual", guards=("statistical",))
def _ind_pr7_dual(ctx, lg, rng):
    out = []
    for labs, (X, Y, Z) in _mixed_tuples(lg, rng, ctx.cfg.n_random, (1, 2), 3):
        xg = _Xg(lg, X, Y, Z)
        for s, tag in ((False, "nabla,nabla*"), (True, "nabla*,nabla")):
            r = xg - lg.g(lg.nabla(s, X, Y)[0], Z.v) - lg.g(Y.v, lg.nabla(not s, X, Z)[0])
            out.append((abs(r), (tag,) + labs))
    return out


@register("ind.screen-torsion", "nabla_X Y - nabla_Y X - [X,Y] = 0 for screen X, Y",
          "screen connections are torsion free", guards=("statistical",))
def _ind_pr7_torsion(ctx, lg, rng):
    out = []
    for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random, screen=True):
        br = lg.bracket(X, Y)
        for s, tag in ((False, "nabla"), (True, "nabla*")):
            r = lg.nabla(s, X, Y)[0] - lg.nabla(s, Y, X)[0] - br
            out.append((_vmax(r), (tag,) + labs))
    return out


@register("ind.screen-transversal", "eta(D_X Y) = C(X,Y) = g(A_N X,Y) for screen X, Y (and starred)",
          "screen parallelism through C", guards=("statistical",))
def _ind_pr88(ctx, lg, rng):
    out = []
    for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random, screen=True):
        for s, tag in ((False, "D"), (True, "D*")):
            c = lg.Cform(s, X.v, Y.v)
            r = max(abs(lg.eta(lg.D(s, X, Y)) - c), abs(c - lg.g(lg.A(s, X.v), Y.v)))
            out.append((r, (tag,) + labs))
    return out


@register("ind.screen-bracket", "eta([X,Y]) = C(X,Y) - C(Y,X) = C*(X,Y) - C*(Y,X) for screen X, Y",
          "screen integrability through C", guards=("torsion_free",))
def _ind_pr8(ctx, lg, rng):
    out = []
    for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random, screen=True):
        e = lg.eta(lg.bracket(X, Y))
        for s, tag in ((False, "C"), (True, "C*")):
            r = e - (lg.Cform(s, X.v, Y.v) - lg.Cform(s, Y.v, X.v))
            out.append((abs(r), (tag,) + labs))
    return out


@register("ind.levi-civita", "K = 0: B = B*, (D_X g)(Y,Z) = B(X,Y)eta(Z) + B(X,Z)eta(Y), B(X,xi) = 0, Abar_xi xi = 0",
          "self-dual case recovers the classical lightlike theory", guards=("levi_civita",))
def _ind_lc(ctx, lg, rng):
    out = [(_vmax(lg.B - lg.Bs), ("B-B*",)),
           (_vmax(lg.Abar_xi(False, lg.xi_p)), ("Abar_xi xi",))]
    for labs, (X, Y, Z) in probe_tuples(lg, rng, 3, ctx.cfg.n_random):
        r = _Dg(lg, False, X, Y, Z) - (lg.form("B", X.v, Y.v) * lg.eta(Z.v)
                                        + lg.form("B", X.v, Z.v) * lg.eta(Y.v))
        out.append((abs(r), ("Dg",) + labs))
        out.append((abs(lg.form("B", X.v, lg.xi_p)), ("B(X,xi)",) + labs[:1]))
    return out


@register("ind.normal-umbilic", "C(X,PY) + C*(X,PY) = 0 when normally umbilic for both",
          "normal umbilicity forces the screen forms to cancel",
          guards=("statistical", "normal_umbilic"))
def _ind_numb(ctx, lg, rng):
    return [(abs(lg.Cform(False, X.v, Y.v) + lg.Cform(True, X.v, Y.v)), labs)
            for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random)]


@register("ind.totally-geodesic-evidence", "max |B| and |B*| on probe pairs",
          "totally geodesic evidence", reported=True)
def _ind_tg(ctx, lg, rng):
    out = []
    for labs, (X, Y) in probe_tuples(lg, rng, 2, ctx.cfg.n_random):
        out.append((abs(lg.form("B", X.v, Y.v)), ("B",) + labs))
        out.append((abs(lg.form("B*", X.v, Y.v)), ("B*",) + labs))
    return out


# curvature ---------------------------------------------------------------------


@register("cur.antisymmetry", "R(X,Y)Z + R(Y,X)Z = 0 for D and D*", "antisymmetry of the induced curvature",
          tol="tol3", level="curvature")
def _cur_anti(ctx, lg, rng):
    out = []
    for labs, (X, Y, Z) in probe_tuples(lg, rng, 3, ctx.cfg.n_random):
        for s in (False, True):
            out.append((_vmax(lg.curv(s, X.v, Y.v, Z.v) + lg.curv(s, Y.v, X.v, Z.v)),
                        ("R*" if s else "R",) + labs))
    return out


@register("cur.bianchi", "first Bianchi identity for R and R*", "cyclic sum of the induced curvature",
          guards=("torsion_free",), tol="tol3", level="curvature")
def _cur_bianchi(ctx, lg, rng):
    return [(_vmax(R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))), (n,))
            for n, R in (("R", lg.R), ("R*", lg.R_star))]


_GC = {
    "gauss-screen": ("g~(R~(X,Y)Z,PW) = g(R(X,Y)Z,PW) - B(Y,Z)C*(X,PW) + B(X,Z)C*(Y,PW)", ("statistical",), False),
    "gauss-screen*": ("g~(R~*(X,Y)Z,PW) = g(R*(X,Y)Z,PW) - B*(Y,Z)C(X,PW) + B*(X,Z)C(Y,PW)", ("statistical",), False),
    "codazzi": ("g~(R~(X,Y)Z,xi) = B(Y,Z)tau*(X) - B(X,Z)tau*(Y) + (D_X B)(Y,Z) - (D_Y B)(X,Z)", ("torsion_free",), False),
    "codazzi*": ("g~(R~*(X,Y)Z,xi) = B*(Y,Z)tau(X) - B*(X,Z)tau(Y) + (D*_X B*)(Y,Z) - (D*_Y B*)(X,Z)", ("torsion_free",), False),
    "transversal": ("g~(R~(X,Y)Z,N) = g(R(X,Y)Z,N) - B(Y,Z)eta(A*_N X) + B(X,Z)eta(A*_N Y)", ("torsion_free",), False),
    "transversal*": ("g~(R~*(X,Y)Z,N) = g(R*(X,Y)Z,N) - B*(Y,Z)eta(A_N X) + B*(X,Z)eta(A_N Y)", ("torsion_free",), False),
    "transversal-radical": ("g~(R~(X,Y)xi,N) through R, B(.,xi) and A*_N", ("torsion_free",), False),
    "transversal-radical*": ("g~(R~*(X,Y)xi,N) through R*, B*(.,xi) and A_N", ("torsion_free",), False),
    "radical-pairing": ("g(R(X,Y)xi,N) = C(Y,Abar_xi X) - C(X,Abar_xi Y) - 2 dtau(X,Y)", ("statistical",), False),
    "radical-pairing*": ("g(R*(X,Y)xi,N) = C*(Y,Abar*_xi X) - C*(X,Abar*_xi Y) - 2 dtau*(X,Y)", ("statistical",), False),
    "radical-pairing*-literal": ("g(R*(X,Y)xi,N) = C*(Y,Abar*_xi X) - C*(X,Abar*_xi Y) - 2 dtau(X,Y), as printed", (), True),
}


def _gc_eval(key):
    def ev(ctx, lg, rng):
        return [(abs(sides[key][0] - sides[key][1]), labs) for labs, sides in ctx.gauss_codazzi(lg)]
    return ev


for _key, (_desc, _guards, _rep) in _GC.items():
    REGISTRY[f"cur.{_key}"] = IdentityCheck(f"cur.{_key}", _desc, "Gauss-Codazzi component equations",
                                            _gc_eval(_key), _guards, "tol3", _rep, "curvature")


def _pairs(lg, rng, n):
    return probe_tuples(lg, rng, 2, n)


@register("cur.ricci-paths", "Ricci-type tensor: direct trace equals the ambient-Ricci expansion as printed",
          "two evaluations of the Ricci-type tensor", guards=("levi_civita", "flat"), tol="tol3",
          level="curvature")
def _cur_ric(ctx, lg, rng):
    out = []
    for labs, (X, Y) in _pairs(lg, rng, ctx.cfg.n_random):
        for s in (False, True):
            p, sec, _ = ricci02_both(lg, s, X.v, Y.v)
            out.append((abs(p - sec), ("D*" if s else "D",) + labs))
    return out


@register("cur.ricci-paths-literal", "the printed ambient-Ricci expansion on any ambient",
          "two evaluations of the Ricci-type tensor", reported=True, level="curvature")
def _cur_ric_lit(ctx, lg, rng):
    return _cur_ric(ctx, lg, rng)


@register("cur.ricci-derived", "Ricci-type tensor: direct trace equals the screen-trace expansion",
          "two evaluations of the Ricci-type tensor", guards=("statistical",), tol="tol3",
          level="curvature")
def _cur_ric_der(ctx, lg, rng):
    out = []
    for labs, (X, Y) in _pairs(lg, rng, ctx.cfg.n_random):
        for s in (False, True):
            p, _, der = ricci02_both(lg, s, X.v, Y.v)
            out.append((abs(p - der), ("D*" if s else "D",) + labs))
    return out


def _asym(lg, star, X, Y):
    return ricci02_both(lg, star, X, Y)[0] - ricci02_both(lg, star, Y, X)[0]


def _asym_general(lg, X, Y, corrected):
    """Asymmetry predicted from the Bianchi identity and the screen Gauss equation."""
    E, eps = lg.E_p, lg.eps
    Xa, Ya = lg.push(X), lg.push(Y)
    s = 0.0
    for i in range(lg.m):
        s += eps[i] * (lg.form("B", E[i], Y) * lg.Cform(True, X, E[i])
                       - lg.form("B", E[i], X) * lg.Cform(True, Y, E[i])
                       + lg.gt(lg.curv_ambient(False, Xa, Ya, lg.E[i]), lg.E[i]))
    s += lg.gt(lg.curv_ambient(False, Xa, Ya, lg.xi), lg.N)
    if corrected:
        eA = lambda a: lg.eta(lg.A(True, a))
        s += lg.form("B", Y, lg.xi_p) * eA(X) - lg.form("B", X, lg.xi_p) * eA(Y)
    return s


@register("cur.ricci-asymmetry", "asymmetry of the Ricci-type tensor from Bianchi and the Gauss equations",
          "the Ricci-type tensor is not symmetric", guards=("statistical",), tol="tol3", level="curvature")
def _cur_ricf(ctx, lg, rng):
    return [(abs(_asym(lg, False, X.v, Y.v) - _asym_general(lg, X.v, Y.v, True)), labs)
            for labs, (X, Y) in _pairs(lg, rng, ctx.cfg.n_random)]


@register("cur.ricci-asymmetry-literal", "asymmetry formula as printed (ambient xi-N term without B(.,xi) corrections)",
          "the Ricci-type tensor is not symmetric", reported=True, level="curvature")
def _cur_ricf_lit(ctx, lg, rng):
    return [(abs(_asym(lg, False, X.v, Y.v) - _asym_general(lg, X.v, Y.v, False)), labs)
            for labs, (X, Y) in _pairs(lg, rng, ctx.cfg.n_random)]


@register("cur.ricci-asymmetry-const", "constant curvature: asymmetry = C*(X,Abar*_xi Y) - C*(Y,Abar*_xi X), and dually",
          "symmetry criterion for the Ricci-type tensors", guards=("statistical", "constant_curvature"),
          tol="tol3", level="curvature")
def _cur_rics(ctx, lg, rng):
    out = []
    for labs, (X, Y) in _pairs(lg, rng, ctx.cfg.n_random):
        x, y = X.v, Y.v
        for s in (False, True):
            # D pairs with C* and Abar*; D* with C and Abar
            pred = (lg.Cform(not s, x, lg.Abar_xi(not s, y)) - lg.Cform(not s, y, lg.Abar_xi(not s, x)))
            out.append((abs(_asym(lg, s, x, y) - pred), ("D*" if s else "D",) + labs))
    return out


@register("cur.ricci-symmetric-parallel", "parallel screen on constant curvature: Ricci-type tensors symmetric",
          "symmetry of the Ricci-type tensors for a parallel screen",
          guards=("statistical", "constant_curvature", "screen_parallel"), tol="tol1", level="curvature")
def _cur_cor(ctx, lg, rng):
    return [(abs(_asym(lg, s, X.v, Y.v)), ("D*" if s else "D",) + labs)
            for labs, (X, Y) in _pairs(lg, rng, ctx.cfg.n_random) for s in (False, True)]


@register("cur.screen-gauss-const", "constant curvature: g(R(X,Y)Z,PW) = c(g(Y,Z)g(X,PW) - g(X,Z)g(Y,PW)) + B(Y,Z)C*(X,PW) - B(X,Z)C*(Y,PW)",
          "screen Gauss equation on a space of constant curvature", guards=("statistical", "constant_curvature"),
          tol="tol3", level="curvature")
def _cur_osu(ctx, lg, rng):
    c = ctx.c
    out = []
    for labs, (X, Y, Z, W) in probe_tuples(lg, rng, 4, ctx.cfg.n_random):
        x, y, z = X.v, Y.v, Z.v
        PW = lg.P(W.v)
        lhs = lg.g(lg.curv(False, x, y, z), PW)
        rhs = (c * (lg.g(y, z) * lg.g(x, PW) - lg.g(x, z) * lg.g(y, PW))
               + lg.form("B", y, z) * lg.Cform(True, x, PW) - lg.form("B", x, z) * lg.Cform(True, y, PW))
        out.append((abs(lhs - rhs), labs))
    return out


def _scalar_eval(key, per_i=False):
    def ev(ctx, lg, rng):
        a, b = ctx.scalars(lg)["checks"][key]
        if per_i:
            a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
            return [(abs(float(x - y)), (f"i={i + 1}",)) for i, (x, y) in enumerate(zip(a.ravel(), b.ravel()))]
        return [(abs(float(a) - float(b)), (key,))]
    return ev


_SCALARS = {
    "radical-ricci-summed": ("Ricci-type tensor at (xi,xi) equals the summed null sectional curvatures", (), False, False),
    "radical-ricci-per-i": ("Ricci-type tensor at (xi,xi) against each single null sectional curvature", (), True, True),
    "screen-scalar-weighted": ("screen scalar curvature = cm(1-m) + sum eps_i eps_j (B_ji C*_ij - B_ii C*_jj)", ("statistical", "constant_curvature"), False, False),
    "screen-scalar-literal": ("screen scalar curvature = cm(1-m) + sum (B_ji C*_ij - B_ii C*_jj), as printed", ("constant_curvature",), True, False),
    "null-sectional-weighted": ("sum of null sectional curvatures = sum eps_i (B(E_i,xi)C*(xi,E_i) - B(xi,xi)C*(E_i,E_i))", ("statistical", "constant_curvature"), False, False),
    "null-sectional-literal": ("sum of null sectional curvatures without the eps_i weights, as printed", ("constant_curvature",), True, False),
    "mixed-sectional-derived": ("sum kappa_iN = -c sum eps_i + sum B(xi,E_i)eta(A*_N E_i) - sum B(E_i,E_i)eta(A*_N xi)", ("statistical", "constant_curvature"), False, False),
    "mixed-sectional-summed": ("sum kappa_iN = -cm - sum B(xi,E_i)eta(A*_N E_i) - sum B(E_i,E_i)eta(A*_N xi), as printed", ("constant_curvature",), True, False),
    "mixed-sectional-literal": ("kappa_iN per i with the unsummed last term, as printed", ("constant_curvature",), True, True),
}

for _key, (_desc, _guards, _rep, _per) in _SCALARS.items():
    REGISTRY[f"cur.{_key}"] = IdentityCheck(f"cur.{_key}", _desc, "scalar curvature decompositions",
                                            _scalar_eval(_key, _per), _guards, "tol3", _rep, "curvature")


# -- values pinned by the manifest -------------------------------------------------------


def _expectation_checks(expectations, params):
    from .expr import Compiled, parse

    checks = []
    for ex in expectations:
        vals = ex["value"] if isinstance(ex["value"], list) else [ex["value"]]
        fns = [Compiled(parse(v, params), params) for v in vals]
        if ex["form"] == "N":
            cid = "value.N"
            desc = "N equals its closed form componentwise"

            def ev(ctx, lg, rng, fns=fns):
                want = np.array([float(f(*lg.p)) for f in fns])
                return [(_vmax(lg.N - want), ("N",))]
        else:
            form, X, Y = ex["form"], ex["X"], ex["Y"]
            cid = f"value.{form}({X},{Y})"
            desc = f"{form}({X},{Y}) = {vals[0]}"

            def ev(ctx, lg, rng, fns=fns, form=form, X=X, Y=Y):
                x, y = lg.field(X).v, lg.field(Y).v
                if form in ("B", "B*"):
                    got = lg.form(form, x, y)
                else:
                    got = lg.Cform(form == "C*", x, y)
                return [(abs(got - float(fns[0](*lg.p))), (X, Y))]
        checks.append(IdentityCheck(cid, desc, "closed-form value", ev, (), "expect",
                                    False, "value"))
    return checks


# -- guards -------------------------------------------------------------------------------


@dataclass
class GuardReport:
    flags: dict
    evidence: dict
    c: float
    c_source: str

    def to_dict(self):
        return {"flags": dict(self.flags), "evidence": dict(self.evidence), "c": self.c,
                "c_source": self.c_source}


def compute_guards(space, h, points, cfg: SuiteConfig, lgs=None):
    """Hypotheses gating the checks, from the ambient (and frame) at the points."""
    if lgs:
        xs = [list(map(float, lg.x)) for lg in lgs]
    else:
        xs = [[float(v) for v in _embedding_jets(h, list(p))[0]] for p in points]
    rep = validate_statistical(space, xs, tol=cfg.tol1, rng=stream(cfg.seed, "guard.statistical"))
    ev = {"torsion": rep.torsion_residual, "codazzi": rep.codazzi_residual,
          "duality": rep.duality_residual}
    lc = 0.0
    flat = 0.0
    for x in xs:
        pair = connection_pair_at(space, x)
        g0 = christoffel_lc_at(space, x)
        lc = max(lc, _vmax(pair.gamma - g0), _vmax(pair.gamma_star - g0))
    for x in xs:
        flat = max(flat, _vmax(ambient_curvature_at(space, x, "D")),
                   _vmax(ambient_curvature_at(space, x, "D*")))
    ev["levi_civita"] = lc
    ev["curvature"] = flat
    if cfg.c is not None:
        c, src = float(cfg.c), "manifest"
    elif space.constant_c is not None:
        c, src = float(space.constant_c), "manifest"
    else:
        c, _ = fit_constant_curvature(space, xs, rng=stream(cfg.seed, "guard.fit-c"))
        src = "fitted"
    rng = stream(cfg.seed, "guard.constant-curvature")
    ccres = max(constant_curvature_residual(space, x, c, rng=rng) for x in xs)
    ev["constant_curvature"] = ccres
    flags = {
        "torsion_free": rep.torsion_residual < cfg.tol1,
        "statistical": rep.passed,
        "levi_civita": lc < cfg.tol1,
        "flat": flat < cfg.tol2,
        "constant_curvature": ccres < cfg.tol2,
    }
    if lgs:
        nu = max(_normal_umbilic_residual(lg)[1] for lg in lgs)
        sp = max(max(_vmax(lg.W_p @ lg.C), _vmax(lg.W_p @ lg.Cs)) if lg.m else 0.0 for lg in lgs)
        ev["normal_umbilic"] = nu
        ev["screen_parallel"] = sp
        flags["normal_umbilic"] = nu < cfg.tol2
        flags["screen_parallel"] = sp < cfg.tol1
    return GuardReport(flags, ev, c, src)


# -- results --------------------------------------------------------------------------------


@dataclass
class CheckResult:
    id: str
    description: str
    anchor: str
    points: int
    max_residual: float
    argmax: dict
    tolerance: float
    verdict: str
    guards: list = field(default_factory=list)
    failed_guards: list = field(default_factory=list)
    level: str = "induced"

    def to_dict(self):
        return {"id": self.id, "description": self.description, "anchor": self.anchor,
                "level": self.level, "points": self.points, "max_residual": self.max_residual,
                "argmax": self.argmax, "tolerance": self.tolerance, "verdict": self.verdict,
                "guards": list(self.guards), "failed_guards": list(self.failed_guards)}


class _Ctx:
    def __init__(self, space, h, cfg, c):
        self.space, self.h, self.cfg, self.c = space, h, cfg, c
        self._scal = {}
        self._gc = {}
        self.index = {}

    def gauss_codazzi(self, lg):
        """Both sides of every Gauss-Codazzi equation on one shared probe set per point."""
        key = id(lg)
        if key not in self._gc:
            rng = stream(self.cfg.seed, "cur.gauss-codazzi", self.index.get(key, 0))
            self._gc[key] = [(labs, gauss_codazzi_sides(lg, *fields))
                             for labs, fields in _gc_triples(lg, rng, self.cfg.n_random)]
        return self._gc[key]

    def scalars(self, lg):
        key = id(lg)
        if key not in self._scal:
            self._scal[key] = curvature_scalars_at(None, None, None, self.c, lg)
        return self._scal[key]


@dataclass
class SuiteRun:
    results: list
    guards: GuardReport
    points: list
    frame_errors: list

    @property
    def failed(self):
        return [r for r in self.results if r.verdict == FAIL]

    def by_id(self):
        return {r.id: r for r in self.results}

    def to_dict(self):
        return {"points": self.points, "guards": self.guards.to_dict(),
                "frame_errors": self.frame_errors,
                "results": [r.to_dict() for r in self.results]}


def _evaluate(check, ctx, lgs, cfg):
    best, arg = -1.0, {}
    for idx, lg in enumerate(lgs):
        if lg is None:
            continue
        rng = stream(cfg.seed, check.id, idx)
        for val, labs in check.evaluator(ctx, lg, rng):
            val = float(val)
            if not np.isfinite(val):
                val = float("inf")
            if val > best:
                best, arg = val, {"index": idx, "point": list(lg.p), "probe": list(labs)}
    return max(best, 0.0), arg


def run_identity_suite(space, h, points, cfg: SuiteConfig | None = None, expectations=(),
                       select=None, levels=None, lgs=None) -> SuiteRun:
    """Evaluate every registered check (and manifest value checks) at ``points``.

    ``select`` restricts to an iterable of check ids; ``levels`` to a set of
    levels ("ambient", "induced", "curvature", "value").
    """
    cfg = cfg or SuiteConfig()
    frame_errors = []
    if lgs is None:
        lgs = []
        for idx, p in enumerate(points):
            try:
                lgs.append(LocalGeometry(space, h, p))
            except (FrameError, ArithmeticError, ValueError) as exc:
                lgs.append(None)
                frame_errors.append({"index": idx, "point": list(map(float, p)),
                                     "error": f"{type(exc).__name__}: {exc}"})
    good = [lg for lg in lgs if lg is not None]
    guards = compute_guards(space, h, points, cfg, good or None)
    ctx = _Ctx(space, h, cfg, guards.c)
    ctx.index = {id(lg): i for i, lg in enumerate(lgs) if lg is not None}
    checks = list(REGISTRY.values()) + _expectation_checks(expectations, h.params)
    if select is not None:
        select = set(select)
        checks = [c for c in checks if c.id in select]
    if levels is not None:
        checks = [c for c in checks if c.level in set(levels)]
    results = []
    for chk in sorted(checks, key=lambda c: c.id):
        tol = cfg.tol(chk.tol_class)
        missing = [g for g in chk.guards if not guards.flags.get(g, False)]
        if missing:
            results.append(CheckResult(chk.id, chk.description, chk.anchor, 0, 0.0, {}, tol,
                                       SKIPPED, list(chk.guards), missing, chk.level))
            continue
        res, arg = _evaluate(chk, ctx, lgs, cfg)
        verdict = REPORTED if chk.reported else (PASS if res < tol else FAIL)
        results.append(CheckResult(chk.id, chk.description, chk.anchor, len(good), res, arg, tol,
                                   verdict, list(chk.guards), [], chk.level))
    if frame_errors:
        results.append(CheckResult("frame.construct", "null frame constructible at every sample point",
                                   "frame invariants", len(points), float(len(frame_errors)),
                                   frame_errors[0], 0.5, FAIL, [], [], "frame"))
        results.sort(key=lambda r: r.id)
    return SuiteRun(results, guards, [list(map(float, p)) for p in points], frame_errors)


# -- classification ----------------------------------------------------------------------


def _fit_scalar(M, ref):
    """Least-squares ``k`` in ``M ~ k ref``; ``None`` when ill-posed."""
    den = float(np.sum(ref * ref))
    if den < 1e-12:
        return None, _vmax(M)
    k = float(np.sum(M * ref)) / den
    return k, _vmax(M - k * ref)


def _normal_umbilic_residual(lg):
    I = np.eye(lg.k)
    k1, r1 = _fit_scalar(lg.ANs, I)  # A*_N: D~
    k2, r2 = _fit_scalar(lg.AN, I)   # A_N: D~*
    return (k1, k2), max(r1, r2)


def _property(fits, residuals, tol, extra_ok=None):
    res = max(residuals) if residuals else 0.0
    if any(f is None for f in fits):
        verdict = "vacuous"
    elif res < tol and (extra_ok is None or extra_ok):
        verdict = "yes"
    else:
        verdict = "no"
    return {"verdict": verdict, "max_residual": res, "tolerance": tol, "fit": fits}


def classify_hypersurface(space, h, points, cfg: SuiteConfig | None = None, lgs=None):
    """Totally geodesic, umbilicity, screen parallel/integrable/conformal."""
    cfg = cfg or SuiteConfig()
    tol = cfg.tol2
    if lgs is None:
        lgs = [LocalGeometry(space, h, p) for p in points]
    lgs = [lg for lg in lgs if lg is not None]
    acc = {}

    def add(name, fit, res):
        fits, ress = acc.setdefault(name, ([], []))
        fits.append(fit)
        ress.append(res)

    for lg in lgs:
        add("totally_geodesic_D", 0.0, _vmax(lg.B))
        add("totally_geodesic_D*", 0.0, _vmax(lg.Bs))
        add("tangentially_umbilic_D", *_fit_scalar(lg.B, lg.gram))
        add("tangentially_umbilic_D*", *_fit_scalar(lg.Bs, lg.gram))
        I = np.eye(lg.k)
        add("normally_umbilic_D", *_fit_scalar(lg.ANs, I))
        add("normally_umbilic_D*", *_fit_scalar(lg.AN, I))
        Ab = lg.Abar @ lg.W_p if lg.m else np.zeros((lg.k, lg.k))
        Abs = lg.Abars @ lg.W_p if lg.m else np.zeros((lg.k, lg.k))
        add("umbilic_sum", *_fit_scalar(Ab + Abs, I))
        if lg.m:
            Cw = lg.W_p @ (lg.C + lg.Cs)
            Bw = lg.W_p @ (lg.B + lg.Bs) @ lg.W_p.T
            add("screen_conformal", *_fit_scalar(Cw, Bw))
            add("screen_conformal_operators_A_N", *_fit_scalar(lg.AN, Abs))
            add("screen_conformal_operators_A*_N", *_fit_scalar(lg.ANs, Ab))
            add("screen_parallel", 0.0, max(_vmax(lg.W_p @ lg.C), _vmax(lg.W_p @ lg.Cs)))
            Cc = lg.W_p @ lg.C
            add("screen_integrable", 0.0, _vmax(Cc - Cc.T))
        # radical distribution parallel along D~ (resp. D~*): D~_X xi has no screen or N part
        add("radical_parallel_D", 0.0, max(_vmax(lg.Abar), _vmax(lg.Bxi)))
        add("radical_parallel_D*", 0.0, max(_vmax(lg.Abars), _vmax(lg.Bxis)))
        add("radical_shape_vanishes_D", 0.0, _vmax(lg.Abars))
        add("radical_shape_vanishes_D*", 0.0, _vmax(lg.Abar))
    out = {}
    for name, (fits, ress) in acc.items():
        extra = None
        if name.startswith("screen_conformal") and all(f is not None for f in fits):
            extra = all(abs(f) > tol for f in fits)
        out[name] = _property(fits, ress, tol, extra)
    return out
