"""Acceptance criteria, one test each, at the stated tolerances."""

import json
import math
import time

import numpy as np

from nullstat.ambient import duality_defect, validate_statistical
from nullstat.cli import main
from nullstat.curvature import (GC_IDS, curvature_scalars_at, gauss_codazzi_residuals,
                                probe_triples, ricci02_at, ricci02_both)
from nullstat.harness import (FAIL, PASS, SuiteConfig, classify_hypersurface, run_identity_suite,
                              sample_points)
from nullstat.induced import LocalGeometry, fundamental_forms_at
from nullstat.manifest import manifest_from_dict

import oracles

S2 = math.sqrt(2)


def load(name, **run):
    return manifest_from_dict({"fixture": name, "run": run} if run else {"fixture": name})


def test_criterion_1_example_values(criterion):
    t0 = time.perf_counter()
    m = load("paper-cone")
    worst = 0.0
    for u2, u3 in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)]:
        p = [0.0, u2, u3]
        lg = LocalGeometry(m.space, m.hypersurface, p)
        f2 = u2 * u2 + u3 * u3
        f = math.sqrt(f2)

        def ff(X, Y):
            return fundamental_forms_at(None, None, None, X, Y, lg=lg)

        ww, xx = ff("W2", "W2"), ff("xi", "xi")
        errs = [ww.B + 2 * S2 * u2 ** 2, ww.B_star + 2 * S2 * u3 ** 2,
                xx.B + S2, xx.B_star - S2,
                ww.C_XPY + (S2 / 2) * u2 ** 2 / f2, ww.C_star_XPY + (S2 / 2) * u3 ** 2 / f2,
                ff("xi", "W2").C_XPY]
        errs += [ff(X, "W1").B for X in ("xi", "W1", "W2")]
        N = (np.array([-f, f, 0, 0]) + S2 * np.array([0, 0, u2, u3])) / (4 * f2)
        errs += list(lg.N - N)
        worst = max(worst, max(abs(e) for e in errs))
    dt = time.perf_counter() - t0
    criterion(1, "worked-example reproduction", worst < 1e-8 and dt < 5,
              f"max error {worst:.3g} (tol 1e-8), {dt:.2f} s (limit 5 s)")


def test_criterion_2_trivial_fixture(criterion):
    m = load("flat-plane-P0", points=16)
    pts = sample_points(m.hypersurface.domain, 16, 0)
    mag = 0.0
    for p in pts:
        lg = LocalGeometry(m.space, m.hypersurface, p)
        for arr in (lg.B, lg.Bs, lg.C, lg.Cs, lg.AN, lg.ANs, lg.tau, lg.taus, lg.R, lg.R_star):
            mag = max(mag, float(np.abs(arr).max()))
    run = run_identity_suite(m.space, m.hypersurface, pts, SuiteConfig.from_run(m.run), m.expectations)
    bad = [r.id for r in run.results if r.verdict not in (PASS, "reported-only")]
    cls = classify_hypersurface(m.space, m.hypersurface, pts)
    tg = cls["totally_geodesic_D"]["verdict"] == "yes" and cls["totally_geodesic_D*"]["verdict"] == "yes"
    criterion(2, "trivial fixture", mag <= 1e-10 and not bad and tg,
              f"max |object| {mag:.3g}, non-passing checks {bad}, totally geodesic both: {tg}")


CRITERION3_IDS = [
    "ind.duality-defect",      # screen-projected duality of the induced pair
    "ind.metric-sum",          # (D_X g)(Y,Z) split through B + B*
    "ind.xi-forms-cancel",     # B(X, xi) + B*(X, xi) = 0
    "ind.shape-eta-cancel",
    "ind.screen-form-shape",   # C(X, PY) = g(A_N X, PY), both connections
    "ind.radical-shape-B",     # derived variants relating B to the radical shape operators
    "ind.radical-shape-B*",
    "ind.radical-shape-xi",    # Abar*_xi xi + Abar_xi xi = 0
    "ind.screen-duality",
    "ind.screen-torsion",
    "ind.eps-tau",
    "ind.screen-transversal",  # screen parallel iff C = 0 iff C* = 0
    "ind.screen-bracket",      # screen integrable iff C symmetric iff C* symmetric
]


def test_criterion_3_statistical_suite(criterion):
    t0 = time.perf_counter()
    m = load("paper-cone-symK")
    pts = sample_points(m.hypersurface.domain, 48, 0, extra=0)
    run = run_identity_suite(m.space, m.hypersurface, pts, SuiteConfig.from_run(m.run),
                             select=CRITERION3_IDS)
    dt = time.perf_counter() - t0
    res = run.by_id()
    missing = [i for i in CRITERION3_IDS if i not in res]
    worst = max(res[i].max_residual for i in CRITERION3_IDS if i in res)
    verdicts_ok = all(res[i].verdict == PASS for i in CRITERION3_IDS if i in res)
    ok = not missing and verdicts_ok and worst < 1e-6 and dt < 30 and run.guards.flags["statistical"]
    criterion(3, "statistical identity suite", ok,
              f"{len(CRITERION3_IDS)} checks at {len(pts)} points, max residual {worst:.3g} "
              f"(tol 1e-6), {dt:.2f} s (limit 30 s)")


def test_criterion_4_duality_failure(criterion, capsys, tmp_path):
    m = load("paper-cone")
    worst = 0.0
    for u2, u3 in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (0.7, 2.2)]:
        lg = LocalGeometry(m.space, m.hypersurface, [0.0, u2, u3])
        W2, xi = lg.W[1], lg.xi
        rep = validate_statistical(m.space, [list(lg.x)], probes={"W2": W2, "xi": xi})
        want = S2 * abs(u3 ** 2 - u2 ** 2)
        worst = max(worst, abs(rep.duality_by_triple["W2,W2,xi"] - want),
                    abs(abs(duality_defect(m.space, lg.x, W2, W2, xi)) - want))
    code = main(["verify", "--fixture", "paper-cone", "--points", "32", "--seed", "7"])
    out = json.loads(capsys.readouterr().out)
    res = {r["id"]: r for r in out["payload"]["results"]}
    values_ok = all(r["verdict"] == "pass" for k, r in res.items() if k.startswith("value."))
    ok = worst < 1e-8 and code == 2 and res["amb.duality"]["verdict"] == FAIL and values_ok
    criterion(4, "duality-failure detection", ok,
              f"closed-form error {worst:.3g} (tol 1e-8), verify exit {code}, value checks pass: {values_ok}")


def test_criterion_5_curvature_cross_validation(criterion):
    fd_worst, ratios, gc_worst = 0.0, [], 0.0
    for name in ("paper-cone-LC", "paper-cone-symK"):
        m = load(name)
        sp, h = m.space, m.hypersurface
        pts = sample_points(h.domain, 8, 0, extra=0)
        for i, p in enumerate(pts):
            lg = LocalGeometry(sp, h, p)
            probes = [t for t in probe_triples(lg, np.random.default_rng(i), 20) if t[0][0].startswith("r")]
            res = gauss_codazzi_residuals(None, None, None, probes=probes, lg=lg)
            gc_worst = max(gc_worst, max(v for k, v in res.items() if not k.endswith("-literal")))
        p = pts[1]
        lg = LocalGeometry(sp, h, p)
        for star, R in ((False, lg.R), (True, lg.R_star)):
            errs = [np.abs(oracles.induced_curvature_fd(sp, h, p, s, star) - R).max()
                    for s in (1e-3, 5e-4, 2.5e-4)]
            fd_worst = max(fd_worst, errs[-1])
            ratios += [a / b for a, b in zip(errs, errs[1:])]
    conv = all(3.0 < r < 5.0 for r in ratios)
    ok = fd_worst < 1e-4 and conv and gc_worst < 1e-5
    criterion(5, "curvature cross-validation", ok,
              f"FD error {fd_worst:.3g} (tol 1e-4), halving ratios {min(ratios):.2f}..{max(ratios):.2f}, "
              f"Gauss-Codazzi max {gc_worst:.3g} over {len(GC_IDS)} ids (tol 1e-5)")


def test_criterion_6_ricci(criterion):
    m = load("paper-cone-LC")
    rng = np.random.default_rng(0)
    paths, asym, mag = 0.0, 0.0, 0.0
    for p in sample_points(m.hypersurface.domain, 8, 0, extra=0):
        lg = LocalGeometry(m.space, m.hypersurface, p)
        for _ in range(5):
            X, Y = rng.standard_normal((2, 3))
            for star in (False, True):
                prim, sec, _ = ricci02_both(lg, star, X, Y)
                paths = max(paths, abs(prim - sec))
                mag = max(mag, abs(prim))
            d = (ricci02_at(None, None, None, "D", X, Y, lg=lg)
                 - ricci02_at(None, None, None, "D", Y, X, lg=lg))
            pred = lg.Cform(True, X, lg.Abar_xi(True, Y)) - lg.Cform(True, Y, lg.Abar_xi(True, X))
            asym = max(asym, abs(d - pred))
    m0 = load("flat-plane-P0")
    flat = 0.0
    for p in sample_points(m0.hypersurface.domain, 8, 0, extra=0):
        lg = LocalGeometry(m0.space, m0.hypersurface, p)
        for _ in range(5):
            X, Y = rng.standard_normal((2, 3))
            for con in ("D", "D*"):
                flat = max(flat, abs(ricci02_at(None, None, None, con, X, Y, lg=lg)
                                     - ricci02_at(None, None, None, con, Y, X, lg=lg)))
    ok = paths < 1e-6 and asym < 1e-5 and flat < 1e-9
    criterion(6, "Ricci machinery", ok,
              f"path gap {paths:.3g} (tol 1e-6), asymmetry vs C*-commutator {asym:.3g} (tol 1e-5), "
              f"parallel-screen asymmetry {flat:.3g} (tol 1e-9); max |Ric| on this fixture {mag:.3g}")


def test_criterion_7_scalars(criterion):
    m = load("paper-cone-LC")
    s = curvature_scalars_at(m.space, m.hypersurface, [0.0, 1.0, 1.0], c=0.0)
    dH = abs(s["H"] + S2 / 2)
    worst = 0.0
    for p in sample_points(m.hypersurface.domain, 8, 0, extra=0):
        lhs, rhs = curvature_scalars_at(m.space, m.hypersurface, p, c=0.0)["checks"]["screen-scalar-weighted"]
        worst = max(worst, abs(lhs - rhs))
    ch = s["checks"]
    both = all(k in ch for k in ("radical-ricci-summed", "radical-ricci-per-i", "null-sectional-weighted",
                                 "null-sectional-literal", "mixed-sectional-derived",
                                 "mixed-sectional-literal"))
    ok = dH < 1e-8 and worst < 1e-5 and both
    criterion(7, "scalar quantities", ok,
              f"|H + sqrt2/2| = {dH:.3g} (tol 1e-8), screen scalar residual {worst:.3g} (tol 1e-5), "
              f"both readings reported: {both}")


def test_criterion_8_determinism_and_scaling(criterion, capsys):
    argv = ["verify", "--fixture", "paper-cone-symK", "--points", "8", "--seed", "3"]
    main(argv)
    a = capsys.readouterr().out
    main(argv)
    b = capsys.readouterr().out
    same = a == b

    m = load("paper-cone-symK")
    h2 = m.hypersurface.scaled_xi(2.0)
    pts = sample_points(m.hypersurface.domain, 8, 3)
    cfg = SuiteConfig.from_run(m.run)
    r1 = run_identity_suite(m.space, m.hypersurface, pts, cfg)
    r2 = run_identity_suite(m.space, h2, pts, cfg)
    verdicts = [(r.id, r.verdict) for r in r1.results] == [(r.id, r.verdict) for r in r2.results]
    dev = 0.0
    for p in pts:
        la, lb = LocalGeometry(m.space, m.hypersurface, p), LocalGeometry(m.space, h2, p)
        dev = max(dev, np.abs(lb.B - 2 * la.B).max(), np.abs(lb.N - la.N / 2).max())
    ok = same and verdicts and dev < 1e-9
    criterion(8, "determinism and xi rescaling", ok,
              f"byte-identical: {same}, verdicts unchanged: {verdicts}, scaling deviation {dev:.3g} (tol 1e-9)")
