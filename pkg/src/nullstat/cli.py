"""Command-line entry point: ``nullstat <command> --manifest <file> ...``."""

from __future__ import annotations

import argparse
import sys
from itertools import product

import numpy as np

from .ambient import fit_constant_curvature, constant_curvature_residual, validate_statistical
from .curvature import curvature_report
from .harness import (FAIL, SuiteConfig, classify_hypersurface, run_identity_suite, sample_points,
                      stream)
from .hypersurface import FrameError, _embedding_jets, null_frame_at
from .induced import LocalGeometry, fundamental_forms_at
from .manifest import ManifestError, load_manifest, manifest_from_dict
from .report import build_report, dumps_csv, dumps_json

__all__ = ["main", "run_command", "COMMANDS"]

COMMANDS = ("validate", "frame", "objects", "curvature", "verify")


class CommandError(RuntimeError):
    pass


def _points(man):
    run = man.run
    return sample_points(man.hypersurface.domain, int(run["points"]), int(run["seed"]))


def _config(man):
    return SuiteConfig.from_run(man.run)


def _geometries(man, pts):
    lgs, errors = [], []
    for i, p in enumerate(pts):
        try:
            lgs.append(LocalGeometry(man.space, man.hypersurface, p))
        except (FrameError, ArithmeticError, ValueError) as exc:
            lgs.append(None)
            errors.append({"index": i, "point": p, "error": f"{type(exc).__name__}: {exc}"})
    return lgs, errors


def _ambient_points(man, pts):
    return [[float(v) for v in _embedding_jets(man.hypersurface, list(p))[0]] for p in pts]


# -- commands ------------------------------------------------------------------


def cmd_validate(man):
    pts = _points(man)
    xs = _ambient_points(man, pts)
    cfg = _config(man)
    rep = validate_statistical(man.space, xs, tol=cfg.tol1, rng=stream(cfg.seed, "validate"))
    if man.space.constant_c is not None:
        c, src = float(man.space.constant_c), "manifest"
    else:
        c, _ = fit_constant_curvature(man.space, xs, rng=stream(cfg.seed, "validate.fit-c"))
        src = "fitted"
    rng = stream(cfg.seed, "validate.constant-curvature")
    ccres = max(constant_curvature_residual(man.space, x, c, rng=rng) for x in xs)
    payload = rep.to_dict()
    payload["constant_curvature"] = {"c": c, "source": src, "residual": ccres}
    payload["points"] = xs
    rows = [[k, payload[k], rep.tolerance, payload[k] < rep.tolerance]
            for k in ("torsion_residual", "codazzi_residual", "duality_residual")]
    rows.append(["constant_curvature_residual", ccres, cfg.tol2, ccres < cfg.tol2])
    csv = (["quantity", "value", "tolerance", "pass"], rows)
    return payload, ("ok" if rep.passed else "fail"), csv


def cmd_frame(man):
    pts = _points(man)
    frames, errors, rows = [], [], []
    for i, p in enumerate(pts):
        try:
            fr = null_frame_at(man.hypersurface, man.space, p)
        except (FrameError, ArithmeticError, ValueError) as exc:
            errors.append({"index": i, "point": p, "error": f"{type(exc).__name__}: {exc}"})
            continue
        frames.append(fr.to_dict())
        named = {"xi": fr.xi, "N": fr.N}
        for k in range(len(fr.W)):
            named[f"W{k + 1}"] = fr.W[k]
            named[f"E{k + 1}"] = fr.E[k]
        for name, vec in named.items():
            rows.append([i] + list(p) + [name] + list(vec))
    n = man.space.dim
    header = ["index"] + list(man.hypersurface.params) + ["field"] + [f"c{a}" for a in range(n)]
    return {"frames": frames, "errors": errors}, ("error" if errors else "ok"), (header, rows)


def cmd_objects(man):
    pts = _points(man)
    lgs, errors = _geometries(man, pts)
    tables, rows = [], []
    keys = ["B", "B_star", "tau", "tau_star", "C_XPY", "C_star_XPY"]
    for i, lg in enumerate(lgs):
        if lg is None:
            continue
        names = lg.named_fields()
        pairs = {}
        for X, Y in product(names, repeat=2):
            fp = fundamental_forms_at(None, None, None, X, Y, lg=lg)
            pairs[f"{X},{Y}"] = fp.to_dict()
            rows.append([i] + lg.p + [X, Y] + [getattr(fp, k) for k in keys])
        tables.append({"index": i, "point": lg.p, "pairs": pairs,
                       "B": lg.B, "B_star": lg.Bs, "C": lg.C, "C_star": lg.Cs,
                       "A_N": lg.AN, "A_N_star": lg.ANs, "tau": lg.tau, "tau_star": lg.taus})
    header = ["index"] + list(man.hypersurface.params) + ["X", "Y"] + keys
    return {"tables": tables, "errors": errors}, ("error" if errors else "ok"), (header, rows)


def cmd_curvature(man):
    if int(man.run.get("jet_order", 3)) < 3:
        raise CommandError("curvature needs jet_order >= 3")
    pts = _points(man)
    lgs, errors = _geometries(man, pts)
    cfg = _config(man)
    c = man.space.constant_c
    if c is None:
        xs = [list(lg.x) for lg in lgs if lg is not None]
        c, _ = fit_constant_curvature(man.space, xs, rng=stream(cfg.seed, "guard.fit-c"))
    reports, rows = [], []
    for i, lg in enumerate(lgs):
        if lg is None:
            continue
        rep = curvature_report(None, None, None, c=c, rng=stream(cfg.seed, "curvature", i), lg=lg)
        d = rep.to_dict()
        d["index"] = i
        reports.append(d)
        s = rep.scalars
        rows.append([i] + lg.p + [s["H"], s["r_screen"], s["sigma"], float(np.sum(s["kappa_null"])),
                                  float(np.sum(s["kappa_iN"])),
                                  float(np.max(np.abs(rep.asymmetry_defect)))])
    header = (["index"] + list(man.hypersurface.params)
              + ["H", "r_screen", "sigma", "sum_kappa_null", "sum_kappa_iN", "max_asymmetry"])
    return {"c": c, "reports": reports, "errors": errors}, ("error" if errors else "ok"), (header, rows)


def cmd_verify(man):
    pts = _points(man)
    cfg = _config(man)
    lgs, _ = _geometries(man, pts)
    run = run_identity_suite(man.space, man.hypersurface, pts, cfg, man.expectations, lgs=lgs)
    cls = classify_hypersurface(man.space, man.hypersurface, pts, cfg, lgs=lgs)
    payload = run.to_dict()
    payload["classification"] = cls
    rows = [[r.id, r.verdict, r.max_residual, r.tolerance, r.points, r.argmax.get("index", "")]
            for r in run.results]
    status = "fail" if any(r.verdict == FAIL for r in run.results) else "ok"
    csv = (["id", "verdict", "max_residual", "tolerance", "points", "argmax_index"], rows)
    return payload, status, csv


_DISPATCH = {"validate": cmd_validate, "frame": cmd_frame, "objects": cmd_objects,
             "curvature": cmd_curvature, "verify": cmd_verify}

_EXIT = {"ok": 0, "fail": 2, "error": 1}


def run_command(cmd, manifest, fmt="json"):
    """Run ``cmd`` on a loaded manifest; returns ``(text, exit_code, report)``."""
    try:
        payload, status, (header, rows) = _DISPATCH[cmd](manifest)
    except (CommandError, FrameError, ArithmeticError, ValueError) as exc:
        rep = build_report(cmd, manifest, None, "error",
                           {"type": type(exc).__name__, "message": str(exc)})
        return dumps_json(rep), 1, rep
    rep = build_report(cmd, manifest, payload, status)
    text = dumps_csv(header, rows) if fmt == "csv" else dumps_json(rep)
    return text, _EXIT[status], rep


def _parser():
    ap = argparse.ArgumentParser(prog="nullstat", description=__doc__)
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="manifest JSON file")
    src.add_argument("--fixture", help="bundled fixture name")
    ap.add_argument("--points", type=int, help="low-discrepancy sample size")
    ap.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    ap.add_argument("--order", type=int, help="jet order (0..4)")
    ap.add_argument("--tol", type=float, help="uniform tolerance for all identity classes")
    ap.add_argument("--out", help="output file (default: standard output)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        raw = {"fixture": args.fixture} if args.fixture else None
        man = manifest_from_dict(raw) if raw else load_manifest(args.manifest)
        over = {"points": args.points, "seed": args.seed, "jet_order": args.order}
        if args.tol is not None:
            over["tolerances"] = {"tol1": args.tol, "tol2": args.tol, "tol3": args.tol}
        if any(v is not None for v in over.values()):
            man = man.with_run(**over)
    except (ManifestError, OSError) as exc:
        err = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ManifestError):
            err["path"] = exc.path
        text, code = dumps_json(build_report(args.command, None, None, "error", err)), 1
    else:
        text, code, _ = run_command(args.command, man, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
