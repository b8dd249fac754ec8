"""Manifest loading: fixture expansion, schema validation, expression parsing."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .ambient import AmbientSpace
from .expr import ExprSyntaxError, UnknownVariableError, parse
from .fixtures import fixture_manifest
from .hypersurface import Hypersurface

__all__ = [
    "Manifest",
    "ManifestError",
    "load_manifest",
    "manifest_from_dict",
    "manifest_schema",
    "canonical_json",
    "DEFAULT_RUN",
]

DEFAULT_RUN = {"points": 32, "seed": 0, "jet_order": 3,
               "tolerances": {"tol1": 1e-9, "tol2": 1e-7, "tol3": 1e-5}}


class ManifestError(ValueError):
    """Invalid manifest; ``path`` is a JSON pointer to the offending node."""

    def __init__(self, message, path=""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"
        self.detail = message


def manifest_schema():
    text = resources.files("nullstat").joinpath("schemas/manifest.schema.json").read_text()
    return json.loads(text)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _pointer(parts):
    return "/" + "/".join(str(p).replace("~", "~0").replace("/", "~1") for p in parts) if parts else "/"


@dataclass
class Manifest:
    data: dict
    space: AmbientSpace
    hypersurface: Hypersurface
    run: dict
    expectations: list = field(default_factory=list)
    fixture: str | None = None

    @property
    def digest(self):
        return hashlib.sha256(canonical_json(self.data).encode()).hexdigest()

    def with_run(self, **overrides):
        data = copy.deepcopy(self.data)
        run = data.setdefault("run", {})
        for k, v in overrides.items():
            if v is None:
                continue
            if k == "tolerances":
                run.setdefault("tolerances", {}).update(v)
            else:
                run[k] = v
        out = manifest_from_dict(data)
        out.fixture = self.fixture
        return out


def _expand(raw):
    if not isinstance(raw, dict):
        raise ManifestError("manifest must be a JSON object")
    if "fixture" not in raw:
        return copy.deepcopy(raw), None
    extra = set(raw) - {"fixture", "run"}
    if extra:
        raise ManifestError(f"fixture shorthand allows only 'run', got {sorted(extra)}")
    name = raw["fixture"]
    try:
        data = fixture_manifest(name)
    except KeyError as exc:
        raise ManifestError(str(exc.args[0]), "/fixture") from None
    if "run" in raw:
        run = data.setdefault("run", {})
        for k, v in raw["run"].items():
            if k == "tolerances":
                run.setdefault("tolerances", {}).update(v)
            else:
                run[k] = v
    return data, name


def _parse_at(text, names, path):
    try:
        return parse(text, names)
    except ExprSyntaxError as exc:
        raise ManifestError(f"expression {text!r}: {exc}", path) from None
    except UnknownVariableError as exc:
        raise ManifestError(f"expression {text!r}: {exc}", path) from None


def _check_expressions(data):
    a, hs = data["ambient"], data["hypersurface"]
    coords, params = a["coords"], hs["params"]
    n, k = a["dim"], len(params)
    if len(coords) != n:
        raise ManifestError(f"expected {n} coordinates, got {len(coords)}", "/ambient/coords")
    if len(a["metric"]) != n or any(len(r) != n for r in a["metric"]):
        raise ManifestError(f"metric must be {n}x{n}", "/ambient/metric")
    for i, row in enumerate(a["metric"]):
        for j, e in enumerate(row):
            _parse_at(e, coords, _pointer(["ambient", "metric", i, j]))
    for key, e in a.get("K_lower", {}).items():
        idx = [int(s) for s in key.split(",")]
        if any(i >= n for i in idx):
            raise ManifestError(f"index out of range in {key!r}", _pointer(["ambient", "K_lower", key]))
        _parse_at(e, coords, _pointer(["ambient", "K_lower", key]))
    for name in ("gamma", "gamma_star"):
        if name not in a:
            continue
        arr = a[name]
        if len(arr) != n or any(len(r) != n or any(len(c) != n for c in r) for r in arr):
            raise ManifestError(f"{name} must be {n}x{n}x{n}", f"/ambient/{name}")
        for i, r in enumerate(arr):
            for j, c in enumerate(r):
                for l, e in enumerate(c):
                    _parse_at(e, coords, _pointer(["ambient", name, i, j, l]))
    if len(hs["embedding"]) != n:
        raise ManifestError(f"embedding needs {n} components", "/hypersurface/embedding")
    for i, e in enumerate(hs["embedding"]):
        _parse_at(e, params, _pointer(["hypersurface", "embedding", i]))
    if "xi" in hs:
        if len(hs["xi"]) != k:
            raise ManifestError(f"xi needs {k} components", "/hypersurface/xi")
        for i, e in enumerate(hs["xi"]):
            _parse_at(e, params, _pointer(["hypersurface", "xi", i]))
    if "screen" in hs:
        if len(hs["screen"]) != k - 1 or any(len(w) != k for w in hs["screen"]):
            raise ManifestError(f"screen needs {k - 1} vectors of {k} components", "/hypersurface/screen")
        for i, w in enumerate(hs["screen"]):
            for j, e in enumerate(w):
                _parse_at(e, params, _pointer(["hypersurface", "screen", i, j]))
    if len(hs["domain"]) != k:
        raise ManifestError(f"domain needs {k} intervals", "/hypersurface/domain")
    for i, (lo, hi) in enumerate(hs["domain"]):
        if not lo < hi:
            raise ManifestError(f"empty interval [{lo}, {hi}]", _pointer(["hypersurface", "domain", i]))
    for i, ex in enumerate(data.get("expectations", [])):
        base = ["expectations", i]
        vals = ex["value"] if isinstance(ex["value"], list) else [ex["value"]]
        if ex["form"] == "N" and len(vals) != n:
            raise ManifestError(f"N expectation needs {n} components", _pointer(base + ["value"]))
        if ex["form"] != "N" and not ("X" in ex and "Y" in ex):
            raise ManifestError("form expectation needs X and Y", _pointer(base))
        for j, e in enumerate(vals):
            _parse_at(e, params, _pointer(base + ["value", j]))


def manifest_from_dict(raw) -> Manifest:
    data, name = _expand(raw)
    errors = sorted(jsonschema.Draft202012Validator(manifest_schema()).iter_errors(data),
                    key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        path = _pointer(list(err.absolute_path))
        if err.validator == "required":
            missing = [r for r in err.validator_value if r not in err.instance]
            if missing:
                path = _pointer(list(err.absolute_path) + [missing[0]])
        raise ManifestError(err.message, path)
    _check_expressions(data)
    run = copy.deepcopy(DEFAULT_RUN)
    for k, v in data.get("run", {}).items():
        if k == "tolerances":
            run["tolerances"].update(v)
        else:
            run[k] = v
    a, hs = data["ambient"], data["hypersurface"]
    space = AmbientSpace.from_strings(a["coords"], a["metric"], K_lower=a.get("K_lower"),
                                      gamma=a.get("gamma"), gamma_star=a.get("gamma_star"),
                                      constant_c=a.get("constant_c"))
    h = Hypersurface.from_strings(hs["params"], hs["embedding"], hs.get("xi"), hs.get("screen"),
                                  hs["domain"])
    return Manifest(data, space, h, run, list(data.get("expectations", [])), name)


def load_manifest(path) -> Manifest:
    """Read, expand and validate a manifest file."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"invalid JSON: {exc}") from None
    return manifest_from_dict(raw)
