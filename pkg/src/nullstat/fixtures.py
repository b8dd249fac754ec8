"""Bundled manifests, addressable as ``{"fixture": "<name>"}``."""

import copy

__all__ = ["FIXTURES", "fixture_manifest", "fixture_names"]

_X = ["x0", "x1", "x2", "x3"]
_U = ["u1", "u2", "u3"]
_R42 = [["-1", "0", "0", "0"], ["0", "-1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]
_R31 = [["-1", "0", "0", "0"], ["0", "1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]]
_RUN = {"points": 32, "seed": 0, "jet_order": 3,
        "tolerances": {"tol1": 1e-9, "tol2": 1e-7, "tol3": 1e-5}}

_F = "sqrt(x2^2+x3^2)"
_F2 = "(x2^2+x3^2)"


def _cone_difference_tensor():
    """Difference tensor reproducing the cone's prescribed ambient connection.

    Built as ``K = Kww w(x)w + Kxx n(x)n + Kwx (w(x)n + n(x)w)`` with
    covectors ``w`` (dual to W2) and ``n`` (dual to xi); both annihilate W1
    and N, so the contractions on the frame are exactly the prescribed ones
    and the extension off the frame is fixed by this choice.
    """
    w = ["0", "0", f"(-x3)/{_F2}", f"x2/{_F2}"]
    n = [f"{_F}/(4*{_F2})", f"(-{_F})/(4*{_F2})",
         f"sqrt(2)*x2/(4*{_F2})", f"sqrt(2)*x3/(4*{_F2})"]
    kww = ["0", "0", "(-x2)", "x3"]
    kxx = [f"sqrt(2)*{_F}/(4*{_F2})", f"(-sqrt(2))*{_F}/(4*{_F2})",
           f"(-2)*x2/(4*{_F2})", f"(-2)*x3/(4*{_F2})"]
    kwx = ["(-sqrt(2))", "(-sqrt(2))", "0", "0"]

    def prod(*fs):
        return None if "0" in fs else "*".join(f"({s})" for s in fs)

    K = []
    for a in range(4):
        rows = []
        for b in range(4):
            row = []
            for c in range(4):
                terms = [prod(kww[a], w[b], w[c]), prod(kxx[a], n[b], n[c]),
                         prod(kwx[a], w[b], n[c]), prod(kwx[a], n[b], w[c])]
                terms = [t for t in terms if t]
                row.append(" + ".join(terms) if terms else "0")
            rows.append(row)
        K.append(rows)
    return K


def _negate(K):
    return [[[f"-({e})" if e != "0" else "0" for e in r] for r in rows] for rows in K]


_CONE_HS = {
    "params": _U,
    "embedding": ["u1 + sqrt(2)*sqrt(u2^2+u3^2)", "u1", "u2", "u3"],
    "xi": ["-sqrt(u2^2+u3^2)", "sqrt(2)*u2", "sqrt(2)*u3"],
    "screen": [["1", "0", "0"], ["0", "-u3", "u2"]],
    "domain": [[-1.0, 1.0], [0.5, 2.5], [0.5, 3.5]],
}

_CONE_N = ["-1/(4*sqrt(u2^2+u3^2))", "1/(4*sqrt(u2^2+u3^2))",
           "sqrt(2)*u2/(4*(u2^2+u3^2))", "sqrt(2)*u3/(4*(u2^2+u3^2))"]


def _cone_expectations():
    zero_b = [{"form": form, "X": X, "Y": "W1", "value": "0"}
              for form in ("B", "B*") for X in ("W1", "W2", "xi")]
    return zero_b + [
        {"form": "B", "X": "W2", "Y": "W2", "value": "-2*sqrt(2)*u2^2"},
        {"form": "B", "X": "xi", "Y": "xi", "value": "-sqrt(2)"},
        {"form": "B*", "X": "W2", "Y": "W2", "value": "-2*sqrt(2)*u3^2"},
        {"form": "B*", "X": "xi", "Y": "xi", "value": "sqrt(2)"},
        {"form": "C", "X": "W2", "Y": "W2", "value": "-(sqrt(2)/2)*u2^2/(u2^2+u3^2)"},
        {"form": "C*", "X": "W2", "Y": "W2", "value": "-(sqrt(2)/2)*u3^2/(u2^2+u3^2)"},
        {"form": "C", "X": "xi", "Y": "W2", "value": "0"},
        {"form": "C*", "X": "xi", "Y": "W2", "value": "0"},
        {"form": "N", "value": _CONE_N},
    ]


_K = _cone_difference_tensor()

FIXTURES = {
    "flat-plane-P0": {
        "ambient": {"dim": 4, "coords": _X, "metric": _R42, "mode": "K_lower",
                    "K_lower": {}, "constant_c": 0.0},
        "hypersurface": {"params": _U, "embedding": ["u1", "u2", "u1", "u3"],
                         "xi": ["1", "0", "0"], "screen": [["0", "1", "0"], ["0", "0", "1"]],
                         "domain": [[-1.0, 1.0]] * 3},
        "run": _RUN,
        "expectations": [{"form": "N", "value": ["-0.5", "0", "0.5", "0"]}],
    },
    "paper-cone": {
        "ambient": {"dim": 4, "coords": _X, "metric": _R42, "mode": "explicit",
                    "gamma": _K, "gamma_star": _negate(_K)},
        "hypersurface": _CONE_HS,
        "run": _RUN,
        "expectations": _cone_expectations(),
    },
    "paper-cone-LC": {
        "ambient": {"dim": 4, "coords": _X, "metric": _R42, "mode": "K_lower",
                    "K_lower": {}, "constant_c": 0.0},
        "hypersurface": _CONE_HS,
        "run": _RUN,
        "expectations": [
            {"form": "B", "X": "W2", "Y": "W2", "value": "-sqrt(2)*(u2^2+u3^2)"},
            {"form": "B*", "X": "W2", "Y": "W2", "value": "-sqrt(2)*(u2^2+u3^2)"},
            {"form": "N", "value": _CONE_N},
        ],
    },
    "paper-cone-symK": {
        "ambient": {"dim": 4, "coords": _X, "metric": _R42, "mode": "K_lower",
                    "K_lower": {"2,2,2": "x3"}},
        "hypersurface": _CONE_HS,
        "run": _RUN,
    },
    "lightcone-R31": {
        "ambient": {"dim": 4, "coords": _X, "metric": _R31, "mode": "K_lower",
                    "K_lower": {}, "constant_c": 0.0},
        "hypersurface": {"params": _U, "embedding": ["sqrt(u1^2+u2^2+u3^2)", "u1", "u2", "u3"],
                         "xi": ["u1", "u2", "u3"], "screen": [["-u2", "u1", "0"], ["0", "-u3", "u2"]],
                         "domain": [[0.5, 1.5]] * 3},
        "run": _RUN,
    },
}


def fixture_names():
    return sorted(FIXTURES)


def fixture_manifest(name):
    """Deep copy of a bundled manifest."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}")
    return copy.deepcopy(FIXTURES[name])
