"""Small dense linear algebra over generic scalars (floats or jets).

Pivot choices are made on base values, so a jet-valued system is eliminated
in the same order as its float base and derivatives stay smooth.
"""

import numpy as np

from .jet import Jet, base

__all__ = ["SingularMatrixError", "solve", "inv", "to_float", "is_generic", "obj"]


class SingularMatrixError(ArithmeticError):
    pass


def is_generic(a):
    a = np.asarray(a)
    return a.dtype == object and any(isinstance(x, Jet) for x in a.flat)


def obj(a):
    return np.asarray(a, dtype=object)


def to_float(a):
    """Base values as a float array."""
    a = np.asarray(a, dtype=object)
    return np.vectorize(base, otypes=[float])(a) if a.size else a.astype(float)


def _lu_solve(a, b, tol):
    n = len(a)
    a = [list(row) for row in a]
    b = [list(row) for row in b]
    scale = max((abs(base(x)) for row in a for x in row), default=0.0)
    if scale == 0:
        raise SingularMatrixError("zero matrix")
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(base(a[r][col])))
        if abs(base(a[piv][col])) <= tol * scale:
            raise SingularMatrixError(f"singular matrix (pivot {base(a[piv][col]):.3g})")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        p = a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / p
            if base(f) == 0 and not isinstance(f, Jet):
                continue
            row_r, row_c = a[r], a[col]
            for k in range(col + 1, n):
                row_r[k] = row_r[k] - f * row_c[k]
            br, bc = b[r], b[col]
            for k in range(len(br)):
                br[k] = br[k] - f * bc[k]
    x = [[0.0] * len(b[0]) for _ in range(n)]
    for r in range(n - 1, -1, -1):
        for k in range(len(b[0])):
            acc = b[r][k]
            for c in range(r + 1, n):
                acc = acc - a[r][c] * x[c][k]
            x[r][k] = acc / a[r][r]
    return x


def solve(a, b, tol=1e-14):
    """Solve ``a x = b``; ``b`` may be a vector or a matrix of columns."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    vec = b.ndim == 1
    bm = b.reshape(-1, 1) if vec else b
    if not (is_generic(a) or is_generic(bm)):
        af = a.astype(float)
        if not af.size or not np.all(np.isfinite(af)) or np.linalg.cond(af) > 1e13:
            raise SingularMatrixError("singular matrix")
        x = np.linalg.solve(af, bm.astype(float))
        return x.ravel() if vec else x
    x = np.array(_lu_solve(a.tolist(), bm.tolist(), tol), dtype=object)
    return x.ravel() if vec else x


def inv(a, tol=1e-14):
    n = len(a)
    return solve(a, np.eye(n, dtype=float).astype(object), tol)
