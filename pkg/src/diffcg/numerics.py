"""Complex linear-algebra primitives shared by the adaptive engines.

Every operation accepts arrays with arbitrary leading batch axes: shape
(M,) / (M, M) is a single vector/matrix, while (N, M) / (N, M, M) is a
stack of N systems updated in lockstep. All reductions run over the
trailing axis with the same associativity in both layouts, so a batched
call produces bit-identical results to N independent single calls.
Exceptions are ``cholesky_factor``/``direct_solve``, which operate on a
single matrix and exist as slow, transparent oracles.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DimensionMismatchError",
    "SingularMatrixError",
    "PIVOT_FLOOR",
    "vdot",
    "matvec",
    "hermitize",
    "corr_update",
    "cross_update",
    "cholesky_factor",
    "direct_solve",
    "quad_cost",
]

# Cholesky pivots below this are treated as loss of positive definiteness.
PIVOT_FLOOR = 1e-12


class DimensionMismatchError(ValueError):
    """Operand shapes are incompatible."""


class SingularMatrixError(ArithmeticError):
    """Matrix is numerically singular or not positive definite."""


def _as_complex(a, name: str) -> np.ndarray:
    try:
        return np.asarray(a, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatchError(f"{name} is not a complex array: {exc}") from exc


def _check_forgetting(forgetting: float) -> float:
    forgetting = float(forgetting)
    if not 0.0 < forgetting <= 1.0:
        raise ValueError(f"forgetting must lie in (0, 1], got {forgetting:g}")
    return forgetting


def vdot(a, b) -> np.ndarray:
    """Hermitian inner product conj(a)·b over the trailing axis.

    Batched: inputs (..., M) give a (...,) result.
    """
    a = _as_complex(a, "a")
    b = _as_complex(b, "b")
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatchError(
            f"inner product needs equal trailing dims, got {a.shape} and {b.shape}"
        )
    return (np.conj(a) * b).sum(axis=-1)


def matvec(mat, vec) -> np.ndarray:
    """Matrix-vector product over the trailing axes, (..., M, M) x (..., M).

    Implemented as an elementwise product plus trailing-axis sum so the
    reduction order is identical for single and stacked inputs.
    """
    mat = _as_complex(mat, "mat")
    vec = _as_complex(vec, "vec")
    m = vec.shape[-1]
    if mat.shape[-2:] != (m, m):
        raise DimensionMismatchError(
            f"matvec needs (..., {m}, {m}) matrix for (..., {m}) vector, got {mat.shape}"
        )
    return (mat * vec[..., None, :]).sum(axis=-1)


def hermitize(mat) -> np.ndarray:
    """Exact Hermitian projection: lower triangle mirrored up, real diagonal."""
    mat = _as_complex(mat, "mat")
    if mat.ndim < 2 or mat.shape[-1] != mat.shape[-2]:
        raise DimensionMismatchError(f"hermitize needs a square matrix, got {mat.shape}")
    strict = np.tril(mat, -1)
    out = strict + np.conj(np.swapaxes(strict, -1, -2))
    idx = np.arange(mat.shape[-1])
    out[..., idx, idx] = mat[..., idx, idx].real
    return out


def corr_update(corr, x, forgetting) -> np.ndarray:
    """One exponentially weighted rank-one correlation update.

    Returns forgetting * corr + x x^H, re-symmetrized by mirroring the
    lower triangle so the result is Hermitian to the last bit (complex
    multiplies leave ~1e-17 imaginary residue on the diagonal otherwise).
    """
    corr = _as_complex(corr, "corr")
    x = _as_complex(x, "x")
    forgetting = _check_forgetting(forgetting)
    m = x.shape[-1]
    if corr.shape[-2:] != (m, m):
        raise DimensionMismatchError(
            f"corr must be (..., {m}, {m}) for x of shape {x.shape}, got {corr.shape}"
        )
    return hermitize(forgetting * corr + x[..., :, None] * np.conj(x[..., None, :]))


def cross_update(cross, d, x, forgetting) -> np.ndarray:
    """One exponentially weighted cross-correlation update.

    Returns forgetting * cross + conj(d) x, where d is the scalar
    reference sample (batched: one scalar per stacked system).
    """
    cross = _as_complex(cross, "cross")
    x = _as_complex(x, "x")
    d = _as_complex(d, "d")
    forgetting = _check_forgetting(forgetting)
    if cross.shape[-1] != x.shape[-1]:
        raise DimensionMismatchError(
            f"cross and x need equal trailing dims, got {cross.shape} and {x.shape}"
        )
    return forgetting * cross + np.conj(d)[..., None] * x


def cholesky_factor(mat) -> np.ndarray:
    """Lower-triangular Cholesky factor of one Hermitian PD matrix.

    Deterministic, unpivoted. Raises SingularMatrixError when a pivot
    drops below PIVOT_FLOOR. Reads only the lower triangle of ``mat``.
    """
    mat = _as_complex(mat, "mat")
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatchError(f"cholesky_factor needs one square matrix, got {mat.shape}")
    m = mat.shape[0]
    low = np.zeros_like(mat)
    for j in range(m):
        row = low[j, :j]
        pivot = mat[j, j].real - np.real(np.sum(row * np.conj(row)))
        if pivot < PIVOT_FLOOR:
            raise SingularMatrixError(f"pivot {pivot:.3e} below {PIVOT_FLOOR:g} at column {j}")
        diag = np.sqrt(pivot)
        low[j, j] = diag
        if j + 1 < m:
            low[j + 1 :, j] = (mat[j + 1 :, j] - low[j + 1 :, :j] @ np.conj(row)) / diag
    return low


def direct_solve(mat, rhs) -> np.ndarray:
    """Solve mat @ w = rhs for one Hermitian positive-definite matrix.

    Cholesky factorization followed by forward/back substitution; used
    as the transparent oracle for the iterative solvers.
    """
    low = cholesky_factor(mat)
    rhs = _as_complex(rhs, "rhs")
    m = low.shape[0]
    if rhs.shape != (m,):
        raise DimensionMismatchError(f"rhs must have shape ({m},), got {rhs.shape}")
    y = np.zeros(m, dtype=np.complex128)
    for i in range(m):
        y[i] = (rhs[i] - low[i, :i] @ y[:i]) / low[i, i]
    up = np.conj(low.T)
    w = np.zeros(m, dtype=np.complex128)
    for i in range(m - 1, -1, -1):
        w[i] = (y[i] - up[i, i + 1 :] @ w[i + 1 :]) / up[i, i]
    return w


def quad_cost(corr, cross, w) -> np.ndarray:
    """Quadratic cost 1/2 w^H R w - Re(b^H w) minimized by the solvers.

    Real-valued; batched inputs give a (...,) result.
    """
    return np.real(0.5 * vdot(w, matvec(corr, w)) - vdot(cross, w))
