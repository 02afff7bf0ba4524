"""Small dense complex-matrix kernel.

Matrices are plain 2-D ``numpy`` arrays of dtype ``complex128``. Only the
handful of primitives the rate formulas need live here: adjoint, product,
Hermitian log-determinant (base 2), Hermitian spectrum and HPD solves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

HERMITIAN_RTOL = 1e-10


class NotHermitianError(ValueError):
    pass


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot is not strictly positive.

    ``pivot`` is the 0-based index of the failing diagonal entry.
    """

    def __init__(self, pivot: int, value: float):
        self.pivot = pivot
        self.value = value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot} has value {value:.3e}"
        )


def cmatrix(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Build a validated complex matrix.

    ``entries`` is either a nested sequence / array, or a flat row-major
    sequence when ``rows`` and ``cols`` are given.
    """
    a = np.array(entries, dtype=np.complex128)
    if rows is not None or cols is not None:
        if rows is None or cols is None or a.size != rows * cols:
            raise ValueError(f"expected {rows}x{cols} entries, got {a.size}")
        a = a.reshape(rows, cols)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


@dataclass(frozen=True)
class HermitianSpectrum:
    eigenvalues: np.ndarray  # real, descending

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.eigenvalues, dtype=dtype)


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def is_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = np.max(np.abs(a)) if a.size else 0.0
    return bool(np.max(np.abs(a - adjoint(a)), initial=0.0) <= rtol * max(scale, 1e-300))


def _check_hermitian(a: np.ndarray) -> np.ndarray:
    if not is_hermitian(a):
        raise NotHermitianError(f"matrix of shape {a.shape} is not Hermitian")
    return 0.5 * (a + adjoint(a))


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor ``L`` with ``L @ L^H == a``.

    Column-oriented (left-looking) factorization; the diagonal is checked
    at every step so a failure names the offending pivot.
    """
    a = _check_hermitian(np.asarray(a, dtype=np.complex128))
    n = a.shape[0]
    L = np.zeros_like(a)
    for j in range(n):
        d = a[j, j].real - np.sum(np.abs(L[j, :j]) ** 2)
        if not d > 0.0:
            raise NotPositiveDefiniteError(j, float(d))
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ np.conj(L[j, :j])) / L[j, j]
    return L


def logdet_hpd(a: np.ndarray) -> float:
    """log2 det(a) for Hermitian positive definite ``a`` (via Cholesky)."""
    L = cholesky(a)
    return float(2.0 * np.sum(np.log2(np.diag(L).real)))


def eigvals_hermitian(a: np.ndarray) -> HermitianSpectrum:
    a = _check_hermitian(np.asarray(a, dtype=np.complex128))
    w = np.linalg.eigvalsh(a)[::-1]
    return HermitianSpectrum(np.ascontiguousarray(w))


def hpd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` for HPD ``a`` by two triangular solves."""
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    L = cholesky(a)
    y = solve_triangular(L, b, lower=True)
    return solve_triangular(L, y, lower=True, trans="C")


def whiten(rnoise: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Return ``L^-1 s L^-H`` for ``L L^H = rnoise``, symmetrized."""
    L = cholesky(rnoise)
    t = solve_triangular(L, s, lower=True)
    t = solve_triangular(L, adjoint(t), lower=True)
    return 0.5 * (t + adjoint(t))
