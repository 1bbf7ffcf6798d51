"""Dense complex linear algebra used throughout the package.

Everything here is a thin, checked layer over :mod:`numpy.linalg`. Matrices are
``complex128`` arrays; real inputs are promoted where an operation is defined
over the complex field.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NoConvergence, NotHermitian, NotSymmetric

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

HERMITIAN_TOL = 1e-10
SYMMETRIC_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10


def as_complex(a: ArrayLike) -> ComplexArray:
    return np.asarray(a, dtype=np.complex128)


def conj(m: ArrayLike) -> ComplexArray:
    """Entrywise conjugate ``M^C``."""
    return np.conj(as_complex(m))


def transpose(m: ArrayLike) -> ComplexArray:
    return as_complex(m).T


def herm(m: ArrayLike) -> ComplexArray:
    """Conjugate transpose ``M^*``."""
    return np.conj(as_complex(m)).T


def vec(m: ArrayLike) -> ComplexArray:
    """Row-major vectorization: the rows of ``m`` stacked end to end."""
    return as_complex(m).reshape(-1)


def unvec(h: ArrayLike, rows: int, cols: int) -> ComplexArray:
    h = as_complex(h)
    if h.size != rows * cols:
        raise ValueError(f"cannot reshape vector of length {h.size} to {rows}x{cols}")
    return h.reshape(rows, cols)


def _scale(m: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0


def eig_hermitian(m: ArrayLike, tol: float = HERMITIAN_TOL) -> tuple[RealArray, ComplexArray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns the eigenvalues in ascending order and the matrix whose columns are
    the matching orthonormal eigenvectors.

    Raises:
        NotHermitian: if ``m`` differs from ``m^*`` by more than ``tol`` entrywise.
        NoConvergence: if LAPACK fails to converge.
    """
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - herm(m)), initial=0.0) > tol * _scale(m):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    try:
        w, vecs = np.linalg.eigh(0.5 * (m + herm(m)))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return w, vecs


def eig_sym_real(m: ArrayLike, tol: float = HERMITIAN_TOL) -> RealArray:
    """Ascending eigenvalues of a real symmetric matrix."""
    m = np.asarray(m)
    if np.iscomplexobj(m):
        if np.max(np.abs(m.imag), initial=0.0) > tol:
            raise NotHermitian("expected a real matrix")
        m = m.real
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T), initial=0.0) > tol * _scale(m):
        raise NotHermitian("matrix is not symmetric within tolerance")
    try:
        return np.linalg.eigvalsh(0.5 * (m + m.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc


def lstsq(a: ArrayLike, b: ArrayLike) -> ComplexArray:
    """Minimum-norm minimizer of ``||a x - b||^2``."""
    a = as_complex(a)
    b = as_complex(b)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    try:
        x, *_ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc
    return x


def numerical_rank(m: ArrayLike, tol: float = DEFAULT_RANK_TOL) -> int:
    s = np.linalg.svd(as_complex(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(m: ArrayLike, tol: float = DEFAULT_RANK_TOL) -> ComplexArray:
    """Orthonormal basis of ``Null(m)``, one basis vector per column.

    Singular values below ``tol`` times the largest one count as zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = as_complex(m)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    cols = m.shape[1]
    if m.size == 0:
        return np.eye(cols, dtype=np.complex128)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return np.conj(vh[rank:]).T.copy()


def takagi_factor(m: ArrayLike, tol: float = SYMMETRIC_TOL) -> ComplexArray:
    """Return a square ``A`` with ``A^T A = m`` for complex symmetric ``m``.

    Uses the real symmetric embedding ``[[Re m, Im m], [Im m, -Re m]]``. An
    eigenvector ``(x, y)`` with eigenvalue ``s >= 0`` gives ``u = x + iy`` with
    ``m conj(u) = s u``, which is the Takagi relation ``m = U diag(s) U^T``.
    """
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.T), initial=0.0) > tol * _scale(m):
        raise NotSymmetric("matrix is not (plain-transpose) symmetric within tolerance")
    m = 0.5 * (m + m.T)
    d = m.shape[0]
    re, im = m.real, m.imag
    emb = np.block([[re, im], [im, -re]])
    try:
        s, vecs = np.linalg.eigh(emb)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc
    # spectrum is symmetric about zero; the top d values are the Takagi values
    s = np.clip(s[d:], 0.0, None)
    top = vecs[:, d:]
    u = top[:d] + 1j * top[d:]
    return (np.sqrt(s)[:, None] * u.T).astype(np.complex128)
