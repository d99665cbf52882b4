"""Dense complex linear algebra shared by the rest of the package.

Thin, validated wrappers around LAPACK (through numpy) that fix the ordering
conventions used everywhere else: singular values and eigenvalues are always
returned in descending order.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

HERMITIAN_RTOL = 1e-9


class DegenerateChannelError(ArithmeticError):
    """Raised when a channel carries no usable signal (rank zero) or the
    post-combining noise covariance is numerically singular."""


class SvdResult(NamedTuple):
    """Thin SVD ``a = u @ diag(s) @ vh`` with ``s`` sorted descending."""

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return self.vh.conj().T


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a 2-D complex array, rejecting NaN/Inf entries."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def svd_descending(a) -> SvdResult:
    """Thin SVD with singular values in descending order.

    Parameters
    ----------
    a : array_like, shape (m, n)
        Complex matrix without non-finite entries.

    Returns
    -------
    SvdResult
        ``u`` is (m, k), ``s`` is (k,), ``vh`` is (k, n) with
        ``k = min(m, n)``. Column phases of ``u``/``v`` are not pinned.
    """
    arr = as_matrix(a)
    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    # LAPACK already sorts descending; enforce it anyway so callers never depend
    # on backend behaviour.
    order = np.argsort(-s, kind="stable")
    return SvdResult(u[:, order], s[order], vh[order, :])


def hermitian_eig_descending(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Raises ``ValueError`` if ``a`` deviates from Hermitian by more than
    ``1e-9`` relative to its Frobenius norm.
    """
    arr = as_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    scale = max(1.0, np.linalg.norm(arr))
    if np.linalg.norm(arr - arr.conj().T) > HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    herm = 0.5 * (arr + arr.conj().T)
    w, v = np.linalg.eigh(herm)
    return w[::-1].copy(), v[:, ::-1].copy()


def largest_eigenvalue_gram(a) -> float:
    """``lambda_max(a^H a)``, computed on the smaller of the two Gram matrices."""
    arr = as_matrix(a)
    gram = arr @ arr.conj().T if arr.shape[0] <= arr.shape[1] else arr.conj().T @ arr
    w, _ = hermitian_eig_descending(gram)
    return float(max(w[0], 0.0))


def log2det_eye_plus(x) -> float:
    """``log2 det(I + x)`` for Hermitian positive semidefinite ``x``.

    Evaluated through the eigenvalues of the symmetrized matrix; tiny negative
    eigenvalues from rounding are clipped to zero.
    """
    arr = as_matrix(x)
    herm = 0.5 * (arr + arr.conj().T)
    w = np.linalg.eigvalsh(herm)
    return float(np.sum(np.log2(1.0 + np.clip(w, 0.0, None))))
