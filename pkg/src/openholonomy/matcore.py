"""
Dense complex linear algebra kernel.

Small square matrices (overlap matrices, connections) are the common case,
so everything here is a thin, validated layer over LAPACK via numpy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_RANK_TOL = 1e-8


def as_cmatrix(m, name="matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex128 array or raise."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def is_unitary(m, tol=1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.linalg.norm(dagger(m) @ m - np.eye(m.shape[0])) <= tol


@dataclass(frozen=True)
class SvdResult:
    left: np.ndarray
    singulars: np.ndarray
    right_h: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singulars) @ self.right_h


@dataclass(frozen=True)
class PolarResult:
    """Left polar decomposition ``m = positive_part @ isometry_part``."""

    positive_part: np.ndarray
    isometry_part: np.ndarray
    rank: int
    singulars: np.ndarray


def svd(m) -> SvdResult:
    """Singular value decomposition of a square complex matrix.

    Singular values come back in descending order.
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"svd expects a square matrix, got shape {m.shape}")
    u, s, vh = np.linalg.svd(m)
    return SvdResult(left=u, singulars=s, right_h=vh)


def numerical_rank(singulars, rank_tol=DEFAULT_RANK_TOL) -> int:
    return int(np.count_nonzero(np.asarray(singulars) > rank_tol))


def polar_decompose(m, rank_tol=DEFAULT_RANK_TOL) -> PolarResult:
    """
    Polar decomposition ``M = R U_M`` through the SVD ``M = W S V^H``.

    ``R = W S W^H`` is Hermitian positive semi-definite. ``U_M = W G V^H``
    where ``G`` keeps only singular values above ``rank_tol``; this is the
    unique unitary factor when ``M`` has full numerical rank and the partial
    isometry ``R^+ M`` otherwise.

    Parameters
    ----------
    m : array_like, shape (K, K)
    rank_tol : float
        Absolute threshold on singular values.

    Returns
    -------
    PolarResult
    """
    if not rank_tol > 0:
        raise InvalidInputError("rank_tol must be positive")
    dec = svd(m)
    w, s, vh = dec.left, dec.singulars, dec.right_h
    keep = (s > rank_tol).astype(float)
    positive = (w * s) @ dagger(w)
    positive = 0.5 * (positive + dagger(positive))
    isometry = (w * keep) @ vh
    return PolarResult(
        positive_part=positive,
        isometry_part=isometry,
        rank=int(keep.sum()),
        singulars=s,
    )


def mp_inverse(m, rank_tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse; singular values <= ``rank_tol`` are dropped.

    For a Hermitian positive semi-definite input this is the same as inverting
    the nonzero eigenvalues of its spectral decomposition.
    """
    m = as_cmatrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    inv = np.zeros_like(s)
    big = s > rank_tol
    inv[big] = 1.0 / s[big]
    return (dagger(vh) * inv) @ dagger(u)


def _check_antihermitian(a, tol=1e-8):
    defect = np.linalg.norm(a + dagger(a), axis=(-2, -1))
    scale = np.linalg.norm(a, axis=(-2, -1))
    bad = defect > tol * np.maximum(scale, 1e-300)
    if np.any(bad):
        raise InvalidInputError(
            f"matrix is not anti-Hermitian (defect {np.max(defect):.3e}); "
            "the upstream connection computation is broken"
        )


def expm_antihermitian(a, scale=1.0) -> np.ndarray:
    """
    ``exp(scale * a)`` for anti-Hermitian ``a``.

    Uses the eigendecomposition of the Hermitian matrix ``i a``, so the result
    is unitary to working precision. Accepts a stack of shape (..., K, K).
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"expected square matrices, got shape {a.shape}")
    _check_antihermitian(a)
    h = 1j * a
    h = 0.5 * (h + dagger(h))
    evals, evecs = np.linalg.eigh(h)
    # a = -i h, so exp(scale a) = V exp(-i scale lambda) V^H
    phases = np.exp(-1j * scale * evals)
    return (evecs * phases[..., None, :]) @ dagger(evecs)


def orthonormalize(m) -> np.ndarray:
    """
    Gram-Schmidt orthonormalization of the columns of an N x K matrix.

    Implemented with a QR factorization whose triangular factor is made to
    have a positive real diagonal, so the result matches classical
    Gram-Schmidt and leaves an orthonormal input unchanged.
    """
    m = as_cmatrix(m)
    n, k = m.shape
    if k > n:
        raise InvalidInputError(f"cannot orthonormalize {k} columns in dimension {n}")
    smin = np.linalg.svd(m, compute_uv=False)[-1]
    if smin <= 1e-10:
        raise InvalidInputError(f"columns are linearly dependent (smallest singular value {smin:.3e})")
    q, r = np.linalg.qr(m)
    d = np.diag(r)
    return q * (d / np.abs(d))


def symmetric_orthonormalize(m) -> np.ndarray:
    """Lowdin orthonormalization ``m (m^H m)^{-1/2}``: the closest orthonormal frame."""
    m = as_cmatrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s[-1] <= 1e-10:
        raise InvalidInputError(f"columns are linearly dependent (smallest singular value {s[-1]:.3e})")
    return u @ vh
