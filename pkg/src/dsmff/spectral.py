"""Singular value decomposition of far-field matrices and derived operators."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericalFailure


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """F = U diag(s) V^*, singular values descending."""

    s: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def norm(self):
        return float(self.s[0]) if self.s.size else 0.0

    @property
    def M(self):
        return self.s.size

    def reconstruct(self):
        return (self.U * self.s) @ self.V.conj().T


def _as_square(F):
    a = np.asarray(getattr(F, "entries", F), dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.size == 0:
        raise InvalidArgument(f"expected a nonempty square matrix, got shape {a.shape}")
    return a


def svd(F, residual_tol=1e-10):
    """LAPACK SVD checked against the reconstruction residual contract."""
    a = _as_square(F)
    try:
        U, s, Vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    decomp = SpectralDecomposition(s, U, Vh.conj().T)
    if s[0] > 0:
        residual = np.linalg.norm(a - decomp.reconstruct(), 2)
        if residual > residual_tol * s[0] * max(1.0, a.shape[0] / 100):
            raise NumericalFailure("SVD reconstruction residual too large", residual)
    return decomp


def half_power_matrix(decomp):
    """|F|^{1/2} = V diag(sqrt(s)) V^*."""
    A = (decomp.V * np.sqrt(decomp.s)) @ decomp.V.conj().T
    return 0.5 * (A + A.conj().T)


def abs_hermitian(H):
    """|H| for Hermitian H through its eigendecomposition."""
    H = 0.5 * (H + H.conj().T)
    try:
        lam, Q = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver failed: {exc}") from exc
    A = (Q * np.abs(lam)) @ Q.conj().T
    return 0.5 * (A + A.conj().T)


def f_sharp(F):
    """|Re F| + |Im F| with Re F = (F + F^*)/2 and Im F = (F - F^*)/(2i)."""
    a = _as_square(F)
    re = 0.5 * (a + a.conj().T)
    im = (a - a.conj().T) / 2j
    return abs_hermitian(re) + abs_hermitian(im)
