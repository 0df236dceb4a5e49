"""Multiplicative random noise on far-field data."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class NoiseSpec:
    delta: float
    seed: int = 0

    def __post_init__(self):
        if not self.delta >= 0:
            raise InvalidArgument(f"noise level must be nonnegative, got {self.delta}")


def spectral_norm(matrix):
    a = np.asarray(matrix)
    if a.size == 0:
        raise InvalidArgument("spectral norm of an empty matrix")
    return float(np.linalg.norm(a, 2))


def noise_matrix(M, seed):
    """Complex Gaussian M x M matrix rescaled to unit spectral norm."""
    rng = np.random.default_rng(seed)
    e0 = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    return e0 / spectral_norm(e0)


def corrupt(F, spec, allow_noisy=False):
    """Return F with entries u(1 + delta E), E complex Gaussian with ||E||_2 = 1."""
    if F.is_noisy and not allow_noisy:
        raise InvalidArgument("far-field data is already noisy; pass allow_noisy=True to stack noise")
    provenance = {"kind": "noisy", "delta": float(spec.delta), "seed": int(spec.seed)}
    if spec.delta == 0:
        return F.with_entries(F.entries.copy(), provenance)
    E = noise_matrix(F.M, spec.seed)
    return F.with_entries(F.entries * (1.0 + spec.delta * E), provenance)
