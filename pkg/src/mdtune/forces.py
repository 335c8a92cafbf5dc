"""Lennard-Jones 12-6 pair force with Lorentz-Berthelot mixing."""

from __future__ import annotations

import math

import numpy as np

from .particles import ParticleSet, ParticleTypeInfo


def mixing_tables(particles: ParticleSet) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise (sigma^2, 24*epsilon) tables indexed by (typeA, typeB).

    sigma is mixed arithmetically, epsilon geometrically.
    """
    sig = particles.sigma
    eps = particles.epsilon
    sig_mix = 0.5 * (sig[:, None] + sig[None, :])
    eps_mix = np.sqrt(eps[:, None] * eps[None, :])
    return np.ascontiguousarray(sig_mix * sig_mix), \
        np.ascontiguousarray(24.0 * eps_mix)


def lj_force_pair(displacement, type_a: ParticleTypeInfo,
                  type_b: ParticleTypeInfo, cutoff: float) -> np.ndarray:
    """Force on A due to B, with displacement = posA - posB.

    Zero beyond the cutoff; coincident particles are an error because the
    force diverges there.
    """
    d = np.asarray(displacement, dtype=np.float64)
    r2 = float(d @ d)
    if r2 == 0.0:
        raise ValueError("coincident particles: |displacement| = 0")
    if r2 >= cutoff * cutoff:
        return np.zeros(3)
    sigma = 0.5 * (type_a.sigma + type_b.sigma)
    epsilon = math.sqrt(type_a.epsilon * type_b.epsilon)
    inv_r2 = 1.0 / r2
    s2 = sigma * sigma * inv_r2
    s6 = s2 * s2 * s2
    s12 = s6 * s6
    fscal = 24.0 * epsilon * (2.0 * s12 - s6) * inv_r2
    return fscal * d
