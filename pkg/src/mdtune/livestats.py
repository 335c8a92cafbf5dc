"""Particle-distribution statistics over a configuration-independent
CSF-1 cell binning.

These are the runtime features the expert and forest selectors consume;
their order in feature_vector() is the dataset/model contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SimulationParams
from .particles import ParticleSet

FEATURE_NAMES = ("meanParticlesPerBin", "relStdDevParticlesPerBin",
                 "medianParticlesPerBin", "maxParticlesPerBin",
                 "numBins", "numEmptyBins", "threadCount", "skin")


@dataclass(frozen=True)
class LiveStatistics:
    mean_particles_per_bin: float
    rel_std_dev_particles_per_bin: float
    median_particles_per_bin: float
    max_particles_per_bin: float
    num_bins: int
    num_empty_bins: int
    thread_count: int
    skin: float

    def feature_vector(self) -> np.ndarray:
        return np.array([
            self.mean_particles_per_bin,
            self.rel_std_dev_particles_per_bin,
            self.median_particles_per_bin,
            self.max_particles_per_bin,
            float(self.num_bins),
            float(self.num_empty_bins),
            float(self.thread_count),
            self.skin,
        ])


def compute_live_stats(particles: ParticleSet,
                       params: SimulationParams) -> LiveStatistics:
    """Bin counts over a CSF-1 grid (floor(domain/ℓ) per axis, stretched
    to fit) reduced to the eight selector features."""
    ell = params.interaction_length
    dims = np.maximum(1, np.floor(
        np.asarray(params.domain_size) / ell).astype(np.int64))
    lengths = np.asarray(params.domain_size) / dims
    nbins = int(np.prod(dims))
    counts = np.zeros(nbins, dtype=np.int64)
    if particles.n:
        coords = np.floor(particles.positions / lengths).astype(np.int64)
        np.clip(coords, 0, dims - 1, out=coords)
        flat = (coords[:, 0] * dims[1] + coords[:, 1]) * dims[2] + coords[:, 2]
        np.add.at(counts, flat, 1)
    mean = particles.n / nbins
    if mean > 0.0:
        rel_std = float(np.sqrt(np.mean((counts - mean) ** 2)) / mean)
    else:
        rel_std = 0.0
    ordered = np.sort(counts)
    median = float(ordered[(nbins - 1) // 2])
    return LiveStatistics(
        mean_particles_per_bin=mean,
        rel_std_dev_particles_per_bin=rel_std,
        median_particles_per_bin=median,
        max_particles_per_bin=float(ordered[-1]),
        num_bins=nbins,
        num_empty_bins=int(np.count_nonzero(counts == 0)),
        thread_count=params.thread_count,
        skin=params.skin,
    )
