"""Shared fixtures and the all-pairs reference force calculation."""

import numpy as np
import pytest

# One "[criterion N] PASS/FAIL" line per acceptance test; printed after the
# run so the verdicts survive output capture (see test_acceptance.py).
ACCEPTANCE_VERDICTS: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance checklist")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)

from mdtune.configuration import enumerate_configurations
from mdtune.params import PERIODIC, REFLECTIVE, SimulationParams
from mdtune.particles import ParticleSet, ParticleTypeInfo


def brute_forces(pos, tid, eps, sig, cutoff, domain, periodic):
    """O(N^2) minimum-image reference forces and the directed
    interaction count (both i->j and j->i)."""
    pos = np.asarray(pos, dtype=np.float64)
    n = len(pos)
    d = pos[:, None, :] - pos[None, :, :]
    L = np.asarray(domain, dtype=np.float64)
    for k in range(3):
        if periodic[k]:
            d[..., k] -= L[k] * np.rint(d[..., k] / L[k])
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, np.inf)
    mask = (r2 < cutoff * cutoff) & (r2 > 0.0)
    sig = np.asarray(sig, dtype=np.float64)[tid]
    eps = np.asarray(eps, dtype=np.float64)[tid]
    smix = 0.5 * (sig[:, None] + sig[None, :])
    emix = np.sqrt(eps[:, None] * eps[None, :])
    r2safe = np.where(mask, r2, 1.0)
    s2 = smix * smix / r2safe
    s6 = s2 * s2 * s2
    fs = np.where(mask, 24.0 * emix * (2.0 * s6 * s6 - s6) / r2safe, 0.0)
    forces = np.einsum("ij,ijk->ik", fs, d)
    return forces, int(mask.sum())


def particle_forces(particles, params):
    """Reference forces for a ParticleSet under SimulationParams."""
    return brute_forces(particles.positions, particles.type_id,
                        particles.epsilon, particles.sigma,
                        params.cutoff, params.domain_size,
                        params.periodic_flags())


def force_rel_error(got, ref):
    """Relative Frobenius-norm error; falls back to the absolute norm for
    an all-zero reference."""
    scale = np.linalg.norm(ref)
    err = np.linalg.norm(np.asarray(got) - ref)
    return err / scale if scale > 0.0 else err


def random_particles(rng, n, domain, n_types=1):
    """Uniform random positions; types cycle when n_types > 1."""
    types = [ParticleTypeInfo(t, epsilon=1.0 + 0.5 * t,
                              sigma=1.0 - 0.2 * t, mass=1.0 + t)
             for t in range(n_types)]
    pos = rng.uniform(0.0, 1.0, (n, 3)) * np.asarray(domain, float)
    tid = (np.arange(n) % n_types).astype(np.int64)
    return ParticleSet(pos, type_ids=tid, types=types)


@pytest.fixture(scope="session")
def space():
    return enumerate_configurations()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_system(rng):
    """120 particles, two types, periodic cube."""
    params = SimulationParams(domain_size=(9.0, 9.0, 9.0), cutoff=2.5,
                              skin=0.3, rebuild_interval=5,
                              boundary=(PERIODIC,) * 3)
    particles = random_particles(rng, 120, params.domain_size, n_types=2)
    return particles, params


@pytest.fixture
def reflective_system(rng):
    params = SimulationParams(domain_size=(9.0, 11.0, 10.0), cutoff=2.5,
                              skin=0.2, rebuild_interval=5,
                              boundary=(REFLECTIVE,) * 3)
    particles = random_particles(rng, 100, params.domain_size, n_types=2)
    return particles, params
