import math

import numpy as np
import pytest

from conftest import particle_forces, random_particles
from mdtune.integrator import (BlowUpError, apply_boundaries, apply_gravity,
                               kick, drift,
                               apply_thermostat, current_temperature,
                               drift_with_force, finish_kick, integrate_step)
from mdtune.params import PERIODIC, REFLECTIVE, SimulationParams
from mdtune.particles import ParticleSet, ParticleTypeInfo

TYPES = [ParticleTypeInfo(0, epsilon=1.0, sigma=1.0, mass=1.0)]


def one_particle(x=(1.0, 1.0, 1.0), v=(0.0, 0.0, 0.0), mass=1.0):
    types = [ParticleTypeInfo(0, epsilon=1.0, sigma=1.0, mass=mass)]
    return ParticleSet(np.array([x], float),
                       velocities=np.array([v], float), types=types)


def test_drift_uniform_motion():
    p = one_particle(x=(0.0, 0.0, 0.0), v=(1.0, 0.0, 0.0))
    drift_with_force(p, 0.1)
    assert np.allclose(p.positions[0], (0.1, 0.0, 0.0))
    assert np.allclose(p.velocities[0], (1.0, 0.0, 0.0))


def test_constant_force_kinematics():
    # x = F/(2m) dt^2 with gravity -12.44 already in the stored force.
    p = one_particle(x=(0.0, 0.0, 0.0))
    p.view("force")[0] = (0.0, 0.0, -12.44)
    drift_with_force(p, 0.1)
    assert p.positions[0][2] == pytest.approx(-0.0622)


def test_finish_kick_averages_old_and_new_force():
    p = one_particle(v=(0.0, 0.0, 0.0), mass=2.0)
    p.view("old_force")[0] = (1.0, 0.0, 0.0)
    p.view("force")[0] = (3.0, 0.0, 0.0)
    finish_kick(p, 0.5)
    assert p.velocities[0][0] == pytest.approx((1.0 + 3.0) / (2 * 2.0) * 0.5)


def test_integrate_step_matches_manual_sequence():
    rng = np.random.default_rng(3)
    params = SimulationParams(domain_size=(8.0, 8.0, 8.0), cutoff=2.5,
                              boundary=(PERIODIC,) * 3, delta_t=1e-3)
    a = random_particles(rng, 40, params.domain_size)
    a.view("force")[:] = particle_forces(a, params)[0]
    b = a.copy()

    def update(parts):
        parts.view("force")[:] = particle_forces(parts, params)[0]

    integrate_step(a, params, force_update=lambda: update(a))

    # Bit-identical to the kick-drift-kick primitives in the same order.
    kick(b, params.delta_t)
    drift(b, params.delta_t)
    update(b)
    kick(b, params.delta_t)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.velocities, b.velocities)


def test_half_step_split_equals_single_verlet_update():
    # drift_with_force + finish_kick reproduces the textbook update
    # x += v·δt + F/(2m)·δt², v += (F_old+F_new)/(2m)·δt up to rounding.
    rng = np.random.default_rng(4)
    params = SimulationParams(domain_size=(8.0, 8.0, 8.0), cutoff=2.5,
                              boundary=(PERIODIC,) * 3, delta_t=1e-3)
    p = random_particles(rng, 40, params.domain_size)
    p.view("force")[:] = particle_forces(p, params)[0]
    x0 = p.positions.copy()
    v0 = p.velocities.copy()
    f0 = p.forces.copy()
    m = p.masses[:, None]
    dt = params.delta_t

    drift_with_force(p, dt)
    np.copyto(p.view("old_force"), p.view("force"))
    p.view("force")[:] = particle_forces(p, params)[0]
    finish_kick(p, dt)

    x_ref = x0 + v0 * dt + f0 / (2 * m) * dt * dt
    v_ref = v0 + (f0 + p.forces) / (2 * m) * dt
    assert np.allclose(p.positions, x_ref, rtol=1e-13, atol=1e-15)
    assert np.allclose(p.velocities, v_ref, rtol=1e-13, atol=1e-15)


def test_mirror_symmetric_pair_stays_symmetric():
    params = SimulationParams(domain_size=(10.0, 10.0, 10.0), cutoff=3.0,
                              boundary=(REFLECTIVE,) * 3, delta_t=1e-3)
    pos = np.array([[4.0, 5.0, 5.0], [6.0, 5.0, 5.0]])
    p = ParticleSet(pos, types=TYPES)
    for _ in range(50):
        integrate_step(p, params, force_update=lambda: p.view("force")
                       .__setitem__(slice(None),
                                    particle_forces(p, params)[0]))
    x = p.positions
    assert x[0][0] == pytest.approx(10.0 - x[1][0], abs=1e-12)
    assert np.allclose(x[:, 1:], 5.0, atol=1e-12)


def test_temperature_formula():
    p = one_particle(v=(1.0, 1.0, 1.0))
    assert current_temperature(p) == pytest.approx(1.0)
    p.view("vel")[:] *= 2.0
    assert current_temperature(p) == pytest.approx(4.0)
    p.view("vel")[:] = 0.0
    assert current_temperature(p) == 0.0


def test_temperature_empty_error():
    p = ParticleSet(np.zeros((0, 3)), types=TYPES)
    with pytest.raises(ValueError):
        current_temperature(p)


def test_thermostat_clamped_scaling():
    p = one_particle(v=(1.0, 1.0, 1.0))   # T = 1
    apply_thermostat(p, target=100.0, max_delta_t=0.1)
    assert np.allclose(p.velocities[0], math.sqrt(1.1))


def test_thermostat_downward_not_clamped():
    p = one_particle(v=(1.0, 1.0, 1.0))
    apply_thermostat(p, target=0.95, max_delta_t=0.1)
    assert np.allclose(p.velocities[0], math.sqrt(0.95))


def test_thermostat_at_target_identity():
    p = one_particle(v=(1.0, 1.0, 1.0))
    apply_thermostat(p, target=1.0, max_delta_t=0.1)
    assert np.allclose(p.velocities[0], 1.0)


def test_thermostat_zero_temperature_error():
    p = one_particle(v=(0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        apply_thermostat(p, target=1.0, max_delta_t=0.1)


def test_thermostat_monotone_approach():
    p = one_particle(v=(1.0, 1.0, 1.0))
    last = current_temperature(p)
    for _ in range(30):
        apply_thermostat(p, target=3.0, max_delta_t=0.1)
        t = current_temperature(p)
        assert t - last <= 0.1 + 1e-12
        assert t >= last
        last = t
    assert last == pytest.approx(3.0, abs=0.1 + 1e-9)


def test_gravity_adds_mass_scaled_z_force():
    p = one_particle(mass=2.5)
    p.view("force")[0] = (0.5, 0.5, 0.5)
    apply_gravity(p, -12.44)
    assert p.view("force")[0][2] == pytest.approx(0.5 - 2.5 * 12.44)
    assert p.view("force")[0][0] == 0.5
    apply_gravity(p, None)     # no-op
    assert p.view("force")[0][2] == pytest.approx(0.5 - 2.5 * 12.44)


def test_reflective_boundary_mirror_and_negate():
    params = SimulationParams(domain_size=(10.0, 10.0, 10.0), cutoff=3.0,
                              boundary=(REFLECTIVE,) * 3)
    p = one_particle(x=(-0.2, 5.0, 10.4), v=(-1.0, 0.0, 2.0))
    apply_boundaries(p, params)
    assert np.allclose(p.positions[0], (0.2, 5.0, 9.6))
    assert np.allclose(p.velocities[0], (1.0, 0.0, -2.0))


def test_periodic_boundary_wrap():
    params = SimulationParams(domain_size=(10.0, 10.0, 10.0), cutoff=3.0,
                              boundary=(PERIODIC,) * 3)
    p = one_particle(x=(10.3, -0.4, 5.0), v=(1.0, 1.0, 1.0))
    apply_boundaries(p, params)
    assert np.allclose(p.positions[0], (0.3, 9.6, 5.0))
    assert np.allclose(p.velocities[0], (1.0, 1.0, 1.0))


def test_inside_domain_untouched():
    params = SimulationParams(domain_size=(10.0, 10.0, 10.0), cutoff=3.0,
                              boundary=(REFLECTIVE, PERIODIC, REFLECTIVE))
    p = one_particle(x=(3.0, 4.0, 5.0), v=(1.0, -1.0, 0.5))
    apply_boundaries(p, params)
    assert np.allclose(p.positions[0], (3.0, 4.0, 5.0))
    assert np.allclose(p.velocities[0], (1.0, -1.0, 0.5))


@pytest.mark.parametrize("bad", [(-10.5, 5.0, 5.0), (25.0, 5.0, 5.0),
                                 (float("nan"), 5.0, 5.0),
                                 (5.0, 5.0, float("inf"))])
def test_blow_up_detection(bad):
    params = SimulationParams(domain_size=(10.0, 10.0, 10.0), cutoff=3.0,
                              boundary=(PERIODIC,) * 3)
    p = one_particle(x=bad)
    with pytest.raises(BlowUpError):
        apply_boundaries(p, params)


def test_momentum_conserved_over_100_steps():
    rng = np.random.default_rng(9)
    params = SimulationParams(domain_size=(9.0, 9.0, 9.0), cutoff=2.5,
                              boundary=(PERIODIC,) * 3, delta_t=1e-3)
    # Lattice placement avoids overlapping pairs blowing the run up.
    side = np.arange(6) * 1.4 + 0.5
    pos = np.array(np.meshgrid(side, side, side)).reshape(3, -1).T[:120]
    p = ParticleSet(pos + rng.uniform(-0.05, 0.05, pos.shape), types=TYPES)
    p.view("vel")[:] = rng.normal(0.0, 0.5, (p.n, 3))
    p.view("vel")[:] -= p.view("vel").mean(axis=0)

    def update():
        p.view("force")[:] = particle_forces(p, params)[0]

    update()
    for _ in range(100):
        integrate_step(p, params, force_update=update)
    drift = (p.masses[:, None] * p.velocities).sum(axis=0)
    assert np.max(np.abs(drift)) <= 1e-9


def brute_potential(pos, tid, eps, sig, cutoff, domain, periodic):
    pos = np.asarray(pos, float)
    d = pos[:, None, :] - pos[None, :, :]
    L = np.asarray(domain, float)
    for k in range(3):
        if periodic[k]:
            d[..., k] -= L[k] * np.rint(d[..., k] / L[k])
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, np.inf)
    mask = (r2 < cutoff * cutoff) & (r2 > 0.0)
    sig = np.asarray(sig, float)[tid]
    eps = np.asarray(eps, float)[tid]
    smix = 0.5 * (sig[:, None] + sig[None, :])
    emix = np.sqrt(eps[:, None] * eps[None, :])
    s6 = np.where(mask, (smix * smix / np.where(mask, r2, 1.0)) ** 3, 0.0)
    u = 4.0 * emix * (s6 * s6 - s6)
    # Shift so U(cutoff) = 0: the truncated force conserves the shifted
    # potential; the raw one jumps whenever a pair crosses the cutoff.
    s6c = (smix / cutoff) ** 6
    u -= 4.0 * emix * (s6c * s6c - s6c)
    return 0.5 * float(np.where(mask, u, 0.0).sum())


def test_energy_drift_small_timestep():
    params = SimulationParams(domain_size=(9.0, 9.0, 9.0), cutoff=2.5,
                              boundary=(PERIODIC,) * 3, delta_t=1e-4)
    side = np.arange(6) * 1.4 + 0.5
    pos = np.array(np.meshgrid(side, side, side)).reshape(3, -1).T[:120]
    rng = np.random.default_rng(11)
    p = ParticleSet(pos + rng.uniform(-0.05, 0.05, pos.shape), types=TYPES)
    p.view("vel")[:] = rng.normal(0.0, 0.4, (p.n, 3))

    def energy():
        kin = 0.5 * float((p.masses[:, None]
                           * p.velocities ** 2).sum())
        pot = brute_potential(p.positions, p.type_id, p.epsilon, p.sigma,
                              params.cutoff, params.domain_size,
                              params.periodic_flags())
        return kin + pot

    def update():
        p.view("force")[:] = particle_forces(p, params)[0]

    update()
    e0 = energy()
    for _ in range(1000):
        integrate_step(p, params, force_update=update)
    e1 = energy()
    assert abs(e1 - e0) / abs(e0) <= 1e-3
