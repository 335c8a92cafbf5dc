"""Velocity-Verlet integration, thermostat and boundary handling.

Reduced units throughout (k_B = 1). Gravity, when enabled, is a constant
acceleration along z added to the pair forces as m*g per particle.
"""

from __future__ import annotations

import numpy as np

from .params import PERIODIC, REFLECTIVE, SimulationParams
from .particles import ParticleSet


class BlowUpError(RuntimeError):
    """A particle left the domain by more than one domain length."""


def kick(particles: ParticleSet, delta_t: float):
    """Half velocity update: v += F/(2m)·δt."""
    f = particles.view("force")
    v = particles.view("vel")
    v += f * (0.5 * delta_t / particles.masses)[:, None]


def drift(particles: ParticleSet, delta_t: float):
    """Position update with the half-kicked velocities: x += v·δt."""
    particles.view("pos")[:] += particles.view("vel") * delta_t


def drift_with_force(particles: ParticleSet, delta_t: float):
    """Position update from unkicked velocities:
    x += v·δt + F/(2m)·δt²."""
    pos = particles.view("pos")
    pos += particles.view("vel") * delta_t
    pos += particles.view("force") * (
        0.5 * delta_t * delta_t / particles.masses)[:, None]


def finish_kick(particles: ParticleSet, delta_t: float):
    """Velocity update closing the step: v += (F_old + F_new)/(2m)·δt."""
    v = particles.view("vel")
    combined = particles.view("force") + particles.view("old_force")
    v += combined * (0.5 * delta_t / particles.masses)[:, None]


def apply_gravity(particles: ParticleSet, gravity: float | None):
    if gravity is None or particles.n == 0:
        return
    fz = particles.view("force")[:, 2]
    fz += particles.masses * gravity


def integrate_step(particles: ParticleSet, params: SimulationParams,
                   force_update=None) -> ParticleSet:
    """One velocity-Verlet step in kick-drift-kick form.

    ``particles.force`` must hold the complete current force (gravity
    included, see apply_gravity). ``force_update()`` recomputes it from
    the drifted positions; when omitted the force is held constant across
    the step (useful for constant-force checks). Equivalent to
    x += v·δt + F/(2m)·δt² followed by v += (F_old + F_new)/(2m)·δt.
    """
    kick(particles, params.delta_t)
    drift(particles, params.delta_t)
    if force_update is not None:
        force_update()
    kick(particles, params.delta_t)
    return particles


def current_temperature(particles: ParticleSet) -> float:
    """T = Σ mᵢ|vᵢ|² / (3N)."""
    if particles.n == 0:
        raise ValueError("temperature of an empty particle set is undefined")
    v = particles.view("vel")
    return float(np.sum(particles.masses * np.sum(v * v, axis=1))
                 / (3.0 * particles.n))


def apply_thermostat(particles: ParticleSet, target: float,
                     max_delta_t: float) -> ParticleSet:
    """Velocity rescaling toward ``target``, limited to ``max_delta_t``
    per application."""
    t_cur = current_temperature(particles)
    if t_cur == 0.0:
        if target > 0.0:
            raise ValueError(
                "thermostat cannot scale zero velocities toward a "
                "positive target temperature")
        return particles
    delta = np.clip(target - t_cur, -max_delta_t, max_delta_t)
    t_next = t_cur + delta
    particles.view("vel")[:] *= np.sqrt(t_next / t_cur)
    return particles


def apply_boundaries(particles: ParticleSet,
                     params: SimulationParams) -> ParticleSet:
    """Reflect or wrap particles that left the domain.

    Raises BlowUpError when any coordinate is more than one domain length
    outside (also catches NaN positions).
    """
    if particles.n == 0:
        return particles
    pos = particles.view("pos")
    vel = particles.view("vel")
    for axis in range(3):
        length = params.domain_size[axis]
        x = pos[:, axis]
        inside = (x >= -length) & (x <= 2.0 * length)
        if not bool(np.all(inside)):
            raise BlowUpError(
                f"particle left the domain by more than one domain length "
                f"on axis {axis} (or position is not finite)")
        if params.boundary[axis] == PERIODIC:
            np.mod(x, length, out=x)
        else:
            low = x < 0.0
            high = x > length
            if np.any(low):
                x[low] = -x[low]
                vel[low, axis] = -vel[low, axis]
            if np.any(high):
                x[high] = 2.0 * length - x[high]
                vel[high, axis] = -vel[high, axis]
    return particles
