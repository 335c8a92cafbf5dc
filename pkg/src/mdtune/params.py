"""Simulation-wide parameters shared by the integrator, containers and tuner."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REFLECTIVE = "reflective"
PERIODIC = "periodic"


@dataclass
class ThermostatParams:
    """Velocity-scaling thermostat settings.

    ``max_delta_t`` bounds how far the temperature may move toward
    ``target_temperature`` per application; the thermostat fires every
    ``interval_iterations`` iterations.
    """

    target_temperature: float
    max_delta_t: float
    interval_iterations: int

    def __post_init__(self):
        if self.target_temperature < 0:
            raise ValueError("target temperature must be >= 0")
        if self.max_delta_t <= 0:
            raise ValueError("maxDeltaT must be > 0")
        if self.interval_iterations < 1:
            raise ValueError("thermostat interval must be >= 1")


@dataclass
class SimulationParams:
    """Parameters of one simulation run (reduced units, k_B = 1).

    ``boundary`` is a per-axis triple of "reflective" / "periodic".
    ``gravity`` is a constant z-acceleration added to every particle
    (negative = downward).
    """

    domain_size: np.ndarray
    cutoff: float
    skin: float = 0.0
    rebuild_interval: int = 1
    delta_t: float = 1e-3
    total_iterations: int = 0
    boundary: tuple = (REFLECTIVE, REFLECTIVE, REFLECTIVE)
    gravity: float | None = None
    thermostat: ThermostatParams | None = None
    thread_count: int = 1

    def __post_init__(self):
        self.domain_size = np.asarray(self.domain_size, dtype=np.float64)
        if self.domain_size.shape != (3,):
            raise ValueError("domain size must be a 3-vector")
        if self.cutoff <= 0:
            raise ValueError("cutoff must be > 0")
        if self.skin < 0:
            raise ValueError("skin must be >= 0")
        if self.rebuild_interval < 1:
            raise ValueError("rebuild interval must be >= 1")
        if self.delta_t <= 0:
            raise ValueError("deltaT must be > 0")
        if self.total_iterations < 0:
            raise ValueError("total iterations must be >= 0")
        if len(self.boundary) != 3:
            raise ValueError("boundary must name one condition per axis")
        self.boundary = tuple(self.boundary)
        for b in self.boundary:
            if b not in (REFLECTIVE, PERIODIC):
                raise ValueError(f"unknown boundary condition {b!r}")
        if self.thread_count < 1:
            raise ValueError("thread count must be >= 1")
        ell = self.cutoff + self.skin
        if np.any(self.domain_size < ell):
            raise ValueError(
                "domain size must be at least cutoff + skin in every dimension"
            )
        # Periodic axes need room for one image on each side; otherwise a
        # particle could interact with two images of the same partner at once.
        for k in range(3):
            if self.boundary[k] == PERIODIC and self.domain_size[k] < 2.0 * ell:
                raise ValueError(
                    "periodic axes require domain >= 2*(cutoff + skin); "
                    f"axis {k} has {self.domain_size[k]} < {2.0 * ell}"
                )
        if self.gravity is not None:
            self.gravity = float(self.gravity)

    @property
    def interaction_length(self) -> float:
        """Cutoff plus skin: the radius neighbor structures must cover."""
        return self.cutoff + self.skin

    def periodic_flags(self) -> np.ndarray:
        return np.array(
            [b == PERIODIC for b in self.boundary], dtype=np.bool_
        )
