"""Particle storage in either AoS or SoA layout, plus per-type LJ parameters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AOS = "AoS"
SOA = "SoA"


@dataclass(frozen=True)
class ParticleTypeInfo:
    """Lennard-Jones species parameters in reduced units."""

    type_id: int
    epsilon: float
    sigma: float
    mass: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.mass <= 0:
            raise ValueError("mass must be > 0")


class ParticleSet:
    """Positions, velocities, forces and types of N molecules.

    In AoS layout every per-particle attribute is an (N, 3) C-contiguous
    array (one interleaved record per particle); in SoA layout it is a
    (3, N) C-contiguous array, so each component (x, y, z) is stored
    contiguously.  Conversion between the two is an exact transpose-copy.
    """

    def __init__(self, positions, velocities=None, type_ids=None, types=None,
                 layout=AOS):
        pos = np.asarray(positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must be (N, 3)")
        n = pos.shape[0]
        vel = (np.zeros((n, 3)) if velocities is None
               else np.asarray(velocities, dtype=np.float64))
        if vel.shape != (n, 3):
            raise ValueError("velocities must match positions")
        tid = (np.zeros(n, dtype=np.int64) if type_ids is None
               else np.asarray(type_ids, dtype=np.int64))
        if tid.shape != (n,):
            raise ValueError("type ids must be (N,)")
        if types is None:
            types = [ParticleTypeInfo(0, 1.0, 1.0, 1.0)]
        self.types = list(types)
        by_id = {t.type_id: t for t in self.types}
        if len(by_id) != len(self.types):
            raise ValueError("duplicate type ids")
        if n and not set(np.unique(tid)).issubset(by_id):
            raise ValueError("particle references unknown type id")
        ntypes = max(by_id) + 1 if by_id else 1
        self.epsilon = np.zeros(ntypes)
        self.sigma = np.zeros(ntypes)
        self.mass = np.ones(ntypes)
        for t in self.types:
            self.epsilon[t.type_id] = t.epsilon
            self.sigma[t.type_id] = t.sigma
            self.mass[t.type_id] = t.mass

        self.layout = AOS
        self.pos = np.ascontiguousarray(pos)
        self.vel = np.ascontiguousarray(vel)
        self.force = np.zeros((n, 3))
        self.old_force = np.zeros((n, 3))
        self.type_id = np.ascontiguousarray(tid)
        if layout == SOA:
            self.convert_layout(SOA)
        elif layout != AOS:
            raise ValueError(f"unknown layout {layout!r}")

    @property
    def n(self) -> int:
        return self.type_id.shape[0]

    # -- layout handling ---------------------------------------------------

    def convert_layout(self, target: str) -> "ParticleSet":
        """Switch the physical storage layout in place; logical content is
        unchanged.  Converting to the current layout is a no-op."""
        if target not in (AOS, SOA):
            raise ValueError(f"unknown layout {target!r}")
        if target == self.layout:
            return self
        for name in ("pos", "vel", "force", "old_force"):
            setattr(self, name, np.ascontiguousarray(getattr(self, name).T))
        self.layout = target
        return self

    def view(self, name: str) -> np.ndarray:
        """(N, 3) view of an attribute regardless of layout.

        For SoA storage this is a transposed view; writes go through to the
        underlying arrays in both layouts.
        """
        arr = getattr(self, name)
        return arr if self.layout == AOS else arr.T

    @property
    def positions(self) -> np.ndarray:
        return self.view("pos")

    @property
    def velocities(self) -> np.ndarray:
        return self.view("vel")

    @property
    def forces(self) -> np.ndarray:
        return self.view("force")

    @property
    def old_forces(self) -> np.ndarray:
        return self.view("old_force")

    @property
    def masses(self) -> np.ndarray:
        """Per-particle mass, (N,)."""
        return self.mass[self.type_id]

    def copy(self) -> "ParticleSet":
        out = ParticleSet.__new__(ParticleSet)
        out.types = list(self.types)
        out.epsilon = self.epsilon.copy()
        out.sigma = self.sigma.copy()
        out.mass = self.mass.copy()
        out.layout = self.layout
        for name in ("pos", "vel", "force", "old_force", "type_id"):
            setattr(out, name, getattr(self, name).copy())
        return out
