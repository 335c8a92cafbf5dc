"""Cell-grid geometry for linked cells: dimensions, stencils and halo layout.

The grid covers the simulation domain with cells of edge at least
CSF * (cutoff + skin), stretched so a whole number of cells exactly fits the
domain.  For CSF < 1 a cell no longer covers the full interaction length, so
the neighbour stencil reaches ``overlap`` cells per axis instead of one.
Periodic axes get ``overlap`` layers of halo cells on each side which hold
shifted copies of boundary particles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np


@dataclass(frozen=True)
class GridGeometry:
    domain: tuple
    interaction_length: float
    csf: float
    periodic: tuple
    dims_owned: tuple          # owned cells per axis
    cell_length: tuple
    overlap: tuple             # stencil reach in cells per axis
    halo: tuple                # halo layers per axis (0 on reflective axes)
    dims: tuple                # dims_owned + 2 * halo

    @property
    def ncells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def flat_index(self, cx, cy, cz):
        nx, ny, nz = self.dims
        return (cx * ny + cy) * nz + cz

    def owned_lo(self) -> tuple:
        return self.halo

    def owned_hi(self) -> tuple:
        return tuple(h + d for h, d in zip(self.halo, self.dims_owned))


def _axis_overlap(ell: float, cell_length: float) -> int:
    o = int(math.floor(ell / cell_length))
    while o * cell_length < ell:
        o += 1
    return max(1, o)


def make_geometry(domain, interaction_length: float, csf: float,
                  periodic) -> GridGeometry:
    domain = tuple(float(d) for d in np.asarray(domain, dtype=np.float64))
    periodic = tuple(bool(p) for p in periodic)
    target = csf * interaction_length
    dims_owned = tuple(max(1, int(math.floor(d / target))) for d in domain)
    cell_length = tuple(d / n for d, n in zip(domain, dims_owned))
    overlap = tuple(_axis_overlap(interaction_length, cl)
                    for cl in cell_length)
    halo = tuple(o if p else 0 for o, p in zip(overlap, periodic))
    dims = tuple(n + 2 * h for n, h in zip(dims_owned, halo))
    return GridGeometry(domain, interaction_length, csf, periodic,
                        dims_owned, cell_length, overlap, halo, dims)


def box_min_distance_sq(delta, cell_length) -> float:
    """Squared minimum distance between two cells offset by ``delta``."""
    s = 0.0
    for d, cl in zip(delta, cell_length):
        gap = (abs(int(d)) - 1) * cl
        if gap > 0.0:
            s += gap * gap
    return s


def pruned_stencil(geom: GridGeometry) -> np.ndarray:
    """All nonzero cell offsets whose minimum distance is within reach.

    Covers distances up to the interaction length; cells farther apart than
    that can never contain interacting particles at the next rebuild.
    """
    ell2 = geom.interaction_length ** 2
    out = []
    ox, oy, oz = geom.overlap
    for d in product(range(-ox, ox + 1), range(-oy, oy + 1),
                     range(-oz, oz + 1)):
        if d == (0, 0, 0):
            continue
        if box_min_distance_sq(d, geom.cell_length) <= ell2:
            out.append(d)
    return np.array(out, dtype=np.int64)


def forward_stencil(geom: GridGeometry, major_axis: int = 0) -> np.ndarray:
    """One representative of each +/- offset pair, oriented forward.

    ``major_axis`` comes first in the lexicographic orientation; traversals
    that sweep along a particular axis (SLI) use it so that cross-cell
    writes only ever point forward along that axis.
    """
    order = [major_axis] + [a for a in range(3) if a != major_axis]
    keep = []
    for d in pruned_stencil(geom):
        key = tuple(int(d[a]) for a in order)
        if key > (0, 0, 0):
            keep.append(tuple(int(x) for x in d))
    return np.array(keep, dtype=np.int64)


def bin_cell_coords(geom: GridGeometry, positions: np.ndarray) -> np.ndarray:
    """Owned-cell coordinate triple per particle, clipped to the grid."""
    cl = np.asarray(geom.cell_length)
    coords = np.floor(positions / cl).astype(np.int64)
    np.clip(coords, 0, np.asarray(geom.dims_owned) - 1, out=coords)
    return coords


def halo_images(geom: GridGeometry, cell_coords: np.ndarray):
    """Indices and shifts of the periodic images that land in halo cells.

    Returns (owner_index, shift_vector, halo_cell_coords) arrays; empty if
    no axis is periodic.
    """
    n = cell_coords.shape[0]
    owners, shifts, cells = [], [], []
    axes = [k for k in range(3) if geom.periodic[k]]
    S = np.asarray(geom.dims_owned)
    H = np.asarray(geom.halo)
    L = np.asarray(geom.domain)
    combos = [c for c in product(*[(-1, 0, 1) if k in axes else (0,)
                                   for k in range(3)])
              if c != (0, 0, 0)]
    for combo in combos:
        mask = np.ones(n, dtype=bool)
        for k, s in enumerate(combo):
            if s > 0:
                mask &= cell_coords[:, k] < H[k]
            elif s < 0:
                mask &= cell_coords[:, k] >= S[k] - H[k]
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            continue
        sv = np.array(combo, dtype=np.float64) * L
        owners.append(idx)
        shifts.append(np.broadcast_to(sv, (idx.size, 3)))
        cells.append(cell_coords[idx] + np.array(combo, dtype=np.int64) * S)
    if not owners:
        return (np.zeros(0, dtype=np.int64), np.zeros((0, 3)),
                np.zeros((0, 3), dtype=np.int64))
    return (np.concatenate(owners),
            np.ascontiguousarray(np.concatenate(shifts)),
            np.concatenate(cells))
