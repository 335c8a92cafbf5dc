"""Particle containers and parallel traversals.

Linked cells keep a scratch copy of the particles sorted by cell (halo
images appended) and sweep cell pairs with one of the coloured / sliced
schedules; Verlet lists store per-particle neighbour indices built through
a temporary CSF-1 grid and iterate them per particle.

The traversal schedules only decide *which* cell pairs run concurrently;
the pair arithmetic itself lives in the numba kernels.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import kernels
from .cells import (GridGeometry, bin_cell_coords, forward_stencil,
                    halo_images, make_geometry, pruned_stencil)
from .configuration import (C01, C08, C18, LINKED_CELLS, SLI,
                            VERLET_LISTS, Configuration)
from .forces import mixing_tables
from .params import SimulationParams
from .particles import AOS, ParticleSet


@dataclass
class Timings:
    force_ns: int = 0
    build_ns: int = 0


def split_even(n: int, parts: int) -> list[tuple[int, int]]:
    """Split range(n) into up to ``parts`` contiguous, near-equal pieces."""
    parts = max(1, min(parts, n)) if n > 0 else 0
    out = []
    for p in range(parts):
        lo = (n * p) // parts
        hi = (n * (p + 1)) // parts
        if hi > lo:
            out.append((lo, hi))
    return out


class Workforce:
    """Thread pool wrapper; a single worker runs tasks inline."""

    def __init__(self, workers: int = 1):
        self.workers = max(1, int(workers))
        self._pool = (ThreadPoolExecutor(max_workers=self.workers)
                      if self.workers > 1 else None)

    def run(self, tasks):
        if self._pool is None or len(tasks) <= 1:
            return [t() for t in tasks]
        futures = [self._pool.submit(t) for t in tasks]
        return [f.result() for f in futures]

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


# -- shared binning state ----------------------------------------------------

class GridState:
    """Per-geometry binning products shared by every traversal."""

    def __init__(self, geom: GridGeometry):
        self.geom = geom
        self.counts = np.zeros(geom.ncells, dtype=np.int64)
        self.start = np.zeros(geom.ncells, dtype=np.int64)
        self.end = np.zeros(geom.ncells, dtype=np.int64)
        self.src = np.zeros(0, dtype=np.int64)
        self.shift = np.zeros((0, 3))
        self.owned_rows = np.zeros(0, dtype=np.int64)
        self.halo_rows = np.zeros(0, dtype=np.int64)
        self.tid = np.zeros(0, dtype=np.int64)
        self.m = 0

    def rebuild(self, particles: ParticleSet):
        geom = self.geom
        pos = particles.positions
        n = particles.n
        coords = bin_cell_coords(geom, pos)
        h_owner, h_shift, h_cells = halo_images(geom, coords)
        halo_off = np.asarray(geom.halo, dtype=np.int64)
        owned_flat = _flat(geom, coords + halo_off)
        halo_flat = _flat(geom, h_cells + halo_off)
        all_flat = np.concatenate([owned_flat, halo_flat])
        src = np.concatenate([np.arange(n, dtype=np.int64), h_owner])
        shift = np.concatenate([np.zeros((n, 3)), h_shift])
        is_halo = np.concatenate([np.zeros(n, dtype=bool),
                                  np.ones(h_owner.size, dtype=bool)])
        order = np.argsort(all_flat, kind="stable")
        self.m = all_flat.size
        self.src = src[order]
        self.shift = np.ascontiguousarray(shift[order])
        halo_sorted = is_halo[order]
        self.owned_rows = np.nonzero(~halo_sorted)[0]
        self.halo_rows = np.nonzero(halo_sorted)[0]
        self.tid = np.ascontiguousarray(particles.type_id[self.src])
        self.counts[:] = 0
        np.add.at(self.counts, all_flat, 1)
        np.cumsum(self.counts, out=self.end)
        np.subtract(self.end, self.counts, out=self.start)


def _flat(geom: GridGeometry, coords: np.ndarray) -> np.ndarray:
    nx, ny, nz = geom.dims
    return (coords[:, 0] * ny + coords[:, 1]) * nz + coords[:, 2]


class LayoutBuffers:
    """Layout-specific scratch arrays bound to one GridState rebuild."""

    def __init__(self):
        self.pos = np.zeros((0, 3))
        self.force = np.zeros((0, 3))
        self.shift = np.zeros((0, 3))
        self.stamp = -1

    def rebind(self, state: GridState, layout: str, stamp: int):
        m = state.m
        if layout == AOS:
            self.pos = np.zeros((m, 3))
            self.force = np.zeros((m, 3))
            self.shift = state.shift
        else:
            self.pos = np.zeros((3, m))
            self.force = np.zeros((3, m))
            self.shift = np.ascontiguousarray(state.shift.T)
        self.stamp = stamp

    def refresh(self, state: GridState, particles: ParticleSet):
        if particles.layout == AOS:
            np.take(particles.pos, state.src, axis=0, out=self.pos)
            self.pos += self.shift
        else:
            for k in range(3):
                np.take(particles.pos[k], state.src, out=self.pos[k])
            self.pos += self.shift

    def scatter_forces(self, state: GridState, particles: ParticleSet):
        if particles.layout == AOS:
            flog = self.force
            fview = particles.force
            fview[state.src[state.owned_rows]] = flog[state.owned_rows]
            if state.halo_rows.size:
                np.add.at(fview, state.src[state.halo_rows],
                          flog[state.halo_rows])
        else:
            src_own = state.src[state.owned_rows]
            src_halo = state.src[state.halo_rows]
            for k in range(3):
                row = particles.force[k]
                row[src_own] = self.force[k][state.owned_rows]
                if src_halo.size:
                    np.add.at(row, src_halo, self.force[k][state.halo_rows])


# -- traversal schedules -----------------------------------------------------

def c08_colors(geom: GridGeometry):
    """Anchor colour phases; same-colour anchors touch disjoint blocks."""
    sx, sy, sz = (o + 1 for o in geom.overlap)
    return (sx, sy, sz), list(product(range(sx), range(sy), range(sz)))

def c18_colors(geom: GridGeometry):
    """Base-cell colour phases for the forward sweep (x is the major axis)."""
    ox, oy, oz = geom.overlap
    strides = (ox + 1, 2 * oy + 1, 2 * oz + 1)
    return strides, list(product(*(range(s) for s in strides)))


def c08_block_pairs(geom: GridGeometry, anchor, deltas):
    """Cell pairs owned by one anchor (intra first); used for schedule
    audits and small-case checks."""
    ax, ay, az = anchor
    lo = geom.owned_lo()
    hi = geom.owned_hi()
    nx, ny, nz = geom.dims
    pairs = []
    if all(l <= a < h for l, a, h in zip(lo, anchor, hi)):
        pairs.append(((ax, ay, az), (ax, ay, az)))
    for d in deltas:
        c1 = tuple(a - dd if dd < 0 else a for a, dd in zip(anchor, d))
        c2 = tuple(c + dd for c, dd in zip(c1, d))
        if not all(l <= c < h for l, c, h in zip(lo, c1, hi)):
            continue
        if not all(0 <= c < n for c, n in zip(c2, (nx, ny, nz))):
            continue
        pairs.append((c1, c2))
    return pairs


def c18_base_pairs(geom: GridGeometry, base, deltas):
    """Forward cell pairs of one owned base cell (intra first)."""
    nx, ny, nz = geom.dims
    pairs = [(tuple(base), tuple(base))]
    for d in deltas:
        c2 = tuple(b + dd for b, dd in zip(base, d))
        if all(0 <= c < n for c, n in zip(c2, (nx, ny, nz))):
            pairs.append((tuple(base), c2))
    return pairs


class LinkedCellsRunner:
    """Schedules one traversal of a linked-cells grid."""

    def __init__(self, geom: GridGeometry, config: Configuration):
        self.geom = geom
        self.config = config
        self.traversal = config.traversal
        major = 0
        if self.traversal == SLI:
            major = int(np.argmax(geom.dims_owned))
        self.major = major
        if self.traversal == C01:
            self.deltas = np.ascontiguousarray(pruned_stencil(geom))
        else:
            self.deltas = np.ascontiguousarray(forward_stencil(geom, major))
        self.seam_locks: list = []

    def tasks(self, state: GridState, bufs: LayoutBuffers, workers: int):
        """List of barrier groups; tasks inside a group may run in parallel."""
        geom = self.geom
        soa = self.config.layout != AOS
        kern_c08 = kernels.c08_sweep_soa if soa else kernels.c08_sweep_aos
        kern_fwd = kernels.fwd_sweep_soa if soa else kernels.fwd_sweep_aos
        kern_dir = (kernels.directed_sweep_soa if soa
                    else kernels.directed_sweep_aos)
        nx, ny, nz = geom.dims
        (olx, oly, olz) = geom.owned_lo()
        (ohx, ohy, ohz) = geom.owned_hi()
        rc2 = self._rc2
        args = (bufs.pos, bufs.force, state.tid, state.start, state.end,
                self._sig2, self._eps24, rc2)
        n3 = self.config.newton3
        groups = []
        if self.traversal == C08:
            (sx, sy, sz), colors = c08_colors(geom)
            for (px, py, pz) in colors:
                xs = range(px, nx, sx)
                nvals = len(xs)
                group = []
                for lo, hi in split_even(nvals, workers * 2):
                    xb = px + lo * sx
                    xe = px + hi * sx
                    group.append(lambda xb=xb, xe=xe, px=px, py=py, pz=pz:
                                 kern_c08(*args, nx, ny, nz,
                                          olx, oly, olz, ohx, ohy, ohz,
                                          self.deltas, sx, sy, sz,
                                          py, pz, xb, xe, n3))
                if group:
                    groups.append(group)
        elif self.traversal == C18:
            (sx, sy, sz), colors = c18_colors(geom)
            for (px, py, pz) in colors:
                x0 = olx + px
                y0 = oly + py
                z0 = olz + pz
                if x0 >= ohx or y0 >= ohy or z0 >= ohz:
                    continue
                xs = range(x0, ohx, sx)
                group = []
                for lo, hi in split_even(len(xs), workers):
                    xb = x0 + lo * sx
                    xe = x0 + hi * sx
                    group.append(lambda xb=xb, xe=xe, y0=y0, z0=z0:
                                 kern_fwd(*args, nx, ny, nz, self.deltas,
                                          xb, xe, sx, y0, ohy, sy,
                                          z0, ohz, sz, n3))
                if group:
                    groups.append(group)
        elif self.traversal == SLI:
            axis = self.major
            lo3 = [olx, oly, olz]
            hi3 = [ohx, ohy, ohz]
            span = hi3[axis] - lo3[axis]
            slabs = split_even(span, workers)
            seams = [lo3[axis] + s[0] for s in slabs[1:]]
            if len(self.seam_locks) != len(seams):
                self.seam_locks = [threading.Lock() for _ in seams]
            o_axis = geom.overlap[axis]
            locks = list(zip(seams, self.seam_locks))

            def slab_task(lo_s, hi_s):
                def run():
                    total = 0
                    for layer in range(lo3[axis] + lo_s, lo3[axis] + hi_s):
                        need = [lk for b, lk in locks
                                if layer - o_axis + 1 <= b <= layer + o_axis]
                        for lk in need:
                            lk.acquire()
                        try:
                            r = [lo3[0], hi3[0], 1,
                                 lo3[1], hi3[1], 1,
                                 lo3[2], hi3[2], 1]
                            r[axis * 3] = layer
                            r[axis * 3 + 1] = layer + 1
                            total += kern_fwd(*args, nx, ny, nz,
                                              self.deltas, *r, n3)
                        finally:
                            for lk in reversed(need):
                                lk.release()
                    return total
                return run

            groups.append([slab_task(lo_s, hi_s) for lo_s, hi_s in slabs])
        elif self.traversal == C01:
            span = ohx - olx
            group = []
            for lo, hi in split_even(span, workers * 4):
                group.append(lambda lo=lo, hi=hi:
                             kern_dir(*args, nx, ny, nz, self.deltas,
                                      olx + lo, olx + hi, oly, ohy,
                                      olz, ohz))
            groups.append(group)
        else:
            raise ValueError(
                f"{self.traversal} is not a linked-cells traversal")
        return groups

    def bind_tables(self, sig2, eps24, rc2):
        self._sig2 = sig2
        self._eps24 = eps24
        self._rc2 = rc2


class VerletListState:
    """Per-particle neighbour lists plus the temporary build grid."""

    def __init__(self, geom: GridGeometry):
        self.grid = GridState(geom)
        self.deltas = np.ascontiguousarray(pruned_stencil(geom))
        self.nbr = np.zeros(0, dtype=np.int64)
        self.noff = np.zeros(1, dtype=np.int64)

    def rebuild(self, particles: ParticleSet):
        state = self.grid
        state.rebuild(particles)
        pos = np.zeros((state.m, 3))
        np.take(particles.positions, state.src, axis=0, out=pos)
        pos += state.shift
        geom = state.geom
        n = particles.n
        ell2 = geom.interaction_length ** 2
        nx, ny, nz = geom.dims
        (olx, oly, olz) = geom.owned_lo()
        (ohx, ohy, ohz) = geom.owned_hi()
        counts = np.zeros(n, dtype=np.int64)
        kernels.vl_count_pairs(pos, state.src, state.start, state.end,
                               ell2, nx, ny, nz, self.deltas,
                               olx, oly, olz, ohx, ohy, ohz, counts)
        self.noff = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.noff[1:])
        self.nbr = np.zeros(int(self.noff[-1]), dtype=np.int64)
        cursor = self.noff[:-1].copy()
        kernels.vl_fill_pairs(pos, state.src, state.start, state.end,
                              ell2, nx, ny, nz, self.deltas,
                              olx, oly, olz, ohx, ohy, ohz,
                              cursor, self.nbr)


class ForceCalculator:
    """Force evaluation under any enumerated configuration.

    Owns the per-geometry grid states, per-layout scratch buffers and the
    Verlet lists, and writes the resulting forces into the particle set.
    """

    def __init__(self, particles: ParticleSet, params: SimulationParams):
        self.params = params
        self.sig2, self.eps24 = mixing_tables(particles)
        self.rc2 = params.cutoff * params.cutoff
        periodic = params.periodic_flags()
        self._grid_states: dict[float, GridState] = {}
        self._geoms: dict[float, GridGeometry] = {}
        for csf in (1.0, 0.5):
            geom = make_geometry(params.domain_size,
                                 params.interaction_length, csf, periodic)
            self._geoms[csf] = geom
            self._grid_states[csf] = GridState(geom)
        self._buffers: dict[tuple, LayoutBuffers] = {}
        self._runners: dict[str, LinkedCellsRunner] = {}
        self._stamp = 0
        self._vl = VerletListState(self._geoms[1.0])
        self.last_eval_count = 0

    def _runner(self, config: Configuration) -> LinkedCellsRunner:
        key = config.id
        if key not in self._runners:
            r = LinkedCellsRunner(self._geoms[config.cell_size_factor],
                                  config)
            r.bind_tables(self.sig2, self.eps24, self.rc2)
            self._runners[key] = r
        return self._runners[key]

    def rebuild(self, particles: ParticleSet, config: Configuration):
        """Rebuild the container for ``config`` from current positions."""
        self._stamp += 1
        if config.container == VERLET_LISTS:
            self._vl.rebuild(particles)
        else:
            state = self._grid_states[config.cell_size_factor]
            state.rebuild(particles)
            bufs = self._layout_buffers(config)
            bufs.rebind(state, config.layout, self._stamp)

    def _layout_buffers(self, config: Configuration) -> LayoutBuffers:
        key = (config.cell_size_factor, config.layout)
        if key not in self._buffers:
            self._buffers[key] = LayoutBuffers()
        return self._buffers[key]

    def refresh(self, particles: ParticleSet, config: Configuration):
        """Push current positions into the container (halo images included).

        Linked cells re-gather the sorted scratch copy; Verlet lists read
        the particle arrays directly and need no refresh.
        """
        if config.container == VERLET_LISTS:
            return
        state = self._grid_states[config.cell_size_factor]
        bufs = self._layout_buffers(config)
        bufs.refresh(state, particles)

    def compute(self, particles: ParticleSet, config: Configuration,
                workforce: Workforce | None = None) -> int:
        """Evaluate forces into ``particles``; returns the number of
        within-cutoff evaluations performed."""
        if particles.layout != config.layout:
            raise ValueError(
                f"particle layout {particles.layout} does not match "
                f"configuration {config.id}")
        wf = workforce or _INLINE
        if config.container == VERLET_LISTS:
            count = self._compute_vl(particles, wf)
        else:
            count = self._compute_lc(particles, config, wf)
        self.last_eval_count = count
        return count

    def _compute_vl(self, particles: ParticleSet, wf: Workforce) -> int:
        n = particles.n
        particles.force.fill(0.0)
        if n == 0:
            return 0
        kern = (kernels.vl_force_aos if particles.layout == AOS
                else kernels.vl_force_soa)
        lx, ly, lz = (float(d) for d in self.params.domain_size)
        mx, my, mz = (1.0 if p else 0.0
                      for p in self.params.periodic_flags())
        tasks = []
        for lo, hi in split_even(n, wf.workers * 8):
            tasks.append(lambda lo=lo, hi=hi: kern(
                particles.pos, particles.force, particles.type_id,
                self._vl.nbr, self._vl.noff, lo, hi,
                self.sig2, self.eps24, self.rc2, lx, ly, lz, mx, my, mz))
        return int(sum(wf.run(tasks)))

    def _compute_lc(self, particles: ParticleSet, config: Configuration,
                    wf: Workforce) -> int:
        state = self._grid_states[config.cell_size_factor]
        bufs = self._layout_buffers(config)
        bufs.force.fill(0.0)
        particles.force.fill(0.0)
        if particles.n == 0:
            return 0
        runner = self._runner(config)
        total = 0
        for group in runner.tasks(state, bufs, wf.workers):
            total += int(sum(wf.run(group)))
        bufs.scatter_forces(state, particles)
        return total


_INLINE = Workforce(1)


def compute_forces(particles: ParticleSet, config: Configuration,
                   params: SimulationParams, workers: int | None = None,
                   timer=time.perf_counter_ns):
    """One-shot force evaluation: build, refresh, compute.

    Converts the particle set to the configuration's layout if needed and
    returns (Timings, evaluation count); forces end up on the particles.
    """
    calc = ForceCalculator(particles, params)
    particles.convert_layout(config.layout)
    with Workforce(workers or params.thread_count) as wf:
        t0 = timer()
        calc.rebuild(particles, config)
        calc.refresh(particles, config)
        t1 = timer()
        count = calc.compute(particles, config, wf)
        t2 = timer()
    return Timings(force_ns=t2 - t1, build_ns=t1 - t0), count
