"""Numba force kernels for both data layouts.

All cell-based kernels work on scratch arrays sorted by cell (owned
particles first per cell, halo images appended), addressed through
``start``/``end`` CSR offsets over the padded grid.  AoS kernels take an
(M, 3) position array, SoA kernels a (3, M) array whose rows are the
contiguous x/y/z component arrays.

Every kernel returns the number of within-cutoff force evaluations it
performed.  With Newton-3 a pair counts once; without, each direction is
evaluated (and counted) separately, so the off/on ratio is exactly 2.
"""

from __future__ import annotations

import numpy as np
from numba import int64, njit

_I = "always"


# -- pair interaction blocks (AoS) ------------------------------------------

@njit(inline=_I)
def _pair_n3l_aos(pos, f, tid, sig2, eps24, rc2, s1, e1, s2, e2):
    count = 0
    for i in range(s1, e1):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(s2, e2):
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            dz = zi - pos[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                tj = tid[j]
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
                f[j, 0] -= fs * dx
                f[j, 1] -= fs * dy
                f[j, 2] -= fs * dz
        f[i, 0] += fxi
        f[i, 1] += fyi
        f[i, 2] += fzi
    return count


@njit(inline=_I)
def _pair_no3_aos(pos, f, tid, sig2, eps24, rc2, s1, e1, s2, e2):
    # Newton-3 disabled: each direction is an independent evaluation.
    count = 0
    for i in range(s1, e1):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(s2, e2):
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            dz = zi - pos[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            tj = tid[j]
            if r2 < rc2:
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
            bx = pos[j, 0] - xi
            by = pos[j, 1] - yi
            bz = pos[j, 2] - zi
            q2 = bx * bx + by * by + bz * bz
            if q2 < rc2:
                invb = 1.0 / q2
                b = sig2[tj, ti] * invb
                b6 = b * b * b
                gs = eps24[tj, ti] * (2.0 * b6 * b6 - b6) * invb
                count += 1
                f[j, 0] += gs * bx
                f[j, 1] += gs * by
                f[j, 2] += gs * bz
        f[i, 0] += fxi
        f[i, 1] += fyi
        f[i, 2] += fzi
    return count


@njit(inline=_I)
def _intra_n3l_aos(pos, f, tid, sig2, eps24, rc2, s, e):
    count = 0
    for i in range(s, e):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(i + 1, e):
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            dz = zi - pos[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                tj = tid[j]
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
                f[j, 0] -= fs * dx
                f[j, 1] -= fs * dy
                f[j, 2] -= fs * dz
        f[i, 0] += fxi
        f[i, 1] += fyi
        f[i, 2] += fzi
    return count


@njit(inline=_I)
def _intra_no3_aos(pos, f, tid, sig2, eps24, rc2, s, e):
    count = 0
    for i in range(s, e):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(i + 1, e):
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            dz = zi - pos[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            tj = tid[j]
            if r2 < rc2:
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
            bx = pos[j, 0] - xi
            by = pos[j, 1] - yi
            bz = pos[j, 2] - zi
            q2 = bx * bx + by * by + bz * bz
            if q2 < rc2:
                invb = 1.0 / q2
                b = sig2[tj, ti] * invb
                b6 = b * b * b
                gs = eps24[tj, ti] * (2.0 * b6 * b6 - b6) * invb
                count += 1
                f[j, 0] += gs * bx
                f[j, 1] += gs * by
                f[j, 2] += gs * bz
        f[i, 0] += fxi
        f[i, 1] += fyi
        f[i, 2] += fzi
    return count


# -- pair interaction blocks (SoA) ------------------------------------------

@njit(inline=_I)
def _pair_n3l_soa(pos, f, tid, sig2, eps24, rc2, s1, e1, s2, e2):
    count = 0
    xs = pos[0]
    ys = pos[1]
    zs = pos[2]
    fx = f[0]
    fy = f[1]
    fz = f[2]
    for i in range(s1, e1):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(s2, e2):
            dx = xi - xs[j]
            dy = yi - ys[j]
            dz = zi - zs[j]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                tj = tid[j]
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
                fx[j] -= fs * dx
                fy[j] -= fs * dy
                fz[j] -= fs * dz
        fx[i] += fxi
        fy[i] += fyi
        fz[i] += fzi
    return count


@njit(inline=_I)
def _pair_no3_soa(pos, f, tid, sig2, eps24, rc2, s1, e1, s2, e2):
    count = 0
    xs = pos[0]
    ys = pos[1]
    zs = pos[2]
    fx = f[0]
    fy = f[1]
    fz = f[2]
    for i in range(s1, e1):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(s2, e2):
            dx = xi - xs[j]
            dy = yi - ys[j]
            dz = zi - zs[j]
            r2 = dx * dx + dy * dy + dz * dz
            tj = tid[j]
            if r2 < rc2:
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
            bx = xs[j] - xi
            by = ys[j] - yi
            bz = zs[j] - zi
            q2 = bx * bx + by * by + bz * bz
            if q2 < rc2:
                invb = 1.0 / q2
                b = sig2[tj, ti] * invb
                b6 = b * b * b
                gs = eps24[tj, ti] * (2.0 * b6 * b6 - b6) * invb
                count += 1
                fx[j] += gs * bx
                fy[j] += gs * by
                fz[j] += gs * bz
        fx[i] += fxi
        fy[i] += fyi
        fz[i] += fzi
    return count


@njit(inline=_I)
def _intra_n3l_soa(pos, f, tid, sig2, eps24, rc2, s, e):
    count = 0
    xs = pos[0]
    ys = pos[1]
    zs = pos[2]
    fx = f[0]
    fy = f[1]
    fz = f[2]
    for i in range(s, e):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(i + 1, e):
            dx = xi - xs[j]
            dy = yi - ys[j]
            dz = zi - zs[j]
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                tj = tid[j]
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
                fx[j] -= fs * dx
                fy[j] -= fs * dy
                fz[j] -= fs * dz
        fx[i] += fxi
        fy[i] += fyi
        fz[i] += fzi
    return count


@njit(inline=_I)
def _intra_no3_soa(pos, f, tid, sig2, eps24, rc2, s, e):
    count = 0
    xs = pos[0]
    ys = pos[1]
    zs = pos[2]
    fx = f[0]
    fy = f[1]
    fz = f[2]
    for i in range(s, e):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for j in range(i + 1, e):
            dx = xi - xs[j]
            dy = yi - ys[j]
            dz = zi - zs[j]
            r2 = dx * dx + dy * dy + dz * dz
            tj = tid[j]
            if r2 < rc2:
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
            bx = xs[j] - xi
            by = ys[j] - yi
            bz = zs[j] - zi
            q2 = bx * bx + by * by + bz * bz
            if q2 < rc2:
                invb = 1.0 / q2
                b = sig2[tj, ti] * invb
                b6 = b * b * b
                gs = eps24[tj, ti] * (2.0 * b6 * b6 - b6) * invb
                count += 1
                fx[j] += gs * bx
                fy[j] += gs * by
                fz[j] += gs * bz
        fx[i] += fxi
        fy[i] += fyi
        fz[i] += fzi
    return count


# -- C08: anchored block pairs, coloured by anchor ---------------------------

@njit(nogil=True, cache=True)
def c08_sweep_aos(pos, f, tid, start, end, sig2, eps24, rc2,
                  nx, ny, nz, olx, oly, olz, ohx, ohy, ohz,
                  deltas, sx, sy, sz, py, pz, x_begin, x_end, newton3):
    """One colour's anchors with anchor-x in [x_begin, x_end), step sx.

    Every forward cell-pair is owned by the anchor at the block's low
    corner; same-colour anchors touch disjoint blocks, so chunks of this
    sweep can run concurrently.
    """
    count = 0
    nd = deltas.shape[0]
    for ax in range(x_begin, x_end, sx):
        for ay in range(py, ny, sy):
            for az in range(pz, nz, sz):
                # intra-cell interactions belong to the anchor itself
                if (olx <= ax < ohx and oly <= ay < ohy and olz <= az < ohz):
                    c = (ax * ny + ay) * nz + az
                    s = start[c]
                    e = end[c]
                    if e - s > 1:
                        if newton3:
                            count += _intra_n3l_aos(pos, f, tid, sig2,
                                                    eps24, rc2, s, e)
                        else:
                            count += _intra_no3_aos(pos, f, tid, sig2,
                                                    eps24, rc2, s, e)
                for k in range(nd):
                    dx = deltas[k, 0]
                    dy = deltas[k, 1]
                    dz = deltas[k, 2]
                    # cell pair at (anchor + max(0,-d), anchor + max(0,d))
                    c1x = ax - dx if dx < 0 else ax
                    c1y = ay - dy if dy < 0 else ay
                    c1z = az - dz if dz < 0 else az
                    c2x = c1x + dx
                    c2y = c1y + dy
                    c2z = c1z + dz
                    if not (olx <= c1x < ohx and oly <= c1y < ohy
                            and olz <= c1z < ohz):
                        continue
                    if not (0 <= c2x < nx and 0 <= c2y < ny
                            and 0 <= c2z < nz):
                        continue
                    c1 = (c1x * ny + c1y) * nz + c1z
                    c2 = (c2x * ny + c2y) * nz + c2z
                    s1 = start[c1]
                    e1 = end[c1]
                    if e1 <= s1:
                        continue
                    s2 = start[c2]
                    e2 = end[c2]
                    if e2 <= s2:
                        continue
                    if newton3:
                        count += _pair_n3l_aos(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
                    else:
                        count += _pair_no3_aos(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
    return count


@njit(nogil=True, cache=True)
def c08_sweep_soa(pos, f, tid, start, end, sig2, eps24, rc2,
                  nx, ny, nz, olx, oly, olz, ohx, ohy, ohz,
                  deltas, sx, sy, sz, py, pz, x_begin, x_end, newton3):
    count = 0
    nd = deltas.shape[0]
    for ax in range(x_begin, x_end, sx):
        for ay in range(py, ny, sy):
            for az in range(pz, nz, sz):
                if (olx <= ax < ohx and oly <= ay < ohy and olz <= az < ohz):
                    c = (ax * ny + ay) * nz + az
                    s = start[c]
                    e = end[c]
                    if e - s > 1:
                        if newton3:
                            count += _intra_n3l_soa(pos, f, tid, sig2,
                                                    eps24, rc2, s, e)
                        else:
                            count += _intra_no3_soa(pos, f, tid, sig2,
                                                    eps24, rc2, s, e)
                for k in range(nd):
                    dx = deltas[k, 0]
                    dy = deltas[k, 1]
                    dz = deltas[k, 2]
                    c1x = ax - dx if dx < 0 else ax
                    c1y = ay - dy if dy < 0 else ay
                    c1z = az - dz if dz < 0 else az
                    c2x = c1x + dx
                    c2y = c1y + dy
                    c2z = c1z + dz
                    if not (olx <= c1x < ohx and oly <= c1y < ohy
                            and olz <= c1z < ohz):
                        continue
                    if not (0 <= c2x < nx and 0 <= c2y < ny
                            and 0 <= c2z < nz):
                        continue
                    c1 = (c1x * ny + c1y) * nz + c1z
                    c2 = (c2x * ny + c2y) * nz + c2z
                    s1 = start[c1]
                    e1 = end[c1]
                    if e1 <= s1:
                        continue
                    s2 = start[c2]
                    e2 = end[c2]
                    if e2 <= s2:
                        continue
                    if newton3:
                        count += _pair_n3l_soa(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
                    else:
                        count += _pair_no3_soa(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
    return count


# -- forward base sweep: C18 colours and SLI layers --------------------------

@njit(nogil=True, cache=True)
def fwd_sweep_aos(pos, f, tid, start, end, sig2, eps24, rc2,
                  nx, ny, nz, deltas,
                  x0, x1, sx, y0, y1, sy, z0, z1, sz, newton3):
    """Forward-stencil sweep over base cells on a strided sub-grid.

    Base cells must be owned cells; each base handles its own intra-cell
    interactions plus the forward half of its stencil.
    """
    count = 0
    nd = deltas.shape[0]
    for bx in range(x0, x1, sx):
        for by in range(y0, y1, sy):
            for bz in range(z0, z1, sz):
                c1 = (bx * ny + by) * nz + bz
                s1 = start[c1]
                e1 = end[c1]
                if e1 <= s1:
                    continue
                if e1 - s1 > 1:
                    if newton3:
                        count += _intra_n3l_aos(pos, f, tid, sig2, eps24,
                                                rc2, s1, e1)
                    else:
                        count += _intra_no3_aos(pos, f, tid, sig2, eps24,
                                                rc2, s1, e1)
                for k in range(nd):
                    c2x = bx + deltas[k, 0]
                    c2y = by + deltas[k, 1]
                    c2z = bz + deltas[k, 2]
                    if not (0 <= c2x < nx and 0 <= c2y < ny
                            and 0 <= c2z < nz):
                        continue
                    c2 = (c2x * ny + c2y) * nz + c2z
                    s2 = start[c2]
                    e2 = end[c2]
                    if e2 <= s2:
                        continue
                    if newton3:
                        count += _pair_n3l_aos(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
                    else:
                        count += _pair_no3_aos(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
    return count


@njit(nogil=True, cache=True)
def fwd_sweep_soa(pos, f, tid, start, end, sig2, eps24, rc2,
                  nx, ny, nz, deltas,
                  x0, x1, sx, y0, y1, sy, z0, z1, sz, newton3):
    count = 0
    nd = deltas.shape[0]
    for bx in range(x0, x1, sx):
        for by in range(y0, y1, sy):
            for bz in range(z0, z1, sz):
                c1 = (bx * ny + by) * nz + bz
                s1 = start[c1]
                e1 = end[c1]
                if e1 <= s1:
                    continue
                if e1 - s1 > 1:
                    if newton3:
                        count += _intra_n3l_soa(pos, f, tid, sig2, eps24,
                                                rc2, s1, e1)
                    else:
                        count += _intra_no3_soa(pos, f, tid, sig2, eps24,
                                                rc2, s1, e1)
                for k in range(nd):
                    c2x = bx + deltas[k, 0]
                    c2y = by + deltas[k, 1]
                    c2z = bz + deltas[k, 2]
                    if not (0 <= c2x < nx and 0 <= c2y < ny
                            and 0 <= c2z < nz):
                        continue
                    c2 = (c2x * ny + c2y) * nz + c2z
                    s2 = start[c2]
                    e2 = end[c2]
                    if e2 <= s2:
                        continue
                    if newton3:
                        count += _pair_n3l_soa(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
                    else:
                        count += _pair_no3_soa(pos, f, tid, sig2, eps24,
                                               rc2, s1, e1, s2, e2)
    return count


# -- C01: directed sweep, writes only into the base cell ---------------------

@njit(nogil=True, cache=True)
def directed_sweep_aos(pos, f, tid, start, end, sig2, eps24, rc2,
                       nx, ny, nz, deltas, x0, x1, y0, y1, z0, z1):
    """Full-stencil directed sweep: every base particle accumulates its
    complete force; nothing outside the base cell is written."""
    count = 0
    nd = deltas.shape[0]
    for bx in range(x0, x1):
        for by in range(y0, y1):
            for bz in range(z0, z1):
                c1 = (bx * ny + by) * nz + bz
                s1 = start[c1]
                e1 = end[c1]
                if e1 <= s1:
                    continue
                for i in range(s1, e1):
                    xi = pos[i, 0]
                    yi = pos[i, 1]
                    zi = pos[i, 2]
                    ti = tid[i]
                    fxi = 0.0
                    fyi = 0.0
                    fzi = 0.0
                    for j in range(s1, e1):
                        if j == i:
                            continue
                        dx = xi - pos[j, 0]
                        dy = yi - pos[j, 1]
                        dz = zi - pos[j, 2]
                        r2 = dx * dx + dy * dy + dz * dz
                        if r2 < rc2:
                            tj = tid[j]
                            inv = 1.0 / r2
                            a = sig2[ti, tj] * inv
                            a6 = a * a * a
                            fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                            count += 1
                            fxi += fs * dx
                            fyi += fs * dy
                            fzi += fs * dz
                    for k in range(nd):
                        c2x = bx + deltas[k, 0]
                        c2y = by + deltas[k, 1]
                        c2z = bz + deltas[k, 2]
                        if not (0 <= c2x < nx and 0 <= c2y < ny
                                and 0 <= c2z < nz):
                            continue
                        c2 = (c2x * ny + c2y) * nz + c2z
                        for j in range(start[c2], end[c2]):
                            dx = xi - pos[j, 0]
                            dy = yi - pos[j, 1]
                            dz = zi - pos[j, 2]
                            r2 = dx * dx + dy * dy + dz * dz
                            if r2 < rc2:
                                tj = tid[j]
                                inv = 1.0 / r2
                                a = sig2[ti, tj] * inv
                                a6 = a * a * a
                                fs = eps24[ti, tj] * (2.0 * a6 * a6
                                                      - a6) * inv
                                count += 1
                                fxi += fs * dx
                                fyi += fs * dy
                                fzi += fs * dz
                    f[i, 0] += fxi
                    f[i, 1] += fyi
                    f[i, 2] += fzi
    return count


@njit(nogil=True, cache=True)
def directed_sweep_soa(pos, f, tid, start, end, sig2, eps24, rc2,
                       nx, ny, nz, deltas, x0, x1, y0, y1, z0, z1):
    count = 0
    nd = deltas.shape[0]
    xs = pos[0]
    ys = pos[1]
    zs = pos[2]
    fx = f[0]
    fy = f[1]
    fz = f[2]
    for bx in range(x0, x1):
        for by in range(y0, y1):
            for bz in range(z0, z1):
                c1 = (bx * ny + by) * nz + bz
                s1 = start[c1]
                e1 = end[c1]
                if e1 <= s1:
                    continue
                for i in range(s1, e1):
                    xi = xs[i]
                    yi = ys[i]
                    zi = zs[i]
                    ti = tid[i]
                    fxi = 0.0
                    fyi = 0.0
                    fzi = 0.0
                    for j in range(s1, e1):
                        if j == i:
                            continue
                        dx = xi - xs[j]
                        dy = yi - ys[j]
                        dz = zi - zs[j]
                        r2 = dx * dx + dy * dy + dz * dz
                        if r2 < rc2:
                            tj = tid[j]
                            inv = 1.0 / r2
                            a = sig2[ti, tj] * inv
                            a6 = a * a * a
                            fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                            count += 1
                            fxi += fs * dx
                            fyi += fs * dy
                            fzi += fs * dz
                    for k in range(nd):
                        c2x = bx + deltas[k, 0]
                        c2y = by + deltas[k, 1]
                        c2z = bz + deltas[k, 2]
                        if not (0 <= c2x < nx and 0 <= c2y < ny
                                and 0 <= c2z < nz):
                            continue
                        c2 = (c2x * ny + c2y) * nz + c2z
                        for j in range(start[c2], end[c2]):
                            dx = xi - xs[j]
                            dy = yi - ys[j]
                            dz = zi - zs[j]
                            r2 = dx * dx + dy * dy + dz * dz
                            if r2 < rc2:
                                tj = tid[j]
                                inv = 1.0 / r2
                                a = sig2[ti, tj] * inv
                                a6 = a * a * a
                                fs = eps24[ti, tj] * (2.0 * a6 * a6
                                                      - a6) * inv
                                count += 1
                                fxi += fs * dx
                                fyi += fs * dy
                                fzi += fs * dz
                    fx[i] += fxi
                    fy[i] += fyi
                    fz[i] += fzi
    return count


# -- Verlet lists ------------------------------------------------------------

@njit(nogil=True, cache=True)
def vl_force_aos(pos, f, tid, nbr, noff, i_begin, i_end, sig2, eps24, rc2,
                 lx, ly, lz, mx, my, mz):
    """Per-particle neighbour-list forces on the particle arrays directly.

    Periodic axes (mask m* = 1.0) use the minimum-image convention so the
    lists can store plain owner indices.
    """
    count = 0
    inv_lx = 1.0 / lx
    inv_ly = 1.0 / ly
    inv_lz = 1.0 / lz
    for i in range(i_begin, i_end):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for k in range(noff[i], noff[i + 1]):
            j = nbr[k]
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            dz = zi - pos[j, 2]
            dx -= mx * lx * np.rint(dx * inv_lx)
            dy -= my * ly * np.rint(dy * inv_ly)
            dz -= mz * lz * np.rint(dz * inv_lz)
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                tj = tid[j]
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
        f[i, 0] += fxi
        f[i, 1] += fyi
        f[i, 2] += fzi
    return count


@njit(nogil=True, cache=True)
def vl_force_soa(pos, f, tid, nbr, noff, i_begin, i_end, sig2, eps24, rc2,
                 lx, ly, lz, mx, my, mz):
    count = 0
    inv_lx = 1.0 / lx
    inv_ly = 1.0 / ly
    inv_lz = 1.0 / lz
    xs = pos[0]
    ys = pos[1]
    zs = pos[2]
    fx = f[0]
    fy = f[1]
    fz = f[2]
    for i in range(i_begin, i_end):
        xi = xs[i]
        yi = ys[i]
        zi = zs[i]
        ti = tid[i]
        fxi = 0.0
        fyi = 0.0
        fzi = 0.0
        for k in range(noff[i], noff[i + 1]):
            j = nbr[k]
            dx = xi - xs[j]
            dy = yi - ys[j]
            dz = zi - zs[j]
            dx -= mx * lx * np.rint(dx * inv_lx)
            dy -= my * ly * np.rint(dy * inv_ly)
            dz -= mz * lz * np.rint(dz * inv_lz)
            r2 = dx * dx + dy * dy + dz * dz
            if r2 < rc2:
                tj = tid[j]
                inv = 1.0 / r2
                a = sig2[ti, tj] * inv
                a6 = a * a * a
                fs = eps24[ti, tj] * (2.0 * a6 * a6 - a6) * inv
                count += 1
                fxi += fs * dx
                fyi += fs * dy
                fzi += fs * dz
        fx[i] += fxi
        fy[i] += fyi
        fz[i] += fzi
    return count


# -- Verlet-list construction over a temporary cell grid ---------------------

@njit(nogil=True, cache=True)
def vl_count_pairs(pos, owner, start, end, ell2, nx, ny, nz, deltas,
                   olx, oly, olz, ohx, ohy, ohz, counts):
    """First CSR pass: per-owner neighbour counts via a directed sweep."""
    nd = deltas.shape[0]
    for bx in range(olx, ohx):
        for by in range(oly, ohy):
            for bz in range(olz, ohz):
                c1 = (bx * ny + by) * nz + bz
                s1 = start[c1]
                e1 = end[c1]
                if e1 <= s1:
                    continue
                for i in range(s1, e1):
                    xi = pos[i, 0]
                    yi = pos[i, 1]
                    zi = pos[i, 2]
                    oi = owner[i]
                    c = 0
                    for j in range(s1, e1):
                        if j == i:
                            continue
                        dx = xi - pos[j, 0]
                        dy = yi - pos[j, 1]
                        dz = zi - pos[j, 2]
                        if dx * dx + dy * dy + dz * dz <= ell2:
                            c += 1
                    for k in range(nd):
                        c2x = bx + deltas[k, 0]
                        c2y = by + deltas[k, 1]
                        c2z = bz + deltas[k, 2]
                        if not (0 <= c2x < nx and 0 <= c2y < ny
                                and 0 <= c2z < nz):
                            continue
                        c2 = (c2x * ny + c2y) * nz + c2z
                        for j in range(start[c2], end[c2]):
                            dx = xi - pos[j, 0]
                            dy = yi - pos[j, 1]
                            dz = zi - pos[j, 2]
                            if dx * dx + dy * dy + dz * dz <= ell2:
                                c += 1
                    counts[oi] += c


@njit(nogil=True, cache=True)
def vl_fill_pairs(pos, owner, start, end, ell2, nx, ny, nz, deltas,
                  olx, oly, olz, ohx, ohy, ohz, cursor, nbr):
    """Second CSR pass: write neighbour owner indices."""
    nd = deltas.shape[0]
    for bx in range(olx, ohx):
        for by in range(oly, ohy):
            for bz in range(olz, ohz):
                c1 = (bx * ny + by) * nz + bz
                s1 = start[c1]
                e1 = end[c1]
                if e1 <= s1:
                    continue
                for i in range(s1, e1):
                    xi = pos[i, 0]
                    yi = pos[i, 1]
                    zi = pos[i, 2]
                    oi = owner[i]
                    cur = cursor[oi]
                    for j in range(s1, e1):
                        if j == i:
                            continue
                        dx = xi - pos[j, 0]
                        dy = yi - pos[j, 1]
                        dz = zi - pos[j, 2]
                        if dx * dx + dy * dy + dz * dz <= ell2:
                            nbr[cur] = owner[j]
                            cur += 1
                    for k in range(nd):
                        c2x = bx + deltas[k, 0]
                        c2y = by + deltas[k, 1]
                        c2z = bz + deltas[k, 2]
                        if not (0 <= c2x < nx and 0 <= c2y < ny
                                and 0 <= c2z < nz):
                            continue
                        c2 = (c2x * ny + c2y) * nz + c2z
                        for j in range(start[c2], end[c2]):
                            dx = xi - pos[j, 0]
                            dy = yi - pos[j, 1]
                            dz = zi - pos[j, 2]
                            if dx * dx + dy * dy + dz * dz <= ell2:
                                nbr[cur] = owner[j]
                                cur += 1
                    cursor[oi] = cur
