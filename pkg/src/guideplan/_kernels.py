"""Compiled inner loops: portable RNG, segment collision tests, tree growth.

Everything here is numba-jitted and operates on plain ndarrays so the
planners stay deterministic and fast without holding the GIL. The RNG is
a fixed xorshift128+ generator seeded through splitmix64, so identical
seeds reproduce identical streams on any platform; doubles are built from
the top 53 bits. Python-facing wrappers live in the sibling modules.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# splitmix64 / xorshift128+ constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S23 = np.uint64(23)
_S17 = np.uint64(17)
_S26 = np.uint64(26)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, nogil=True)
def rng_state(seed):
    """Expand a 64-bit seed into xorshift128+ state via splitmix64."""
    s = np.empty(2, dtype=np.uint64)
    z = np.uint64(seed)
    for i in range(2):
        z = z + _GOLDEN
        x = z
        x = (x ^ (x >> _S30)) * _MIX_A
        x = (x ^ (x >> _S27)) * _MIX_B
        x = x ^ (x >> _S31)
        s[i] = x
    if s[0] == np.uint64(0) and s[1] == np.uint64(0):
        s[0] = _GOLDEN  # all-zero state would be a fixed point
    return s


@njit(cache=True, nogil=True, inline="always")
def rng_u64(s):
    x = s[0]
    y = s[1]
    s[0] = y
    x = x ^ (x << _S23)
    x = x ^ (x >> _S17)
    x = x ^ y ^ (y >> _S26)
    s[1] = x
    return x + y


@njit(cache=True, nogil=True, inline="always")
def rng_uniform(s):
    """Uniform double in [0, 1) from the top 53 bits."""
    return float(rng_u64(s) >> _S11) * _INV53


@njit(cache=True, nogil=True, inline="always")
def segment_free(occ, h, w, ax, ay, bx, by, interval):
    """Supersampled collision test for the segment a-b.

    Samples n = ceil(len/interval) + 1 evenly spaced points (at least the
    two endpoints) and requires every sampled point to land in a free
    cell. A state (x, y) occupies cell (floor(x), floor(y)). Endpoints
    are put in a canonical order first so the test is exactly symmetric.
    """
    if bx < ax or (bx == ax and by < ay):
        tx = ax
        ax = bx
        bx = tx
        ty = ay
        ay = by
        by = ty
    dx = bx - ax
    dy = by - ay
    dist = math.sqrt(dx * dx + dy * dy)
    n = int(math.ceil(dist / interval)) + 1
    if n < 2:
        n = 2
    nm1 = float(n - 1)
    for i in range(n):
        t = float(i) / nm1
        x = ax + t * dx
        y = ay + t * dy
        cx = int(math.floor(x))
        cy = int(math.floor(y))
        # endpoint arithmetic can brush the open boundary by one ulp
        if cx >= w:
            cx = w - 1
        if cy >= h:
            cy = h - 1
        if cx < 0:
            cx = 0
        if cy < 0:
            cy = 0
        if occ[cy, cx]:
            return False
    return True


@njit(cache=True, nogil=True, inline="always")
def _draw_state(s, wf, hf, has_g, bias, cdf, total, grid_w):
    """One hybrid draw: guided cell pick with probability `bias`, else uniform."""
    if has_g and rng_uniform(s) < bias:
        u = rng_uniform(s) * total
        lo = 0
        hi = cdf.shape[0] - 1
        while lo < hi:  # first index with cdf[idx] > u
            mid = (lo + hi) >> 1
            if cdf[mid] > u:
                hi = mid
            else:
                lo = mid + 1
        cy = lo // grid_w
        cx = lo - cy * grid_w
        return float(cx) + rng_uniform(s), float(cy) + rng_uniform(s)
    return rng_uniform(s) * wf, rng_uniform(s) * hf


@njit(cache=True, nogil=True)
def sample_states(seed, count, wf, hf, has_g, bias, cdf, total, grid_w):
    """Draw `count` states into an array (test and demo helper)."""
    out = np.empty((count, 2), dtype=np.float64)
    s = rng_state(seed)
    for i in range(count):
        x, y = _draw_state(s, wf, hf, has_g, bias, cdf, total, grid_w)
        out[i, 0] = x
        out[i, 1] = y
    return out


@njit(cache=True, nogil=True)
def plan_rrt(occ, sx, sy, gx, gy, goal_r, step, bias, max_iter, seed,
             has_g, cdf, total, interval):
    """Grow a plain RRT; stop at the first node inside the goal disc.

    Returns (nodes, parent, cost, n, goal_idx, iters, draws, disc_draws)
    where disc_draws is the number of samples drawn up to and including
    the one that produced the goal-reaching node (-1 if none).
    """
    h, w = occ.shape
    wf = float(w)
    hf = float(h)
    cap = max_iter + 1
    nodes = np.empty((cap, 2), dtype=np.float64)
    parent = np.full(cap, -1, dtype=np.int64)
    cost = np.zeros(cap, dtype=np.float64)
    nodes[0, 0] = sx
    nodes[0, 1] = sy
    n = 1
    goal_idx = -1
    draws = 0
    disc = -1
    iters = 0
    dgx = sx - gx
    dgy = sy - gy
    if math.sqrt(dgx * dgx + dgy * dgy) <= goal_r:
        goal_idx = 0
        disc = 0
        return nodes, parent, cost, n, goal_idx, iters, draws, disc
    s = rng_state(seed)
    for it in range(1, max_iter + 1):
        iters = it
        x, y = _draw_state(s, wf, hf, has_g, bias, cdf, total, w)
        draws += 1
        best = 0
        bd = (nodes[0, 0] - x) ** 2 + (nodes[0, 1] - y) ** 2
        for i in range(1, n):
            d2 = (nodes[i, 0] - x) ** 2 + (nodes[i, 1] - y) ** 2
            if d2 < bd:
                bd = d2
                best = i
        d = math.sqrt(bd)
        if d <= step:
            nx = x
            ny = y
        else:
            f = step / d
            nx = nodes[best, 0] + (x - nodes[best, 0]) * f
            ny = nodes[best, 1] + (y - nodes[best, 1]) * f
            d = step
        if d == 0.0:
            continue  # duplicate of the nearest node adds nothing
        if not segment_free(occ, h, w, nodes[best, 0], nodes[best, 1], nx, ny, interval):
            continue
        nodes[n, 0] = nx
        nodes[n, 1] = ny
        parent[n] = best
        dx = nx - nodes[best, 0]
        dy = ny - nodes[best, 1]
        cost[n] = cost[best] + math.sqrt(dx * dx + dy * dy)
        dgx = nx - gx
        dgy = ny - gy
        reached = math.sqrt(dgx * dgx + dgy * dgy) <= goal_r
        n += 1
        if reached:
            goal_idx = n - 1
            disc = draws
            break
    return nodes, parent, cost, n, goal_idx, iters, draws, disc


@njit(cache=True, nogil=True, inline="always")
def _attach(i, p, parent, first_child, next_sib, prev_sib):
    c = first_child[p]
    next_sib[i] = c
    if c >= 0:
        prev_sib[c] = i
    prev_sib[i] = -1
    first_child[p] = i
    parent[i] = p


@njit(cache=True, nogil=True, inline="always")
def _detach(i, parent, first_child, next_sib, prev_sib):
    p = parent[i]
    if p < 0:
        return
    if prev_sib[i] >= 0:
        next_sib[prev_sib[i]] = next_sib[i]
    else:
        first_child[p] = next_sib[i]
    if next_sib[i] >= 0:
        prev_sib[next_sib[i]] = prev_sib[i]
    next_sib[i] = -1
    prev_sib[i] = -1
    parent[i] = -1


@njit(cache=True, nogil=True)
def plan_rrt_star(occ, sx, sy, gx, gy, goal_r, step, bias, max_iter, seed,
                  has_g, cdf, total, interval, rewire_scale, snap_every):
    """Grow an RRT* for the full budget with rewiring and cost propagation.

    Neighbourhood radius shrinks as
        r = min(rewire_scale * sqrt(log(n+1)/(n+1)) * sqrt(w*h), 4*step).
    Snapshots of the best goal cost (inf before a solution) are taken
    every `snap_every` iterations. Returns
    (nodes, parent, cost, n, goal_idx, iters, draws, disc_draws,
     snapshots, snap_count).
    """
    h, w = occ.shape
    wf = float(w)
    hf = float(h)
    cap = max_iter + 1
    nodes = np.empty((cap, 2), dtype=np.float64)
    parent = np.full(cap, -1, dtype=np.int64)
    cost = np.zeros(cap, dtype=np.float64)
    first_child = np.full(cap, -1, dtype=np.int64)
    next_sib = np.full(cap, -1, dtype=np.int64)
    prev_sib = np.full(cap, -1, dtype=np.int64)
    goal_list = np.empty(cap, dtype=np.int64)
    stack = np.empty(cap, dtype=np.int64)
    n_snaps = max_iter // snap_every + 1
    snapshots = np.empty(n_snaps, dtype=np.float64)
    snap_count = 0
    gcount = 0
    nodes[0, 0] = sx
    nodes[0, 1] = sy
    n = 1
    draws = 0
    disc = -1
    iters = 0
    area_term = math.sqrt(wf * hf)
    dgx = sx - gx
    dgy = sy - gy
    if math.sqrt(dgx * dgx + dgy * dgy) <= goal_r:
        goal_list[0] = 0
        gcount = 1
        disc = 0
    s = rng_state(seed)
    for it in range(1, max_iter + 1):
        iters = it
        x, y = _draw_state(s, wf, hf, has_g, bias, cdf, total, w)
        draws += 1
        best = 0
        bd = (nodes[0, 0] - x) ** 2 + (nodes[0, 1] - y) ** 2
        for i in range(1, n):
            d2 = (nodes[i, 0] - x) ** 2 + (nodes[i, 1] - y) ** 2
            if d2 < bd:
                bd = d2
                best = i
        d = math.sqrt(bd)
        if d <= step:
            nx = x
            ny = y
        else:
            f = step / d
            nx = nodes[best, 0] + (x - nodes[best, 0]) * f
            ny = nodes[best, 1] + (y - nodes[best, 1]) * f
            d = step
        ok = d > 0.0 and segment_free(occ, h, w, nodes[best, 0], nodes[best, 1],
                                      nx, ny, interval)
        if ok:
            r = rewire_scale * math.sqrt(math.log(n + 1.0) / (n + 1.0)) * area_term
            rcap = 4.0 * step
            if r > rcap:
                r = rcap
            r2 = r * r
            # choose the cheapest collision-free parent in the ball
            dxn = nx - nodes[best, 0]
            dyn = ny - nodes[best, 1]
            bestp = best
            bestc = cost[best] + math.sqrt(dxn * dxn + dyn * dyn)
            for i in range(n):
                if i == best:
                    continue
                dx = nodes[i, 0] - nx
                dy = nodes[i, 1] - ny
                d2 = dx * dx + dy * dy
                if d2 <= r2:
                    c = cost[i] + math.sqrt(d2)
                    if c < bestc and segment_free(occ, h, w, nodes[i, 0], nodes[i, 1],
                                                  nx, ny, interval):
                        bestp = i
                        bestc = c
            new = n
            nodes[new, 0] = nx
            nodes[new, 1] = ny
            cost[new] = bestc
            _attach(new, bestp, parent, first_child, next_sib, prev_sib)
            n += 1
            dgx = nx - gx
            dgy = ny - gy
            if math.sqrt(dgx * dgx + dgy * dgy) <= goal_r:
                goal_list[gcount] = new
                gcount += 1
                if disc < 0:
                    disc = draws
            # rewire neighbours through the new node when strictly cheaper
            for i in range(new):
                if i == bestp:
                    continue
                dx = nodes[i, 0] - nx
                dy = nodes[i, 1] - ny
                d2 = dx * dx + dy * dy
                if d2 <= r2:
                    nc = bestc + math.sqrt(d2)
                    if nc < cost[i] and segment_free(occ, h, w, nx, ny,
                                                     nodes[i, 0], nodes[i, 1], interval):
                        _detach(i, parent, first_child, next_sib, prev_sib)
                        _attach(i, new, parent, first_child, next_sib, prev_sib)
                        delta = nc - cost[i]
                        cost[i] = nc
                        sp = 0
                        stack[sp] = i
                        sp += 1
                        while sp > 0:
                            sp -= 1
                            j = stack[sp]
                            ch = first_child[j]
                            while ch >= 0:
                                cost[ch] += delta
                                stack[sp] = ch
                                sp += 1
                                ch = next_sib[ch]
        if it % snap_every == 0:
            m = math.inf
            for k in range(gcount):
                c = cost[goal_list[k]]
                if c < m:
                    m = c
            snapshots[snap_count] = m
            snap_count += 1
    goal_idx = -1
    bestg = math.inf
    for k in range(gcount):
        c = cost[goal_list[k]]
        if c < bestg:
            bestg = c
            goal_idx = goal_list[k]
    return (nodes, parent, cost, n, goal_idx, iters, draws, disc,
            snapshots, snap_count)
