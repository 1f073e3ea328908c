"""Pure-Python twin of the compiled kernels.

Slow (interpreted Philox), but bit-for-bit identical to
``kernels.ckernels``: same per-node key derivation, same randomness
consumption, same traversal order.  Used as a fallback when the extension
is unavailable and as the reference side of the kernel parity tests.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

MASK64 = (1 << 64) - 1
_M0 = 0xD2E7470EE14C6C93
_M1 = 0xCA5A826395121157
_W0 = 0x9E3779B97F4A7C15
_W1 = 0xBB67AE8584CAA73B

CHILD_XOR_HI = 0xBB67AE8584CAA73B
CHILD_XOR_LO = 0x9E3779B97F4A7C15

TWO_PI = 6.283185307179586476925287

STATUS_EXACT = 0
STATUS_COUNT_CAPPED = 1
STATUS_WORK_CAPPED = 2


def philox4(c0, c1, c2, c3, k0, k1):
    """Philox-4x64-10 block (Random123 constants)."""
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = (p0 >> 64) & MASK64, p0 & MASK64
        hi1, lo1 = (p1 >> 64) & MASK64, p1 & MASK64
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & MASK64
        c3 = lo0
        k0 = (k0 + _W0) & MASK64
        k1 = (k1 + _W1) & MASK64
    return (c0, c1, c2, c3)


def _unit(x):
    # uniform on (0,1), never 0 or 1
    return (x >> 11) * (1.0 / 9007199254740992.0) + (1.0 / 18014398509481984.0)


def _displacement_icdf(u, q, r_plus, r_minus):
    if u < q:
        return math.log(u / q) / r_minus
    return -math.log((1.0 - u) / (1.0 - q)) / r_plus


def brw_explore(kh, kl, start, level, barrier, q, r_plus, r_minus,
                node_cap, count_cap, frontier_cap):
    """See ckernels.brw_explore."""
    y = philox4(0, 0, 0, 0, kh, kl)
    v = start + _displacement_icdf(_unit(y[0]), q, r_plus, r_minus)
    work = 1
    minv = v
    if v > barrier:
        return (0, STATUS_EXACT, 1, 1, minv)
    count = 1 if v <= level else 0
    if count >= count_cap:
        return (count_cap, STATUS_COUNT_CAPPED, 0, 1, minv)
    pruned = 0
    status = STATUS_EXACT
    queue = deque()
    queue.append((v, y[2], y[3]))

    while queue and status == STATUS_EXACT:
        v, nkh, nkl = queue.popleft()
        y = philox4(0, 0, 0, 0, nkh, nkl)
        for i in range(2):
            if work >= node_cap:
                status = STATUS_WORK_CAPPED
                break
            c = v + _displacement_icdf(_unit(y[i]), q, r_plus, r_minus)
            work += 1
            if c < minv:
                minv = c
            if c > barrier:
                pruned += 1
                continue
            if c <= level:
                count += 1
                if count >= count_cap:
                    status = STATUS_COUNT_CAPPED
                    break
            if len(queue) + 1 > frontier_cap:
                status = STATUS_WORK_CAPPED
                break
            if i == 0:
                queue.append((c, y[2], y[3]))
            else:
                queue.append((c, y[2] ^ CHILD_XOR_HI, y[3] ^ CHILD_XOR_LO))

    if status == STATUS_COUNT_CAPPED:
        count = count_cap
    return (count, status, pruned, work, minv)


def brw_explore_windows(kh, kl, start, level, barrier, q, r_plus, r_minus,
                        node_cap, count_cap, frontier_cap,
                        gen_lo, gen_hi, path_max):
    """See ckernels.brw_explore_windows."""
    nw = len(gen_lo)
    wcounts = np.zeros(nw, dtype=np.int64)
    y = philox4(0, 0, 0, 0, kh, kl)
    v = start + _displacement_icdf(_unit(y[0]), q, r_plus, r_minus)
    work = 1
    minv = v
    if v > barrier:
        return (0, STATUS_EXACT, 1, 1, minv, wcounts)
    count = 0
    if v <= level:
        count = 1
        for w in range(nw):
            if gen_lo[w] <= 0 <= gen_hi[w] and v <= path_max[w]:
                wcounts[w] += 1
        if count >= count_cap:
            return (count_cap, STATUS_COUNT_CAPPED, 0, 1, minv, wcounts)
    pruned = 0
    status = STATUS_EXACT
    queue = deque()
    queue.append((v, v, 0, y[2], y[3]))

    while queue and status == STATUS_EXACT:
        v, amax0, gen, nkh, nkl = queue.popleft()
        y = philox4(0, 0, 0, 0, nkh, nkl)
        g = gen + 1
        for i in range(2):
            if work >= node_cap:
                status = STATUS_WORK_CAPPED
                break
            c = v + _displacement_icdf(_unit(y[i]), q, r_plus, r_minus)
            work += 1
            if c < minv:
                minv = c
            if c > barrier:
                pruned += 1
                continue
            am = amax0 if amax0 > c else c
            if c <= level:
                count += 1
                for w in range(nw):
                    if gen_lo[w] <= g <= gen_hi[w] and am <= path_max[w]:
                        wcounts[w] += 1
                if count >= count_cap:
                    status = STATUS_COUNT_CAPPED
                    break
            if len(queue) + 1 > frontier_cap:
                status = STATUS_WORK_CAPPED
                break
            if i == 0:
                queue.append((c, am, g, y[2], y[3]))
            else:
                queue.append((c, am, g, y[2] ^ CHILD_XOR_HI,
                              y[3] ^ CHILD_XOR_LO))

    if status == STATUS_COUNT_CAPPED:
        count = count_cap
    return (count, status, pruned, work, minv, wcounts)


def bbm_line(kh, kl, x, barrier, mu, work_cap, frontier_cap):
    """See ckernels.bbm_line."""
    up = x >= 0.0
    if (up and 0.0 >= x) or ((not up) and 0.0 <= x):
        return (1, 0, 0, 0, STATUS_EXACT)

    zc = births = pruned = work = 0
    status = STATUS_EXACT
    queue = deque()
    queue.append((0.0, kh, kl))
    while queue and status == STATUS_EXACT:
        pos, ekh, ekl = queue.popleft()
        if work >= work_cap:
            status = STATUS_WORK_CAPPED
            break
        work += 1
        y = philox4(0, 0, 0, 0, ekh, ekl)
        T = -math.log(_unit(y[0]))
        g = math.sqrt(-2.0 * math.log(_unit(y[1]))) * math.cos(
            TWO_PI * _unit(y[2]))
        u = _unit(y[3])
        w = mu * T + math.sqrt(2.0 * T) * g
        if up:
            m, shift = x - pos, w
        else:
            m, shift = pos - x, -w
        pc = 1.0 if m <= max(0.0, shift) else math.exp(-(m * (m - shift)) / T)
        if u < pc:
            zc += 1
            continue
        dpos = pos + w
        if up:
            births += 1
        elif dpos > barrier:
            pruned += 1
            continue
        if len(queue) + 2 > frontier_cap:
            status = STATUS_WORK_CAPPED
            break
        z = philox4(1, 0, 0, 0, ekh, ekl)
        queue.append((dpos, z[0], z[1]))
        queue.append((dpos, z[2], z[3]))

    return (zc, births, pruned, work, status)


def bbm_population(kh, kl, t, mu, pop_cap, store):
    """See ckernels.bbm_population."""
    stack = [(0.0, 0.0, kh, kl)]
    nalive = 0
    minpos = 0.0
    first = True
    status = STATUS_EXACT
    out = [] if store else None
    while stack:
        pos, birth, ekh, ekl = stack.pop()
        y = philox4(0, 0, 0, 0, ekh, ekl)
        T = -math.log(_unit(y[0]))
        g = math.sqrt(-2.0 * math.log(_unit(y[1]))) * math.cos(
            TWO_PI * _unit(y[2]))
        if birth + T >= t:
            dt = t - birth
            endpos = pos + mu * dt + math.sqrt(2.0 * dt) * g
            if first or endpos < minpos:
                minpos = endpos
                first = False
            if store:
                out.append(endpos)
            nalive += 1
            if nalive > pop_cap:
                status = STATUS_WORK_CAPPED
                break
            continue
        endpos = pos + mu * T + math.sqrt(2.0 * T) * g
        z = philox4(1, 0, 0, 0, ekh, ekl)
        # push order mirrors the compiled stack layout (z[2:] popped first)
        stack.append((endpos, birth + T, z[0], z[1]))
        stack.append((endpos, birth + T, z[2], z[3]))

    positions = None
    if store and status == STATUS_EXACT:
        positions = np.asarray(out, dtype=np.float64)
    return (status, nalive, minpos, positions)
