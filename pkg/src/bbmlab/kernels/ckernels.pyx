# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops: BRW tree exploration, BBM stopping lines, populations.

Every particle's randomness is a pure function of (stream key, tree
position) via per-node Philox keys, so results do not depend on traversal
order, caps, barriers or worker partitioning.  `kernels.pykernels` is the
pure-Python twin; both consume randomness identically.
"""

from libc.stdlib cimport malloc, free
from libc.math cimport log, exp, sqrt, cos

import numpy as np

cdef extern from "_philox.h":
    void bbm_philox4x64(unsigned long long c0, unsigned long long c1,
                        unsigned long long c2, unsigned long long c3,
                        unsigned long long k0, unsigned long long k1,
                        unsigned long long out[4]) nogil
    double bbm_unit(unsigned long long x) nogil
    unsigned long long BBM_CHILD_XOR_HI
    unsigned long long BBM_CHILD_XOR_LO

cdef double TWO_PI = 6.283185307179586476925287

DEF STATUS_EXACT = 0
DEF STATUS_COUNT_CAPPED = 1
DEF STATUS_WORK_CAPPED = 2


def philox4(c0, c1, c2, c3, k0, k1):
    """Raw Philox-4x64-10 block (used for key derivation and parity tests)."""
    cdef unsigned long long out[4]
    bbm_philox4x64(c0, c1, c2, c3, k0, k1, out)
    return (out[0], out[1], out[2], out[3])


cdef inline double displacement_icdf(double u, double q, double r_plus,
                                     double r_minus) nogil:
    # two-sided exponential mixture, inverse CDF on each branch
    if u < q:
        return log(u / q) / r_minus
    return -log((1.0 - u) / (1.0 - q)) / r_plus


# ---------------------------------------------------------------------------
# BRW exploration (births at or below a level, barrier pruning)
# ---------------------------------------------------------------------------

cdef struct BrwNode:
    double v
    unsigned long long kh
    unsigned long long kl


def brw_explore(unsigned long long kh, unsigned long long kl,
                double start, double level, double barrier,
                double q, double r_plus, double r_minus,
                long node_cap, long count_cap, long frontier_cap):
    """Breadth-first exploration of the embedded branching random walk.

    Returns (count, status, pruned, work, min_value).
    """
    cdef unsigned long long y[4]
    cdef long count = 0, pruned = 0, work = 0
    cdef int status = STATUS_EXACT
    cdef double minv, v, c, u
    cdef long cap = 1024, head = 0, tail = 0, n = 0, j
    cdef int i
    cdef BrwNode *queue = <BrwNode *> malloc(cap * sizeof(BrwNode))
    cdef BrwNode *nq
    cdef BrwNode node
    cdef unsigned long long ckh, ckl
    if queue == NULL:
        raise MemoryError

    # root birth: a single child of a virtual origin at `start`
    bbm_philox4x64(0, 0, 0, 0, kh, kl, y)
    v = start + displacement_icdf(bbm_unit(y[0]), q, r_plus, r_minus)
    work = 1
    minv = v
    if v > barrier:
        free(queue)
        return (0, STATUS_EXACT, 1, 1, minv)
    if v <= level:
        count = 1
        if count >= count_cap:
            free(queue)
            return (count_cap, STATUS_COUNT_CAPPED, 0, 1, minv)
    queue[0].v = v
    queue[0].kh = y[2]
    queue[0].kl = y[3]
    tail = 1
    n = 1

    while n > 0 and status == STATUS_EXACT:
        node = queue[head]
        head += 1
        if head == cap:
            head = 0
        n -= 1
        bbm_philox4x64(0, 0, 0, 0, node.kh, node.kl, y)
        for i in range(2):
            if work >= node_cap:
                status = STATUS_WORK_CAPPED
                break
            u = bbm_unit(y[i])
            c = node.v + displacement_icdf(u, q, r_plus, r_minus)
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
            if i == 0:
                ckh = y[2]
                ckl = y[3]
            else:
                ckh = y[2] ^ BBM_CHILD_XOR_HI
                ckl = y[3] ^ BBM_CHILD_XOR_LO
            if n == cap:
                if 2 * cap > frontier_cap:
                    status = STATUS_WORK_CAPPED
                    break
                nq = <BrwNode *> malloc(2 * cap * sizeof(BrwNode))
                if nq == NULL:
                    free(queue)
                    raise MemoryError
                for j in range(n):
                    nq[j] = queue[(head + j) % cap]
                free(queue)
                queue = nq
                head = 0
                cap = 2 * cap
                tail = n
            queue[tail].v = c
            queue[tail].kh = ckh
            queue[tail].kl = ckl
            tail += 1
            if tail == cap:
                tail = 0
            n += 1

    free(queue)
    if status == STATUS_COUNT_CAPPED:
        count = count_cap
    return (count, status, pruned, work, minv)


cdef struct BrwWNode:
    double v
    double amax
    long gen
    unsigned long long kh
    unsigned long long kl


def brw_explore_windows(unsigned long long kh, unsigned long long kl,
                        double start, double level, double barrier,
                        double q, double r_plus, double r_minus,
                        long node_cap, long count_cap, long frontier_cap,
                        long[::1] gen_lo, long[::1] gen_hi,
                        double[::1] path_max):
    """Exploration that additionally tallies generation-windowed counts.

    Window i counts births u with gen_lo[i] <= |u| <= gen_hi[i],
    V(u) <= level and max over the ancestry of V <= path_max[i].
    Returns (count, status, pruned, work, min_value, window_counts).
    """
    cdef unsigned long long y[4]
    cdef long count = 0, pruned = 0, work = 0
    cdef int status = STATUS_EXACT
    cdef double minv, v, c, u, am
    cdef long cap = 1024, head = 0, tail = 0, n = 0, j, g
    cdef int i, w
    cdef int nw = gen_lo.shape[0]
    cdef BrwWNode *queue = <BrwWNode *> malloc(cap * sizeof(BrwWNode))
    cdef BrwWNode *nq
    cdef BrwWNode node
    cdef unsigned long long ckh, ckl
    wcounts = np.zeros(nw, dtype=np.int64)
    cdef long[::1] wc = wcounts
    if queue == NULL:
        raise MemoryError

    bbm_philox4x64(0, 0, 0, 0, kh, kl, y)
    v = start + displacement_icdf(bbm_unit(y[0]), q, r_plus, r_minus)
    work = 1
    minv = v
    if v > barrier:
        free(queue)
        return (0, STATUS_EXACT, 1, 1, minv, wcounts)
    if v <= level:
        count = 1
        for w in range(nw):
            if gen_lo[w] <= 0 <= gen_hi[w] and v <= path_max[w]:
                wc[w] += 1
        if count >= count_cap:
            free(queue)
            return (count_cap, STATUS_COUNT_CAPPED, 0, 1, minv, wcounts)
    queue[0].v = v
    queue[0].amax = v
    queue[0].gen = 0
    queue[0].kh = y[2]
    queue[0].kl = y[3]
    tail = 1
    n = 1

    while n > 0 and status == STATUS_EXACT:
        node = queue[head]
        head += 1
        if head == cap:
            head = 0
        n -= 1
        bbm_philox4x64(0, 0, 0, 0, node.kh, node.kl, y)
        g = node.gen + 1
        for i in range(2):
            if work >= node_cap:
                status = STATUS_WORK_CAPPED
                break
            u = bbm_unit(y[i])
            c = node.v + displacement_icdf(u, q, r_plus, r_minus)
            work += 1
            if c < minv:
                minv = c
            if c > barrier:
                pruned += 1
                continue
            am = node.amax if node.amax > c else c
            if c <= level:
                count += 1
                for w in range(nw):
                    if gen_lo[w] <= g <= gen_hi[w] and am <= path_max[w]:
                        wc[w] += 1
                if count >= count_cap:
                    status = STATUS_COUNT_CAPPED
                    break
            if i == 0:
                ckh = y[2]
                ckl = y[3]
            else:
                ckh = y[2] ^ BBM_CHILD_XOR_HI
                ckl = y[3] ^ BBM_CHILD_XOR_LO
            if n == cap:
                if 2 * cap > frontier_cap:
                    status = STATUS_WORK_CAPPED
                    break
                nq = <BrwWNode *> malloc(2 * cap * sizeof(BrwWNode))
                if nq == NULL:
                    free(queue)
                    raise MemoryError
                for j in range(n):
                    nq[j] = queue[(head + j) % cap]
                free(queue)
                queue = nq
                head = 0
                cap = 2 * cap
                tail = n
            queue[tail].v = c
            queue[tail].amax = am
            queue[tail].gen = g
            queue[tail].kh = ckh
            queue[tail].kl = ckl
            tail += 1
            if tail == cap:
                tail = 0
            n += 1

    free(queue)
    if status == STATUS_COUNT_CAPPED:
        count = count_cap
    return (count, status, pruned, work, minv, wcounts)


# ---------------------------------------------------------------------------
# BBM stopping line at a level (continuous-time, time-free edge recursion)
# ---------------------------------------------------------------------------

cdef struct Edge:
    double pos
    unsigned long long kh
    unsigned long long kl


def bbm_line(unsigned long long kh, unsigned long long kl,
             double x, double barrier, double mu,
             long work_cap, long frontier_cap):
    """Sample the stopping line at level x for a BBM rooted at 0.

    For x >= 0 the line is the upward first passage; for x < 0 the downward
    one, in which case subtrees whose death position exceeds `barrier` are
    pruned (each pruned subtree contributes at most e^{x-pos} expected
    crossers).  Returns (z_count, births, pruned, work, status).
    """
    cdef unsigned long long y[4]
    cdef unsigned long long z[4]
    cdef long zc = 0, births = 0, pruned = 0, work = 0
    cdef int status = STATUS_EXACT
    cdef bint up = x >= 0.0
    cdef double pos, T, g, w, m, shift, pc, dpos, u
    cdef long cap = 1024, head = 0, tail = 0, n = 0, j
    cdef Edge *queue
    cdef Edge *nq
    cdef Edge e

    if up and 0.0 >= x:
        # the root itself is on the line
        return (1, 0, 0, 0, STATUS_EXACT)
    if (not up) and 0.0 <= x:
        return (1, 0, 0, 0, STATUS_EXACT)

    queue = <Edge *> malloc(cap * sizeof(Edge))
    if queue == NULL:
        raise MemoryError
    queue[0].pos = 0.0
    queue[0].kh = kh
    queue[0].kl = kl
    tail = 1
    n = 1

    while n > 0 and status == STATUS_EXACT:
        e = queue[head]
        head += 1
        if head == cap:
            head = 0
        n -= 1
        if work >= work_cap:
            status = STATUS_WORK_CAPPED
            break
        work += 1
        bbm_philox4x64(0, 0, 0, 0, e.kh, e.kl, y)
        T = -log(bbm_unit(y[0]))
        g = sqrt(-2.0 * log(bbm_unit(y[1]))) * cos(TWO_PI * bbm_unit(y[2]))
        u = bbm_unit(y[3])
        w = mu * T + sqrt(2.0 * T) * g
        if up:
            m = x - e.pos
            shift = w
        else:
            m = e.pos - x
            shift = -w
        if m <= (shift if shift > 0.0 else 0.0):
            pc = 1.0
        else:
            pc = exp(-(m * (m - shift)) / T)
        if u < pc:
            zc += 1
            continue
        dpos = e.pos + w
        if up:
            births += 1
        elif dpos > barrier:
            pruned += 1
            continue
        bbm_philox4x64(1, 0, 0, 0, e.kh, e.kl, z)
        if n + 2 > cap:
            if 2 * cap > frontier_cap:
                status = STATUS_WORK_CAPPED
                break
            nq = <Edge *> malloc(2 * cap * sizeof(Edge))
            if nq == NULL:
                free(queue)
                raise MemoryError
            for j in range(n):
                nq[j] = queue[(head + j) % cap]
            free(queue)
            queue = nq
            head = 0
            cap = 2 * cap
            tail = n
        queue[tail].pos = dpos
        queue[tail].kh = z[0]
        queue[tail].kl = z[1]
        tail += 1
        if tail == cap:
            tail = 0
        queue[tail].pos = dpos
        queue[tail].kh = z[2]
        queue[tail].kl = z[3]
        tail += 1
        if tail == cap:
            tail = 0
        n += 2

    free(queue)
    return (zc, births, pruned, work, status)


# ---------------------------------------------------------------------------
# BBM population at a fixed time (depth-first, exact positions)
# ---------------------------------------------------------------------------

cdef struct PopNode:
    double pos
    double birth
    unsigned long long kh
    unsigned long long kl


def bbm_population(unsigned long long kh, unsigned long long kl,
                   double t, double mu, long pop_cap, bint store):
    """Simulate the BBM population at time t from a single particle at 0.

    Returns (status, n_alive, min_pos, positions-or-None); status is 2 when
    pop_cap was exhausted (results then unusable).
    """
    cdef unsigned long long y[4]
    cdef unsigned long long z[4]
    cdef long cap = 256, n = 0, nalive = 0, j
    cdef int status = STATUS_EXACT
    cdef double T, g, dt, endpos, minpos = 0.0
    cdef bint first = True
    cdef PopNode *stack = <PopNode *> malloc(cap * sizeof(PopNode))
    cdef PopNode *ns
    cdef PopNode e
    cdef double *out = NULL
    cdef long ocap = 0
    cdef double *nout
    if stack == NULL:
        raise MemoryError
    if store:
        ocap = 256
        out = <double *> malloc(ocap * sizeof(double))
        if out == NULL:
            free(stack)
            raise MemoryError

    stack[0].pos = 0.0
    stack[0].birth = 0.0
    stack[0].kh = kh
    stack[0].kl = kl
    n = 1
    while n > 0:
        n -= 1
        e = stack[n]
        bbm_philox4x64(0, 0, 0, 0, e.kh, e.kl, y)
        T = -log(bbm_unit(y[0]))
        g = sqrt(-2.0 * log(bbm_unit(y[1]))) * cos(TWO_PI * bbm_unit(y[2]))
        if e.birth + T >= t:
            dt = t - e.birth
            endpos = e.pos + mu * dt + sqrt(2.0 * dt) * g
            if first or endpos < minpos:
                minpos = endpos
                first = False
            if store:
                if nalive == ocap:
                    nout = <double *> malloc(2 * ocap * sizeof(double))
                    if nout == NULL:
                        free(stack)
                        free(out)
                        raise MemoryError
                    for j in range(nalive):
                        nout[j] = out[j]
                    free(out)
                    out = nout
                    ocap = 2 * ocap
                out[nalive] = endpos
            nalive += 1
            if nalive > pop_cap:
                status = STATUS_WORK_CAPPED
                break
            continue
        endpos = e.pos + mu * T + sqrt(2.0 * T) * g
        bbm_philox4x64(1, 0, 0, 0, e.kh, e.kl, z)
        if n + 2 > cap:
            ns = <PopNode *> malloc(2 * cap * sizeof(PopNode))
            if ns == NULL:
                free(stack)
                if out != NULL:
                    free(out)
                raise MemoryError
            for j in range(n):
                ns[j] = stack[j]
            free(stack)
            stack = ns
            cap = 2 * cap
        stack[n].pos = endpos
        stack[n].birth = e.birth + T
        stack[n].kh = z[0]
        stack[n].kl = z[1]
        stack[n + 1].pos = endpos
        stack[n + 1].birth = e.birth + T
        stack[n + 1].kh = z[2]
        stack[n + 1].kl = z[3]
        n += 2

    free(stack)
    positions = None
    if store:
        if status == STATUS_EXACT:
            positions = np.empty(nalive, dtype=np.float64)
            for j in range(nalive):
                positions[j] = out[j]
        free(out)
    return (status, nalive, minpos, positions)
