#ifndef BBMLAB_PHILOX_H
#define BBMLAB_PHILOX_H

#include <stdint.h>

/* Philox-4x64-10 counter-based generator (Random123 constants).
 * Keyed per tree node so that every particle's randomness is a pure
 * function of (stream key, tree position), independent of traversal
 * order, caps and pruning barriers. */

#define BBM_PHILOX_M0 0xD2E7470EE14C6C93ULL
#define BBM_PHILOX_M1 0xCA5A826395121157ULL
#define BBM_PHILOX_W0 0x9E3779B97F4A7C15ULL
#define BBM_PHILOX_W1 0xBB67AE8584CAA73BULL

static inline void bbm_philox4x64(uint64_t c0, uint64_t c1, uint64_t c2,
                                  uint64_t c3, uint64_t k0, uint64_t k1,
                                  uint64_t out[4]) {
    int r;
    for (r = 0; r < 10; r++) {
        __uint128_t p0 = (__uint128_t)BBM_PHILOX_M0 * c0;
        __uint128_t p1 = (__uint128_t)BBM_PHILOX_M1 * c2;
        uint64_t hi0 = (uint64_t)(p0 >> 64), lo0 = (uint64_t)p0;
        uint64_t hi1 = (uint64_t)(p1 >> 64), lo1 = (uint64_t)p1;
        uint64_t n0 = hi1 ^ c1 ^ k0;
        uint64_t n1 = lo1;
        uint64_t n2 = hi0 ^ c3 ^ k1;
        uint64_t n3 = lo0;
        c0 = n0; c1 = n1; c2 = n2; c3 = n3;
        k0 += BBM_PHILOX_W0;
        k1 += BBM_PHILOX_W1;
    }
    out[0] = c0; out[1] = c1; out[2] = c2; out[3] = c3;
}

/* uniform on (0,1), never 0 or 1 */
static inline double bbm_unit(uint64_t x) {
    return ((double)(x >> 11)) * (1.0 / 9007199254740992.0)
           + (1.0 / 18014398509481984.0);
}

/* xor constants separating the two child keys derived from one block */
#define BBM_CHILD_XOR_HI 0xBB67AE8584CAA73BULL
#define BBM_CHILD_XOR_LO 0x9E3779B97F4A7C15ULL

#endif
