"""Counter-based splittable random streams.

A stream is a 128-bit Philox key.  Keys are derived, never advanced:
``stream_key(seed, domain, index)`` is a pure function, so sample i of an
experiment is reproducible regardless of how samples are partitioned
across workers.  Vectorised modules wrap the same key into a numpy
``Generator`` via the Philox bit generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import philox4

# domain tags keep streams of different experiment kinds disjoint
DOMAIN_BRW = 1
DOMAIN_LINE = 2
DOMAIN_COMPOSED = 3
DOMAIN_POP = 4
DOMAIN_SPINE = 5
DOMAIN_EDGE = 6
DOMAIN_SUBCOPY = 7

_ROOT_SALT = 0x62626D6C61620001  # "bbmlab", version 1


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream_id) pair naming one reproducible substream."""

    seed: int
    stream_id: int

    def key(self, domain: int = 0) -> tuple[int, int]:
        y = philox4(self.stream_id & 0xFFFFFFFFFFFFFFFF, domain, 0, 0,
                    self.seed & 0xFFFFFFFFFFFFFFFF, _ROOT_SALT)
        return (y[0], y[1])


def stream_key(seed: int, domain: int, index: int) -> tuple[int, int]:
    """128-bit Philox key for sample `index` of experiment kind `domain`."""
    return RngStream(seed, index).key(domain)


def derive_key(key: tuple[int, int], index: int,
               domain: int = DOMAIN_SUBCOPY) -> tuple[int, int]:
    """Child key for dependent draws (e.g. the j-th copy inside one sample)."""
    y = philox4(index & 0xFFFFFFFFFFFFFFFF, domain, 0, 0, key[0], key[1])
    return (y[0], y[1])


def generator(key: tuple[int, int]) -> np.random.Generator:
    """numpy Generator seeded from a stream key (for vectorised samplers)."""
    return np.random.Generator(np.random.Philox(key=np.array(key, dtype=np.uint64)))
