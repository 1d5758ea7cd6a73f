"""Seeded instance corpora shared by the test modules."""

from __future__ import annotations

import functools

import numpy as np

from mixcover.generators import planted_infeasible, planted_mixed, random_cover, random_facility
from mixcover.instances import normalize


def _mixed_specs():
    rng = np.random.default_rng(20240611)
    specs = []
    # (n, m_p, m_c, per_col, spread)
    for _ in range(60):
        m = int(rng.integers(2, 41))
        specs.append((int(rng.integers(3, 61)), max(1, m // 2), max(1, m - m // 2), int(rng.integers(1, 5)),
                      float(rng.choice([0.0, 0.5, 1.0, 2.0]))))
    for _ in range(30):
        m = int(rng.integers(10, 81))
        specs.append((int(rng.integers(100, 401)), m // 2, m - m // 2, int(rng.integers(2, 5)),
                      float(rng.choice([0.5, 1.0]))))
    for _ in range(8):
        m = int(rng.integers(8, 33))
        specs.append((int(rng.integers(1000, 2501)), m // 2, m - m // 2, 2, 1.0))
    # the two largest keep m small so U stays moderate
    specs.append((25000, 4, 4, 2, 1.0))
    specs.append((12500, 2, 2, 2, 0.5))
    return specs


MIXED_SPECS = _mixed_specs()


@functools.lru_cache(maxsize=None)
def mixed(k: int):
    """(normalized instance, planted x*) for corpus entry k (0 <= k < 100)."""
    n, mp, mc, per_col, spread = MIXED_SPECS[k]
    inst, xs = planted_mixed(n, mp, mc, per_col, seed=1000 + k, spread=spread)
    return normalize(inst), xs


def mixed_small(limit: int = 2000):
    """Corpus indices whose instances have at most ``limit`` nonzeros."""
    return [k for k in range(len(MIXED_SPECS)) if mixed(k)[0].nnz <= limit]


def infeasible(seed: int):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(4, 41))
    inst = planted_infeasible(int(rng.integers(5, 81)), m // 2, m - m // 2, int(rng.integers(1, 4)), seed=seed)
    return normalize(inst)


def cover(k: int):
    rng = np.random.default_rng(500 + k)
    n = int(rng.integers(5, 120))
    m = int(rng.integers(3, 60))
    return random_cover(n, m, int(rng.integers(1, 5)), seed=k, binary=bool(k % 2))


def tiny_cover(k: int):
    rng = np.random.default_rng(900 + k)
    return random_cover(int(rng.integers(2, 7)), int(rng.integers(1, 7)), int(rng.integers(1, 3)), seed=k,
                        binary=bool(k % 3 == 0))


def tiny_fl(k: int):
    """At most 4 facilities and 6 clients."""
    rng = np.random.default_rng(700 + k)
    nf = int(rng.integers(1, 5))
    mc = int(rng.integers(1, 7))
    pairs = int(rng.integers(mc, nf * mc + 1))
    return random_facility(nf, mc, pairs, seed=k, zero_cost_prob=0.1 if k % 5 == 4 else 0.0)


def fl(k: int):
    rng = np.random.default_rng(800 + k)
    nf = int(rng.integers(1, 25))
    mc = int(rng.integers(1, 120))
    return random_facility(nf, mc, int(rng.integers(mc, nf * mc + 1)), seed=k,
                           zero_cost_prob=0.05 if k % 4 == 3 else 0.0)
