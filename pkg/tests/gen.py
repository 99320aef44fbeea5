"""Seeded random instances shared by the test modules."""
import numpy as np

from persuasion import Additive, Anonymous, Coverage, ExplicitTable, PersuasionInstance


def rng_for(*key):
    return np.random.default_rng(np.random.SeedSequence([12345, *key]))


def random_additive(rng, n):
    w = rng.random(n)
    return Additive(w / w.sum() * rng.uniform(0.5, 1.0))


def random_anonymous(rng, n, concave=False):
    inc = rng.random(n)
    if concave:
        inc = np.sort(inc)[::-1]
    g = np.r_[0.0, np.cumsum(inc)]
    return Anonymous(g / g[-1])


def random_coverage(rng, n, universe=None):
    universe = universe or int(rng.integers(n, 2 * n + 2))
    w = rng.random(universe)
    w /= w.sum()
    covers = [sorted(rng.choice(universe, size=min(int(rng.integers(1, 4)), universe), replace=False).tolist())
              for _ in range(n)]
    return Coverage(w, covers)


def random_table(rng, n):
    # monotone via max over random generators
    vals = np.zeros(1 << n)
    for m in range(1, 1 << n):
        vals[m] = max(vals[m ^ (1 << i)] for i in range(n) if m >> i & 1) + rng.random() * 0.3
    return ExplicitTable(vals / vals.max())


def random_instance(rng, n, k, make):
    prior = rng.dirichlet(np.ones(k))
    u = rng.uniform(-1, 1, size=(n, k))
    return PersuasionInstance(prior, u, [make(rng, n) for _ in range(k)])
