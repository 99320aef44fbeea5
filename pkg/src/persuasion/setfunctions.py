"""Monotone set functions used as sender objectives.

Elements are receivers ``0..n-1``.  A subset is passed around as a sorted
tuple of indices; vectorised code works on boolean membership matrices of
shape ``(k, n)`` and, for ``n <= 20``, on full tables indexed by bitmask
(bit ``i`` set iff receiver ``i`` is in the set).
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Iterable

import numpy as np

from .errors import InvalidInstanceError, InvalidSubsetError, InstanceTooLargeError

TABLE_MAX_N = 20
EXHAUSTIVE_CHECK_MAX_N = 12
NORM_TOL = 1e-12


def as_subset(S: Iterable[int], n: int) -> tuple[int, ...]:
    """Canonical sorted tuple; rejects out-of-range indices."""
    out = set()
    for i in S:
        if isinstance(i, (bool, np.bool_)) or int(i) != i:
            raise InvalidSubsetError(f"subset entry {i!r} is not an integer index")
        i = int(i)
        if not 0 <= i < n:
            raise InvalidSubsetError(f"index {i} out of range for n={n}")
        out.add(i)
    return tuple(sorted(out))


def subset_to_mask(S: Iterable[int]) -> int:
    m = 0
    for i in S:
        m |= 1 << int(i)
    return m


def mask_to_subset(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def all_membership(n: int) -> np.ndarray:
    """Boolean matrix whose row ``m`` is the membership vector of bitmask ``m``."""
    if n > TABLE_MAX_N:
        raise InstanceTooLargeError(f"cannot enumerate 2^{n} subsets (cap n <= {TABLE_MAX_N})")
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def _membership(subsets, n) -> np.ndarray:
    X = np.zeros((len(subsets), n), dtype=bool)
    for r, S in enumerate(subsets):
        X[r, list(S)] = True
    return X


class SetFunction(ABC):
    """Value-oracle set function on ``n`` elements.

    Instances are treated as immutable; the full table is cached lazily.
    """

    kind: str = ""
    submodular_by_construction = False
    supermodular_by_construction = False

    def __init__(self, n: int):
        if int(n) != n or n < 0:
            raise InvalidInstanceError(f"element count must be a nonnegative integer, got {n!r}")
        self.n = int(n)
        self._table = None

    @abstractmethod
    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Values for each row of the boolean membership matrix ``X``."""

    @abstractmethod
    def to_dict(self) -> dict:
        ...

    @abstractmethod
    def scaled(self, c: float) -> "SetFunction":
        """Same representation with every value multiplied by ``c``."""

    def __call__(self, S: Iterable[int]) -> float:
        S = as_subset(S, self.n)
        X = np.zeros((1, self.n), dtype=bool)
        X[0, list(S)] = True
        return float(self.evaluate_batch(X)[0])

    def evaluate_many(self, subsets) -> np.ndarray:
        return self.evaluate_batch(_membership([as_subset(S, self.n) for S in subsets], self.n))

    def table(self) -> np.ndarray:
        """All ``2^n`` values indexed by bitmask (``n <= 20``)."""
        if self._table is None:
            t = np.asarray(self.evaluate_batch(all_membership(self.n)), dtype=float)
            t.setflags(write=False)
            self._table = t
        return self._table

    def max_value(self) -> float:
        if self.n <= TABLE_MAX_N:
            return float(self.table().max())
        return self(range(self.n))

    def violations(self, rng_seed: int = 0) -> list[str]:
        """Normalization and monotonicity problems, as readable strings."""
        return _generic_violations(self, rng_seed)

    def is_submodular(self) -> bool:
        if self.submodular_by_construction:
            return True
        if self.n > EXHAUSTIVE_CHECK_MAX_N:
            return False
        return _check_diminishing_returns(self.table(), self.n)

    def is_supermodular(self) -> bool:
        if self.supermodular_by_construction:
            return True
        if self.n > EXHAUSTIVE_CHECK_MAX_N:
            return False
        return _check_diminishing_returns(-self.table(), self.n)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


def _fmt_set(mask: int) -> str:
    return "{" + ", ".join(str(i) for i in mask_to_subset(mask)) + "}"


def _check_diminishing_returns(t: np.ndarray, n: int) -> bool:
    # f(S+i) - f(S) >= f(S+i+j) - f(S+j) for i, j not in S
    masks = np.arange(1 << n)
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            base = masks[(masks & (bi | bj)) == 0]
            lhs = t[base | bi] - t[base]
            rhs = t[base | bi | bj] - t[base | bj]
            if np.any(rhs > lhs + 1e-12):
                return False
    return True


def _generic_violations(f: SetFunction, rng_seed: int) -> list[str]:
    out = []
    empty = f(())
    if abs(empty) > NORM_TOL:
        out.append(f"f(empty set) = {empty:g}, expected 0")
    if f.n <= EXHAUSTIVE_CHECK_MAX_N:
        t = f.table()
        if t.min() < -NORM_TOL or t.max() > 1 + NORM_TOL:
            out.append(f"values outside [0, 1]: min {t.min():g}, max {t.max():g}")
        masks = np.arange(1 << f.n)
        for i in range(f.n):
            bit = 1 << i
            base = masks[(masks & bit) == 0]
            bad = np.flatnonzero(t[base] > t[base | bit] + NORM_TOL)
            for k in bad[:5]:
                S = int(base[k])
                out.append(
                    f"monotonicity violated: f({_fmt_set(S)}) = {t[S]:g} > "
                    f"f({_fmt_set(S | bit)}) = {t[S | bit]:g}"
                )
    else:
        # sampled chains: random order, compare consecutive prefixes
        rng = np.random.default_rng(rng_seed)
        full = f(range(f.n))
        if full > 1 + NORM_TOL:
            out.append(f"f(all) = {full:g} exceeds 1")
        for _ in range(1000):
            perm = rng.permutation(f.n)
            k = int(rng.integers(0, f.n))
            S = tuple(sorted(perm[:k]))
            T = tuple(sorted(perm[: k + 1]))
            a, b = f(S), f(T)
            if a > b + NORM_TOL:
                out.append(f"monotonicity violated: f({set(S)}) = {a:g} > f({set(T)}) = {b:g}")
                break
    return out


class ExplicitTable(SetFunction):
    """Full value table indexed by bitmask."""

    kind = "table"

    def __init__(self, values):
        values = np.asarray(values, dtype=float).ravel()
        n = int(round(np.log2(len(values)))) if len(values) else -1
        if n < 0 or (1 << n) != len(values):
            raise InvalidInstanceError(f"table length {len(values)} is not a power of two")
        if n > TABLE_MAX_N:
            raise InstanceTooLargeError(f"explicit tables are capped at n <= {TABLE_MAX_N}")
        if not np.all(np.isfinite(values)):
            raise InvalidInstanceError("table has non-finite entries")
        super().__init__(n)
        values = values.copy()
        values.setflags(write=False)
        self.values = values
        self._table = values

    def evaluate_batch(self, X):
        X = np.asarray(X, dtype=bool)
        masks = X.astype(np.int64) @ (np.int64(1) << np.arange(self.n, dtype=np.int64))
        return self.values[masks]

    def to_dict(self):
        return {"type": self.kind, "values": self.values.tolist()}

    def scaled(self, c):
        return ExplicitTable(self.values * c)


class Additive(SetFunction):
    """f(S) = sum of weights in S."""

    kind = "additive"
    submodular_by_construction = True
    supermodular_by_construction = True

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise InvalidInstanceError("additive weights must be finite")
        super().__init__(len(w))
        w.setflags(write=False)
        self.weights = w

    def evaluate_batch(self, X):
        return np.asarray(X, dtype=float) @ self.weights

    def to_dict(self):
        return {"type": self.kind, "weights": self.weights.tolist()}

    def scaled(self, c):
        return Additive(self.weights * c)

    def violations(self, rng_seed=0):
        out = []
        if np.any(self.weights < 0):
            out.append(f"monotonicity violated: negative additive weight {self.weights.min():g}")
        total = float(self.weights[self.weights > 0].sum())
        if total > 1 + NORM_TOL:
            out.append(f"values outside [0, 1]: f(all) = {total:g}")
        return out


class Anonymous(SetFunction):
    """f(S) = g(|S|) with ``values = (g(0), ..., g(n))``."""

    kind = "anonymous"

    def __init__(self, values):
        g = np.asarray(values, dtype=float).ravel()
        if len(g) < 1 or not np.all(np.isfinite(g)):
            raise InvalidInstanceError("anonymous values must be finite, one per size 0..n")
        super().__init__(len(g) - 1)
        g.setflags(write=False)
        self.g = g

    @classmethod
    def at_least_one(cls, n, value=1.0):
        """g(k) = value * min(k, 1)."""
        return cls([0.0] + [value] * n)

    def evaluate_batch(self, X):
        return self.g[np.asarray(X, dtype=bool).sum(axis=1)]

    def to_dict(self):
        return {"type": self.kind, "values": self.g.tolist()}

    def scaled(self, c):
        return Anonymous(self.g * c)

    def is_submodular(self):
        return bool(np.all(np.diff(self.g, 2) <= 1e-12))

    def is_supermodular(self):
        return bool(np.all(np.diff(self.g, 2) >= -1e-12))

    def violations(self, rng_seed=0):
        out = []
        if abs(self.g[0]) > NORM_TOL:
            out.append(f"f(empty set) = {self.g[0]:g}, expected 0")
        if self.g.min() < -NORM_TOL or self.g.max() > 1 + NORM_TOL:
            out.append(f"values outside [0, 1]: min {self.g.min():g}, max {self.g.max():g}")
        for k in np.flatnonzero(np.diff(self.g) < -NORM_TOL)[:5]:
            out.append(f"monotonicity violated: g({k}) = {self.g[k]:g} > g({k + 1}) = {self.g[k + 1]:g}")
        return out


class Coverage(SetFunction):
    """Weighted coverage: f(S) = total weight of universe items covered by S."""

    kind = "coverage"
    submodular_by_construction = True

    def __init__(self, universe_weights, covers):
        w = np.asarray(universe_weights, dtype=float).ravel()
        if not np.all(np.isfinite(w)):
            raise InvalidInstanceError("coverage weights must be finite")
        super().__init__(len(covers))
        inc = np.zeros((self.n, len(w)), dtype=float)
        for e, items in enumerate(covers):
            for a in items:
                if not 0 <= int(a) < len(w):
                    raise InvalidInstanceError(f"element {e} covers unknown universe item {a}")
                inc[e, int(a)] = 1.0
        inc.setflags(write=False)
        w.setflags(write=False)
        self.weights = w
        self.incidence = inc
        self.covers = tuple(tuple(sorted({int(a) for a in items})) for items in covers)

    def evaluate_batch(self, X):
        covered = (np.asarray(X, dtype=float) @ self.incidence) > 0
        return covered.astype(float) @ self.weights

    def to_dict(self):
        return {"type": self.kind, "universe_weights": self.weights.tolist(),
                "covers": [list(c) for c in self.covers]}

    def scaled(self, c):
        return Coverage(self.weights * c, self.covers)

    def violations(self, rng_seed=0):
        out = []
        if np.any(self.weights < 0):
            out.append(f"monotonicity violated: negative universe weight {self.weights.min():g}")
        total = float(self.weights[self.incidence.any(axis=0)].sum())
        if total > 1 + NORM_TOL:
            out.append(f"values outside [0, 1]: f(all) = {total:g}")
        return out


class SupermodularQuadratic(SetFunction):
    """f(S) = sum_{i in S} a_i + sum_{i<j in S} b_ij with b_ij >= 0."""

    kind = "supermodular_quadratic"
    supermodular_by_construction = True

    def __init__(self, linear, pairwise=()):
        a = np.asarray(linear, dtype=float).ravel()
        super().__init__(len(a))
        B = np.zeros((self.n, self.n))
        for i, j, b in pairwise:
            i, j = int(i), int(j)
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInstanceError(f"bad pairwise index ({i}, {j})")
            B[min(i, j), max(i, j)] += float(b)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(B))):
            raise InvalidInstanceError("quadratic coefficients must be finite")
        a.setflags(write=False)
        B.setflags(write=False)
        self.linear = a
        self.pairwise = B  # strictly upper triangular

    def pairs(self):
        i, j = np.nonzero(self.pairwise)
        return [(int(p), int(q), float(self.pairwise[p, q])) for p, q in zip(i, j)]

    def evaluate_batch(self, X):
        Xf = np.asarray(X, dtype=float)
        return Xf @ self.linear + ((Xf @ self.pairwise) * Xf).sum(axis=1)

    def to_dict(self):
        return {"type": self.kind, "linear": self.linear.tolist(),
                "pairwise": [list(p) for p in self.pairs()]}

    def scaled(self, c):
        return SupermodularQuadratic(self.linear * c, [(i, j, b * c) for i, j, b in self.pairs()])

    def violations(self, rng_seed=0):
        out = []
        if np.any(self.linear < 0):
            out.append(f"monotonicity violated: negative linear term {self.linear.min():g}")
        if np.any(self.pairwise < 0):
            out.append(f"supermodularity violated: negative pairwise term {self.pairwise.min():g}")
        total = float(self.linear.sum() + self.pairwise.sum())
        if total > 1 + NORM_TOL:
            out.append(f"values outside [0, 1]: f(all) = {total:g}")
        return out


_KINDS = {
    "table": lambda d: ExplicitTable(d["values"]),
    "additive": lambda d: Additive(d["weights"]),
    "anonymous": lambda d: Anonymous(d["values"]),
    "coverage": lambda d: Coverage(d["universe_weights"], d["covers"]),
    "supermodular_quadratic": lambda d: SupermodularQuadratic(d["linear"], d.get("pairwise", [])),
}
_FIELDS = {
    "table": {"values"},
    "additive": {"weights"},
    "anonymous": {"values"},
    "coverage": {"universe_weights", "covers"},
    "supermodular_quadratic": {"linear", "pairwise"},
}
_OPTIONAL = {"supermodular_quadratic": {"pairwise"}}


def setfunction_from_dict(d: dict, extra_allowed=()) -> SetFunction:
    if not isinstance(d, dict) or "type" not in d:
        raise InvalidInstanceError("set-function descriptor must be an object with a 'type'")
    kind = d["type"]
    if kind not in _KINDS:
        raise InvalidInstanceError(f"unknown set-function type {kind!r}")
    allowed = _FIELDS[kind] | {"type"} | set(extra_allowed)
    unknown = set(d) - allowed
    if unknown:
        raise InvalidInstanceError(f"unknown fields in {kind} descriptor: {sorted(unknown)}")
    missing = _FIELDS[kind] - _OPTIONAL.get(kind, set()) - set(d)
    if missing:
        raise InvalidInstanceError(f"missing fields in {kind} descriptor: {sorted(missing)}")
    try:
        return _KINDS[kind](d)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInstanceError):
            raise
        raise InvalidInstanceError(f"bad {kind} descriptor: {exc}") from exc
