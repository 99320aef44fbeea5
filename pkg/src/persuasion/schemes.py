"""Signaling-scheme containers and their file format.

Every scheme maps a state to a distribution over the set of receivers who
are recommended action 1.  Explicit schemes list their support; independent
and K-uniform schemes store marginal matrices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidInstanceError, UnknownStateError
from .setfunctions import as_subset

PROB_TOL = 1e-9


def _state_idx(states, theta):
    if isinstance(theta, str):
        if theta not in states:
            raise UnknownStateError(f"unknown state {theta!r}")
        return states.index(theta)
    t = int(theta)
    if not 0 <= t < len(states):
        raise UnknownStateError(f"state index {t} out of range")
    return t


@dataclass(frozen=True, eq=False)
class ExplicitScheme:
    """Per state, a list of (subset, probability) pairs."""

    n: int
    states: tuple
    support: tuple  # support[t] = ((S, p), ...)
    kind = "explicit"

    @classmethod
    def from_lists(cls, n, states, support):
        sup = tuple(
            tuple((as_subset(S, n), float(p)) for S, p in per_state) for per_state in support
        )
        if len(sup) != len(states):
            raise DimensionMismatchError(f"{len(sup)} state supports for {len(states)} states")
        return cls(int(n), tuple(states), sup)

    def marginals(self) -> np.ndarray:
        x = np.zeros((len(self.states), self.n))
        for t, per_state in enumerate(self.support):
            for S, p in per_state:
                x[t, list(S)] += p
        return x

    def problems(self) -> list[str]:
        """Structural issues: negative or >1 probabilities, per-state sums."""
        out = []
        for t, per_state in enumerate(self.support):
            total = 0.0
            for S, p in per_state:
                if not np.isfinite(p) or p < -PROB_TOL or p > 1 + PROB_TOL:
                    out.append(f"state {self.states[t]}: probability {p:g} of {list(S)} outside [0, 1]")
                total += p
            if abs(total - 1.0) > PROB_TOL:
                out.append(f"state {self.states[t]}: probabilities sum to {total:.12g}")
        return out

    def sample(self, theta, rng: np.random.Generator) -> tuple[int, ...]:
        per_state = self.support[_state_idx(self.states, theta)]
        p = np.clip(np.array([q for _, q in per_state]), 0.0, None)
        k = int(rng.choice(len(per_state), p=p / p.sum()))
        return per_state[k][0]

    def support_size(self) -> int:
        return sum(len(s) for s in self.support)

    def to_dict(self, value=None) -> dict:
        d = {
            "type": self.kind,
            "n": self.n,
            "states": list(self.states),
            "support": [
                [{"subset": list(S), "probability": p} for S, p in per_state]
                for per_state in self.support
            ],
            "marginals": self.marginals().tolist(),
        }
        if value is not None:
            d["value"] = value
        return d


class PrivateScheme(ExplicitScheme):
    """Direct private scheme: phi(theta, S) over recommendation profiles."""

    kind = "private"


class PublicScheme(ExplicitScheme):
    """Direct public scheme: pi(theta, S), S = receivers taking action 1."""

    kind = "public"


@dataclass(frozen=True, eq=False)
class IndependentScheme:
    """Receiver i is recommended action 1 in state t independently w.p. x[t, i]."""

    x: np.ndarray
    states: tuple
    kind = "independent"

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 2 or x.shape[0] != len(self.states):
            raise DimensionMismatchError("marginals must be a |states| x n matrix")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def n(self):
        return self.x.shape[1]

    def marginals(self):
        return self.x

    def problems(self):
        bad = (self.x < -PROB_TOL) | (self.x > 1 + PROB_TOL) | ~np.isfinite(self.x)
        return [f"state {self.states[t]}: marginal {self.x[t, i]:g} for receiver {i} outside [0, 1]"
                for t, i in zip(*np.nonzero(bad))]

    def sample(self, theta, rng):
        t = _state_idx(self.states, theta)
        return tuple(int(i) for i in np.flatnonzero(rng.random(self.n) < self.x[t]))

    def to_dict(self, value=None):
        d = {"type": self.kind, "n": self.n, "states": list(self.states), "marginals": self.x.tolist()}
        if value is not None:
            d["value"] = value
        return d


@dataclass(frozen=True, eq=False)
class FractionalKUniform:
    """K slots per state; slot j of state t is the vector x[t, j] in [0,1]^n.

    Deployed by picking a slot uniformly and then including each receiver
    independently with its slot probability.
    """

    x: np.ndarray  # shape (|states|, K, n)
    states: tuple
    kind = "k_uniform"

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 3 or x.shape[0] != len(self.states):
            raise DimensionMismatchError("slots must have shape (|states|, K, n)")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def K(self):
        return self.x.shape[1]

    @property
    def n(self):
        return self.x.shape[2]

    def marginals(self):
        return self.x.mean(axis=1)

    def problems(self):
        bad = (self.x < -PROB_TOL) | (self.x > 1 + PROB_TOL) | ~np.isfinite(self.x)
        return [f"state {self.states[t]}, slot {j}: entry {self.x[t, j, i]:g} outside [0, 1]"
                for t, j, i in zip(*np.nonzero(bad))]

    def sample(self, theta, rng):
        t = _state_idx(self.states, theta)
        j = int(rng.integers(self.K))
        return tuple(int(i) for i in np.flatnonzero(rng.random(self.n) < self.x[t, j]))

    def to_dict(self, value=None):
        d = {"type": self.kind, "K": self.K, "n": self.n, "states": list(self.states),
             "slots": self.x.tolist()}
        if value is not None:
            d["value"] = value
        return d


def scheme_to_json(scheme, value=None) -> str:
    return json.dumps(scheme.to_dict(value), indent=1) + "\n"


_SCHEME_FIELDS = {
    "private": {"type", "n", "states", "support", "marginals", "value"},
    "public": {"type", "n", "states", "support", "marginals", "value"},
    "independent": {"type", "n", "states", "marginals", "value"},
    "k_uniform": {"type", "K", "n", "states", "slots", "value"},
}


def scheme_from_dict(d: dict):
    """Inverse of ``to_dict``; structural checks only (see ``problems``)."""
    if not isinstance(d, dict) or d.get("type") not in _SCHEME_FIELDS:
        raise InvalidInstanceError("scheme file needs a 'type' of private, public, independent or k_uniform")
    kind = d["type"]
    unknown = set(d) - _SCHEME_FIELDS[kind]
    if unknown:
        raise InvalidInstanceError(f"unknown scheme fields: {sorted(unknown)}")
    try:
        n = int(d["n"])
        states = tuple(d["states"])
        if kind in ("private", "public"):
            cls = PrivateScheme if kind == "private" else PublicScheme
            sup = [[(e["subset"], e["probability"]) for e in per_state] for per_state in d["support"]]
            return cls.from_lists(n, states, sup)
        if kind == "independent":
            s = IndependentScheme(np.asarray(d["marginals"], dtype=float).reshape(len(states), n), states)
        else:
            s = FractionalKUniform(np.asarray(d["slots"], dtype=float).reshape(len(states), int(d["K"]), n), states)
        return s
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInstanceError):
            raise
        raise InvalidInstanceError(f"malformed {kind} scheme: {exc}") from exc


def load_scheme(text: str):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"scheme file is not valid JSON: {exc}") from exc
    return scheme_from_dict(d)
