"""Persuasion instances: prior, receiver net utilities, per-state objectives."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidInstanceError, UnknownStateError
from .setfunctions import SetFunction, as_subset, setfunction_from_dict

PRIOR_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PersuasionInstance:
    """n receivers with binary actions, a finite state space and a common prior.

    ``utilities[i, t]`` is receiver i's net preference for action 1 in state t
    and ``objectives[t]`` is the sender's set function in state t.  States with
    zero prior mass are dropped on construction.  With ``rescale=True`` every
    objective is divided by the largest objective value (if it exceeds 1) and
    the factor is kept in ``scale``.
    """

    prior: np.ndarray
    utilities: np.ndarray
    objectives: tuple
    states: tuple = None
    rescale: bool = False
    scale: float = field(default=1.0, init=False)

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float).ravel()
        u = np.asarray(self.utilities, dtype=float)
        objs = tuple(self.objectives)
        if u.ndim != 2:
            raise DimensionMismatchError(f"utilities must be an n x |states| matrix, got shape {u.shape}")
        if len(objs) != len(prior):
            raise DimensionMismatchError(f"{len(objs)} objectives for {len(prior)} states")
        if u.shape[1] != len(prior):
            raise DimensionMismatchError(f"utilities have {u.shape[1]} state columns, prior has {len(prior)}")
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(prior)):
            raise InvalidInstanceError("prior and utilities must be finite")
        for f in objs:
            if not isinstance(f, SetFunction):
                raise InvalidInstanceError(f"objective {f!r} is not a SetFunction")
            if f.n != u.shape[0]:
                raise DimensionMismatchError(f"objective on {f.n} elements, instance has n={u.shape[0]}")
        states = tuple(self.states) if self.states is not None else tuple(f"s{t}" for t in range(len(prior)))
        if len(states) != len(prior) or len(set(states)) != len(states):
            raise DimensionMismatchError("state names must be distinct, one per prior entry")
        keep = prior != 0.0
        prior, u = prior[keep].copy(), u[:, keep].copy()
        objs = tuple(f for f, k in zip(objs, keep) if k)
        states = tuple(s for s, k in zip(states, keep) if k)
        scale = 1.0
        if self.rescale and objs:
            top = max(f.max_value() for f in objs)
            if top > 1.0:
                scale = top
                objs = tuple(f.scaled(1.0 / top) for f in objs)
        prior.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "utilities", u)
        object.__setattr__(self, "objectives", objs)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "scale", scale)

    @property
    def n(self) -> int:
        return self.utilities.shape[0]

    @property
    def num_states(self) -> int:
        return len(self.prior)

    def state_index(self, theta) -> int:
        if isinstance(theta, str):
            try:
                return self.states.index(theta)
            except ValueError:
                raise UnknownStateError(f"unknown state {theta!r}") from None
        t = int(theta)
        if not 0 <= t < self.num_states:
            raise UnknownStateError(f"state index {t} out of range")
        return t

    # serialization

    def to_dict(self) -> dict:
        objs = [f.to_dict() for f in self.objectives]
        d = {
            "n": self.n,
            "states": list(self.states),
            "prior": self.prior.tolist(),
            "utilities": self.utilities.tolist(),
        }
        if objs and all(o == objs[0] for o in objs):
            d["objectives"] = dict(objs[0], shared=True)
        else:
            d["objectives"] = objs
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def eval_objective(f: SetFunction, S) -> float:
    return f(S)


_TOP_FIELDS = {"n", "states", "prior", "utilities", "objectives", "rescale"}


def instance_from_dict(d: dict) -> PersuasionInstance:
    """Parse the instance file schema (see README); unknown fields are rejected."""
    if not isinstance(d, dict):
        raise InvalidInstanceError("instance file must hold a JSON object")
    unknown = set(d) - _TOP_FIELDS
    if unknown:
        raise InvalidInstanceError(f"unknown instance fields: {sorted(unknown)}")
    for key in ("n", "prior", "utilities", "objectives"):
        if key not in d:
            raise InvalidInstanceError(f"instance is missing field {key!r}")
    n = d["n"]
    if not isinstance(n, int) or n < 0:
        raise InvalidInstanceError(f"'n' must be a nonnegative integer, got {n!r}")
    prior = d["prior"]
    k = len(prior)
    u = d["utilities"]
    if isinstance(u, dict):
        if set(u) != {"action1", "action0"}:
            raise InvalidInstanceError("per-action utilities need exactly 'action1' and 'action0'")
        u = np.asarray(u["action1"], dtype=float) - np.asarray(u["action0"], dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != (n, k):
        raise DimensionMismatchError(f"utilities shape {u.shape}, expected ({n}, {k})")
    objs = d["objectives"]
    if isinstance(objs, dict):
        if not objs.get("shared", False):
            raise InvalidInstanceError("a single objective descriptor needs \"shared\": true")
        f = setfunction_from_dict(objs, extra_allowed=("shared",))
        objs = [f] * k
    else:
        objs = [setfunction_from_dict(o) for o in objs]
    return PersuasionInstance(prior, u, objs, states=d.get("states"), rescale=bool(d.get("rescale", False)))


def load_instance(text: str) -> PersuasionInstance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"instance file is not valid JSON: {exc}") from exc
    return instance_from_dict(d)


@dataclass
class ValidationReport:
    violations: list
    scale: float = 1.0

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_instance(inst: PersuasionInstance) -> ValidationReport:
    """All invariant violations; an empty list means the instance is valid."""
    out = []
    p = inst.prior
    if np.any(p < 0):
        out.append(f"prior has negative entries: {p[p < 0].tolist()}")
    total = float(p.sum())
    if abs(total - 1.0) > PRIOR_SUM_TOL:
        out.append(f"prior sums to {total:.12g}")
    for t, f in enumerate(inst.objectives):
        for v in f.violations():
            out.append(f"state {inst.states[t]}: {v}")
    return ValidationReport(out, inst.scale)


def require_valid(inst: PersuasionInstance) -> None:
    rep = validate_instance(inst)
    if not rep.ok:
        raise InvalidInstanceError("invalid instance: " + "; ".join(rep.violations), rep.violations)


@dataclass(frozen=True)
class StateClassification:
    """``positive[i, t]`` iff receiver i weakly prefers action 1 in state t."""

    positive: np.ndarray
    by_receiver: tuple  # Theta_i^+ as state indices
    by_state: tuple  # I_theta^+ as receiver tuples

    def negative_states(self, i):
        return tuple(int(t) for t in np.flatnonzero(~self.positive[i]))


def classify_states(inst: PersuasionInstance) -> StateClassification:
    pos = inst.utilities >= 0  # ties go to action 1
    pos.setflags(write=False)
    by_receiver = tuple(tuple(int(t) for t in np.flatnonzero(pos[i])) for i in range(inst.n))
    by_state = tuple(tuple(int(i) for i in np.flatnonzero(pos[:, t])) for t in range(inst.num_states))
    return StateClassification(pos, by_receiver, by_state)


def shared_objective_instance(prior: Sequence[float], utilities, f: SetFunction, states=None) -> PersuasionInstance:
    return PersuasionInstance(prior, utilities, [f] * len(prior), states=states)


__all__ = [
    "PersuasionInstance", "eval_objective", "instance_from_dict", "load_instance",
    "validate_instance", "require_valid", "ValidationReport", "classify_states",
    "StateClassification", "shared_objective_instance", "as_subset",
]
