"""Approximate private signaling for monotone submodular objectives.

Each state gets K slots x[t, j] in [0,1]^n.  The deployed scheme picks a
slot uniformly and recommends action 1 to each receiver independently with
the slot's probability, so its value is

    sum_t lambda_t / K  sum_j  F_t(x[t, j])

with F_t the multilinear extension of f_t.  Coordinates with u_i(t) >= 0 are
pinned to 1; the rest live in the down-monotone polytope

    sum_{t: u_i(t) < 0} (lambda_t / K) |u_i(t)| sum_j x[t, j, i]  <=  c_i,
    c_i = sum_{t: u_i(t) >= 0} lambda_t u_i(t),

which continuous greedy climbs with sampled gradients.
"""
from __future__ import annotations

import math
from statistics import NormalDist
from typing import NamedTuple

import numpy as np

from .errors import UnsupportedObjectiveError
from .instance import PersuasionInstance, require_valid
from .lp import LE, LinearProgram, solve_lp
from .schemes import FractionalKUniform
from .setfunctions import Additive, Anonymous, Coverage, SetFunction, as_subset

K_CAP = 200
STEPS = 100
MIN_SAMPLES = 1000
STEP_SAMPLE_BUDGET = 10**6
REPAIR_TOL = 1e-12


class KChoice(NamedTuple):
    formula: int
    cap: int
    effective: int
    capped: bool


def k_from_epsilon(n: int, num_states: int, eps: float, cap: int = K_CAP) -> KChoice:
    """Slot count ceil(108 n ln(2 n |states|) / eps^3), clipped to ``cap``.

    The log is natural.  The raw value is huge for any useful eps (31872
    for n=10, two states, eps=0.5), hence the cap.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if n < 1 or num_states < 1:
        raise ValueError("need n >= 1 and at least one state")
    raw = 108 * n * math.log(2 * n * num_states) / eps**3
    formula = max(1, math.ceil(raw - 1e-9 * raw))
    return KChoice(formula, cap, min(formula, cap), formula > cap)


def _z(confidence):
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def _vertex(x):
    return bool(np.all((x == 0) | (x == 1)))


def multilinear_estimate(f: SetFunction, x, samples: int, seed, confidence: float = 0.95):
    """Sample mean of f(R), R independent with marginals x, and the CI half-width.

    Additive f and 0/1 points are answered exactly with half-width 0.
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if isinstance(f, Additive):
        return float(f.weights @ x), 0.0
    if _vertex(x):
        return f(np.flatnonzero(x)), 0.0
    if samples < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(seed)
    vals = f.evaluate_batch(rng.random((samples, f.n)) < x)
    return float(vals.mean()), float(_z(confidence) * vals.std(ddof=1) / math.sqrt(samples))


def _partial(f, x, i, samples, seed):
    # E[f(R + i) - f(R - i)] with R ~ x; returns (mean, standard error)
    if isinstance(f, Additive):
        return float(f.weights[i]), 0.0
    rng = np.random.default_rng(seed)
    R = rng.random((samples, f.n)) < x
    R[:, i] = True
    hi = f.evaluate_batch(R)
    R[:, i] = False
    d = hi - f.evaluate_batch(R)
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(samples))


def multilinear_gradient_estimate(f: SetFunction, x, samples: int, seed):
    """Marginal-difference estimate of grad F(x), one seeded stream per coordinate.

    Returns (gradient, standard errors).
    """
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    g, se = np.zeros(f.n), np.zeros(f.n)
    for i in range(f.n):
        g[i], se[i] = _partial(f, x, i, samples, np.random.SeedSequence([int(seed), i]))
    return g, se


def _check_objectives(inst):
    for t, f in enumerate(inst.objectives):
        ok = isinstance(f, (Coverage, Additive)) or (isinstance(f, Anonymous) and f.is_submodular())
        if not ok:
            raise UnsupportedObjectiveError(
                f"state {inst.states[t]}: continuous greedy needs a coverage, additive or "
                f"concave anonymous objective, got {f.kind}")


def relaxed_slacks(inst: PersuasionInstance, x) -> np.ndarray:
    """sum_t (lambda_t / K) sum_j x[t, j, i] u_i(t) per receiver."""
    xm = np.asarray(x, dtype=float).mean(axis=1)
    return (inst.utilities * (inst.prior[None, :] * xm.T)).sum(axis=1)


def relaxation_value(inst: PersuasionInstance, x) -> float:
    """Exact relaxed objective (2^n enumeration per slot)."""
    from .evaluate import multilinear_exact

    x = np.asarray(x, dtype=float)
    return float(sum(inst.prior[t] * np.mean([multilinear_exact(inst.objectives[t], xj) for xj in x[t]])
                     for t in range(inst.num_states)))


class GreedyPolytope:
    """Free coordinates (t, j, i) with u_i(t) < 0 and their budget rows."""

    def __init__(self, inst: PersuasionInstance, K: int):
        self.inst, self.K = inst, K
        u, lam = inst.utilities, inst.prior
        neg = u < 0  # n x |states|
        self.coords = [(t, j, i) for t in range(inst.num_states) for j in range(K)
                       for i in range(inst.n) if neg[i, t]]
        self.budget = np.where(neg, 0.0, lam[None, :] * u).sum(axis=1)
        A = np.zeros((inst.n, len(self.coords)))
        for c, (t, j, i) in enumerate(self.coords):
            A[i, c] = lam[t] / K * -u[i, t]
        self.A = A

    def base(self) -> np.ndarray:
        x = np.zeros((self.inst.num_states, self.K, self.inst.n))
        x[:] = (self.inst.utilities >= 0).T[:, None, :]
        return x

    def assemble(self, y) -> np.ndarray:
        x = self.base()
        for c, (t, j, i) in enumerate(self.coords):
            x[t, j, i] = y[c]
        return x

    def direction(self, grad) -> np.ndarray:
        if not self.coords:
            return np.zeros(0)
        lp = LinearProgram(np.asarray(grad, dtype=float), self.A, [LE] * self.inst.n, self.budget,
                           upper=np.ones(len(self.coords)))
        sol = solve_lp(lp)
        if not sol.optimal:
            raise RuntimeError(f"direction LP unexpectedly {sol.status}")
        return np.clip(sol.x, 0.0, 1.0)

    def repair(self, y) -> np.ndarray:
        """Scale each receiver's free coordinates so its budget row holds."""
        y = np.clip(y, 0.0, 1.0)
        load = self.A @ y
        for i in np.flatnonzero(load > self.budget + REPAIR_TOL):
            cols = self.A[i] > 0
            y[cols] *= max(self.budget[i], 0.0) / load[i]
        return y


def samples_per_coordinate(eps: float, num_coords: int) -> int:
    want = max(MIN_SAMPLES, math.ceil(10 / eps**2))
    if num_coords:
        want = min(want, STEP_SAMPLE_BUDGET // num_coords)
    return max(2, want)


def continuous_greedy(inst: PersuasionInstance, K: int, eps: float = 0.05, seed: int = 0,
                      steps: int = STEPS, samples: int | None = None,
                      trace: list | None = None) -> FractionalKUniform:
    """Continuous greedy over the K-slot relaxation.

    Each of ``steps`` rounds estimates the gradient at the current point,
    solves a direction LP over the polytope and moves 1/steps along it.
    Coordinate (t, j, i) at step s samples from SeedSequence([seed, s, t, j, i]),
    so the result depends on the seed only.  ``trace``, if given, collects
    the largest budget violation after every step.
    """
    require_valid(inst)
    _check_objectives(inst)
    if K < 1 or steps < 1:
        raise ValueError("K and steps must be positive")
    poly = GreedyPolytope(inst, K)
    m = len(poly.coords)
    y = np.zeros(m)
    if m == 0:
        return FractionalKUniform(poly.base(), inst.states)
    per = samples or samples_per_coordinate(eps, m)
    lam = inst.prior
    for s in range(steps):
        x = poly.assemble(y)
        grad = np.empty(m)
        for c, (t, j, i) in enumerate(poly.coords):
            d, _ = _partial(inst.objectives[t], x[t, j], i, per, np.random.SeedSequence([int(seed), s, t, j, i]))
            grad[c] = lam[t] / K * d
        y = y + poly.direction(grad) / steps
        if trace is not None:
            trace.append(float(np.max(poly.A @ y - poly.budget)))
    return FractionalKUniform(poly.assemble(poly.repair(y)), inst.states)


def solve_private_submodular(inst: PersuasionInstance, eps: float = 0.05, K: int | None = None,
                             seed: int = 0, steps: int = STEPS, cap: int = K_CAP):
    """Full pipeline: pick K (override or capped formula), run continuous greedy.

    Returns (scheme, KChoice)."""
    choice = k_from_epsilon(inst.n, inst.num_states, eps, cap)
    if K is not None:
        choice = choice._replace(effective=int(K))
    return continuous_greedy(inst, choice.effective, eps, seed, steps), choice


def signal_runtime(inst: PersuasionInstance, sol: FractionalKUniform, theta, seed) -> tuple[int, ...]:
    """Draw one recommendation profile for state ``theta``: a uniform slot,
    then independent coin flips with that slot's probabilities."""
    t = inst.state_index(theta)
    return as_subset(sol.sample(t, np.random.default_rng(seed)), inst.n)
