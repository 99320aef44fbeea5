"""Verification harness: persuasiveness slacks and sender utility of any scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable

import numpy as np

from .errors import DimensionMismatchError
from .instance import PersuasionInstance
from .schemes import ExplicitScheme, FractionalKUniform, IndependentScheme, PublicScheme
from .setfunctions import TABLE_MAX_N

DEFAULT_TOL = 1e-7


@dataclass
class EvaluationReport:
    scheme_type: str
    action1_slack: np.ndarray
    action0_slack: np.ndarray
    utility: float = math.nan
    utility_half_width: float = 0.0
    utility_exact: bool = True
    violations: list = field(default_factory=list)
    tol: float = DEFAULT_TOL
    seed: int = None
    signal_slacks: list = field(default_factory=list)  # public: (S, i, slack)

    @property
    def persuasive(self) -> bool:
        return not self.violations


def _check_dims(inst, scheme):
    if scheme.n != inst.n or len(scheme.states) != inst.num_states:
        raise DimensionMismatchError(
            f"scheme is for n={scheme.n}, {len(scheme.states)} states; "
            f"instance has n={inst.n}, {inst.num_states} states")


def marginal_slacks(inst: PersuasionInstance, x: np.ndarray) -> np.ndarray:
    """sum_theta lambda(theta) x[theta, i] u_i(theta) for every receiver i."""
    return (inst.utilities * (inst.prior[None, :] * np.asarray(x, dtype=float).T)).sum(axis=1)


def support_slacks(inst: PersuasionInstance, scheme: ExplicitScheme) -> np.ndarray:
    """Same quantity summed over the explicit support instead of the marginals."""
    out = np.zeros(inst.n)
    for t, per_state in enumerate(scheme.support):
        lam = inst.prior[t]
        for S, p in per_state:
            for i in S:
                out[i] += lam * p * inst.utilities[i, t]
    return out


def public_signal_slacks(inst, scheme: PublicScheme):
    signals = {}
    for t, per_state in enumerate(scheme.support):
        for S, p in per_state:
            signals.setdefault(S, np.zeros(inst.num_states))[t] += p
    out = []
    for S in sorted(signals):
        post = inst.prior * signals[S]
        for i in S:
            out.append((S, i, float(inst.utilities[i] @ post)))
    return out


def check_persuasive(inst: PersuasionInstance, scheme, tol: float = DEFAULT_TOL) -> EvaluationReport:
    """Action-1 persuasiveness of ``scheme``; action-0 slacks are informational.

    Private, independent and K-uniform schemes are checked through their
    marginals; public schemes per supported signal.
    """
    _check_dims(inst, scheme)
    x = scheme.marginals()
    s1 = marginal_slacks(inst, x)
    s0 = marginal_slacks(inst, 1.0 - x)
    rep = EvaluationReport(scheme.kind, s1, s0, tol=tol)
    if isinstance(scheme, PublicScheme):
        rep.signal_slacks = public_signal_slacks(inst, scheme)
        for S, i, s in rep.signal_slacks:
            if s < -tol:
                rep.violations.append(f"signal {list(S)}: receiver {i} action-1 slack {s:.3e} < -{tol:g}")
    else:
        for i in np.flatnonzero(s1 < -tol):
            rep.violations.append(f"receiver {i}: action-1 slack {s1[i]:.3e} < -{tol:g}")
    return rep


def multilinear_exact(f, x) -> float:
    """E f(S) with S independent with marginals x, by 2^n enumeration."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n > TABLE_MAX_N:
        raise ValueError(f"exact multilinear extension needs n <= {TABLE_MAX_N}")
    p = np.ones(1)
    for i in range(n):
        p = np.concatenate([p * (1 - x[i]), p * x[i]])
    return float(p @ f.table())


def sender_utility_exact(inst: PersuasionInstance, scheme) -> float:
    _check_dims(inst, scheme)
    total = 0.0
    if isinstance(scheme, ExplicitScheme):
        for t, per_state in enumerate(scheme.support):
            f = inst.objectives[t]
            total += inst.prior[t] * sum(p * f(S) for S, p in per_state)
    elif isinstance(scheme, IndependentScheme):
        for t in range(inst.num_states):
            total += inst.prior[t] * multilinear_exact(inst.objectives[t], scheme.x[t])
    elif isinstance(scheme, FractionalKUniform):
        for t in range(inst.num_states):
            f = inst.objectives[t]
            total += inst.prior[t] * np.mean([multilinear_exact(f, xj) for xj in scheme.x[t]])
    else:
        raise TypeError(f"unsupported scheme type {type(scheme).__name__}")
    return float(total)


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Counter-based per-trial stream: independent of evaluation order."""
    return np.random.SeedSequence([int(seed), int(trial)])


def sender_utility_mc(inst: PersuasionInstance, sampler: Callable, trials: int, seed: int,
                      confidence: float = 0.95):
    """Monte Carlo sender utility: theta ~ prior, S = sampler(theta, seed_t).

    ``seed_t`` is a ``SeedSequence`` keyed by (seed, t).  Returns
    (mean, half-width of the normal-approximation confidence interval).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2**32]))
    thetas = rng.choice(inst.num_states, size=trials, p=inst.prior / inst.prior.sum())
    vals = np.empty(trials)
    for t in range(trials):
        th = int(thetas[t])
        vals[t] = inst.objectives[th](sampler(th, trial_seed(seed, t)))
    mean = float(vals.mean())
    if trials == 1:
        return mean, math.inf if vals.std() else 0.0
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    return mean, float(z * vals.std(ddof=1) / math.sqrt(trials))


def scheme_sampler(scheme) -> Callable:
    """sampler(theta, seed) drawing from any scheme type."""

    def sample(theta, seed):
        return scheme.sample(theta, np.random.default_rng(seed))

    return sample


def evaluate(inst, scheme, tol=DEFAULT_TOL, mc_trials=None, seed=0) -> EvaluationReport:
    """Persuasiveness plus exact utility, or Monte Carlo when ``mc_trials`` is set."""
    rep = check_persuasive(inst, scheme, tol)
    if mc_trials:
        rep.utility, rep.utility_half_width = sender_utility_mc(inst, scheme_sampler(scheme), mc_trials, seed)
        rep.utility_exact = False
        rep.seed = seed
    elif isinstance(scheme, ExplicitScheme) or inst.n <= TABLE_MAX_N:
        rep.utility = sender_utility_exact(inst, scheme)
    else:
        seed = 0 if seed is None else seed
        rep.utility, rep.utility_half_width = sender_utility_mc(inst, scheme_sampler(scheme), 10**5, seed)
        rep.utility_exact = False
        rep.seed = seed
    return rep
