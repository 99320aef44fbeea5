"""Independent, objective-oblivious signaling for two-state instances.

The scheme recommends action 1 to each receiver independently, with the
largest marginals its own persuasiveness constraint allows:

    u(s0) <  0, u(s1) <  0 :  x = 0 in both states
    u(s0) >= 0, u(s1) >= 0 :  x = 1 in both states
    u(s0) >= 0 > u(s1)     :  x_s0 = 1,  x_s1 = min(-l0 u(s0) / (l1 u(s1)), 1)
    u(s1) >= 0 > u(s0)     :  mirrored

The division only happens when the denominator's utility is strictly
negative (u = 0 routes to the ">= 0" branch), so it is always defined.
Among independent schemes this is optimal for every monotone objective
and, for submodular objectives, within 1 - 1/e of the best private scheme.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import InvalidDistributionError, WrongArityError
from .evaluate import multilinear_exact, sender_utility_mc, scheme_sampler
from .instance import PersuasionInstance
from .schemes import IndependentScheme, PrivateScheme
from .setfunctions import TABLE_MAX_N, Anonymous, SetFunction, all_membership, as_subset

CORRELATION_GAP_BOUND = math.e / (math.e - 1)


def oblivious_marginals(inst: PersuasionInstance) -> IndependentScheme:
    if inst.num_states != 2:
        raise WrongArityError(f"the oblivious scheme needs exactly two states, got {inst.num_states}")
    l0, l1 = inst.prior
    x = np.zeros((2, inst.n))
    for i in range(inst.n):
        u0, u1 = inst.utilities[i]
        if u0 < 0 and u1 < 0:
            continue
        if u0 >= 0 and u1 >= 0:
            x[:, i] = 1.0
        elif u0 >= 0:
            x[0, i] = 1.0
            x[1, i] = min(-l0 * u0 / (l1 * u1), 1.0)
        else:
            x[1, i] = 1.0
            x[0, i] = min(-l1 * u1 / (l0 * u0), 1.0)
    return IndependentScheme(x, inst.states)


def signal_independent(scheme: IndependentScheme, theta, seed) -> tuple[int, ...]:
    return scheme.sample(theta, np.random.default_rng(seed))


class IndependentValue(float):
    """Float value that also records how it was obtained."""

    exact: bool = True
    half_width: float = 0.0


def independent_value_exact(inst: PersuasionInstance, scheme: IndependentScheme,
                            mc_trials: int = 10**5, seed: int = 0) -> IndependentValue:
    """Exact expected sender utility for n <= 20; Monte Carlo beyond, flagged
    by ``exact = False`` with the CI half-width attached."""
    if inst.n <= TABLE_MAX_N:
        v = IndependentValue(sum(inst.prior[t] * multilinear_exact(inst.objectives[t], scheme.x[t])
                                 for t in range(inst.num_states)))
        return v
    mean, hw = sender_utility_mc(inst, scheme_sampler(scheme), mc_trials, seed)
    v = IndependentValue(mean)
    v.exact = False
    v.half_width = hw
    return v


def correlation_gap_estimate(f: SetFunction, x, correlated, tol: float = 1e-9) -> float:
    """E_corr f / E_indep f for a correlated distribution with marginals ``x``.

    ``correlated`` is a sequence of (subset, probability) pairs or a dict.
    For submodular ``f`` the ratio must not exceed e/(e-1); a larger value
    raises ``AssertionError``.
    """
    x = np.asarray(x, dtype=float)
    items = list(correlated.items()) if isinstance(correlated, dict) else list(correlated)
    probs = np.array([float(p) for _, p in items])
    if np.any(probs < -tol) or abs(probs.sum() - 1.0) > tol:
        raise InvalidDistributionError("correlated distribution must be nonnegative and sum to 1")
    marg = np.zeros(f.n)
    e_corr = 0.0
    for S, p in items:
        S = as_subset(S, f.n)
        marg[list(S)] += p
        e_corr += p * f(S)
    if np.max(np.abs(marg - x), initial=0.0) > tol:
        raise InvalidDistributionError(
            f"correlated marginals {marg.round(12).tolist()} differ from x {x.tolist()}")
    e_ind = multilinear_exact(f, x)
    if e_ind <= 0:
        return 1.0 if e_corr <= 0 else math.inf
    ratio = e_corr / e_ind
    if f.is_submodular():
        assert ratio <= CORRELATION_GAP_BOUND + 1e-6, f"correlation gap {ratio} exceeds e/(e-1)"
    return ratio


def independent_distribution(x):
    """The independent distribution with marginals x as (subset, prob) pairs."""
    x = np.asarray(x, dtype=float)
    X = all_membership(len(x))
    p = np.prod(np.where(X, x, 1 - x), axis=1)
    return [(tuple(int(i) for i in np.flatnonzero(row)), float(q)) for row, q in zip(X, p) if q > 0]


# lower-bound family for oblivious schemes with many states


def lowerbound_states(n):
    return ("s0",) + tuple(f"s{j}" for j in range(1, n * n + 1))


def gen_oblivious_lowerbound(n: int, seed: int = 0, assignment=None) -> PersuasionInstance:
    """n receivers and m + 1 = n^2 + 1 equally likely states.

    State s0 has u = +1 and the zero objective; every other state has u = -1
    and either the zero objective or min(|S|, 1).  Exactly n of them get
    min(|S|, 1), chosen by ``assignment`` (state indices 1..m) or at random
    from ``seed``.
    """
    if n < 2:
        raise ValueError("the lower-bound family needs n >= 2")
    m = n * n
    if assignment is None:
        rng = np.random.default_rng(seed)
        assignment = sorted(int(j) + 1 for j in rng.choice(m, size=n, replace=False))
    assignment = set(int(j) for j in assignment)
    if len(assignment) != n or not assignment <= set(range(1, m + 1)):
        raise ValueError(f"assignment must pick {n} distinct states among 1..{m}")
    zero = Anonymous([0.0] * (n + 1))
    one = Anonymous.at_least_one(n)
    objs = [zero] + [one if j in assignment else zero for j in range(1, m + 1)]
    u = np.full((n, m + 1), -1.0)
    u[:, 0] = 1.0
    return PersuasionInstance(np.full(m + 1, 1.0 / (m + 1)), u, objs, states=lowerbound_states(n))


def all_assignments(n):
    return itertools.combinations(range(1, n * n + 1), n)


def averaged_lowerbound_instance(n: int) -> PersuasionInstance:
    """Objectives averaged over uniformly random assignments: each bad state
    carries (n/m) min(|S|, 1).  Its private optimum is the best expected value
    any single (hence oblivious) scheme gets against a random assignment."""
    m = n * n
    base = gen_oblivious_lowerbound(n, assignment=range(1, n + 1))
    avg = Anonymous([0.0] + [n / m] * n)
    zero = Anonymous([0.0] * (n + 1))
    return PersuasionInstance(base.prior, base.utilities, [zero] + [avg] * m, states=base.states)


def lowerbound_oblivious_scheme(n: int) -> PrivateScheme:
    """Always recommend everyone in s0; in state s_j (j = 1..n) recommend
    only receiver j-1; recommend nobody elsewhere."""
    m = n * n
    support = [[(tuple(range(n)), 1.0)]]
    for j in range(1, m + 1):
        support.append([((j - 1,), 1.0)] if j <= n else [((), 1.0)])
    return PrivateScheme.from_lists(n, lowerbound_states(n), support)
