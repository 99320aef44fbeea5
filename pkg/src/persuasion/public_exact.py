"""Exactly optimal public signaling and the private/public gap instance.

Variables pi(theta, S); for each signal S and each i in S the posterior must
persuade i:  sum_theta lambda(theta) pi(theta, S) u_i(theta) >= 0.

Presolve before the dense solve:
  * a signal containing a receiver with u_i < 0 in every state carries no mass;
  * rows of receivers with u_i >= 0 in every state always hold;
  * rows that are positive multiples of each other within a signal are merged.
"""
from __future__ import annotations

import numpy as np

from .errors import InstanceTooLargeError
from .instance import PersuasionInstance, require_valid
from .lp import EQ, GE, LinearProgram, solve_lp, write_lp
from .schemes import PublicScheme
from .setfunctions import Anonymous, all_membership

PUBLIC_MAX_N = 12
CELL_BUDGET = 2 * 10**7
SUPPORT_EPS = 1e-13
LIFT_TOL = 1e-12


def _row_key(v):
    return tuple(np.round(v / np.abs(v).max(), 12))


def build_public_lp(inst: PersuasionInstance):
    """Presolved public LP; returns (lp, columns) with columns[j] = (theta, S)."""
    n, k = inst.n, inst.num_states
    u = inst.utilities
    lam = inst.prior
    never = np.all(u < 0, axis=1)
    always = np.all(u >= 0, axis=1)
    X = all_membership(n)
    tables = [f.table() for f in inst.objectives]
    columns, c = [], []
    rows = []  # (column offset, coefficient vector over the k columns of S)
    for m in range(1 << n):
        memb = X[m]
        if np.any(memb & never):
            continue
        S = tuple(int(i) for i in np.flatnonzero(memb))
        base = len(columns)
        for t in range(k):
            columns.append((t, S))
            c.append(lam[t] * tables[t][m])
        seen = set()
        for i in S:
            if always[i]:
                continue
            coef = lam * u[i]
            key = _row_key(coef)
            if key in seen:
                continue
            seen.add(key)
            rows.append((base, coef))
    nr, nc = len(rows) + k, len(columns)
    if nr * (nc + nr) > CELL_BUDGET:
        raise InstanceTooLargeError(
            f"public LP too large for the dense solver ({nr} rows x {nc} columns after presolve)")
    A = np.zeros((nr, nc))
    for r, (base, coef) in enumerate(rows):
        A[r, base: base + k] = coef
    cols_t = np.array([t for t, _ in columns], dtype=int)
    A[len(rows) + cols_t, np.arange(nc)] = 1.0
    senses = [GE] * len(rows) + [EQ] * k
    rhs = np.r_[np.zeros(len(rows)), np.ones(k)]
    return LinearProgram(np.array(c), A, senses, rhs), columns


def solve_public_enumeration(inst: PersuasionInstance, max_n: int = PUBLIC_MAX_N, dump_lp=None):
    """Optimal direct public scheme; returns (scheme, value)."""
    require_valid(inst)
    if inst.n > max_n:
        raise InstanceTooLargeError(f"public enumeration is capped at n <= {max_n}, got n={inst.n}")
    lp, columns = build_public_lp(inst)
    if dump_lp is not None:
        write_lp(lp, dump_lp)
    sol = solve_lp(lp)
    if not sol.optimal:
        raise RuntimeError(f"public LP unexpectedly {sol.status}")
    signals = {}
    for (t, S), p in zip(columns, sol.x):
        if p > SUPPORT_EPS:
            signals.setdefault(S, np.zeros(inst.num_states))[t] += p
    support = [[] for _ in range(inst.num_states)]
    for S, pi in lift_signals(inst, signals).items():
        for t in np.flatnonzero(pi > 0):
            support[t].append((S, float(pi[t])))
    for per_state in support:
        per_state.sort()
    return PublicScheme.from_lists(inst.n, inst.states, support), sol.objective


def lift_signals(inst: PersuasionInstance, signals: dict) -> dict:
    """Add to each signal every receiver who weakly prefers action 1 under it.

    ``signals`` maps S to the vector pi(., S).  Receivers break ties toward
    action 1, so the lifted set is the action profile actually played; by
    monotonicity the sender's value cannot drop.  Signals that coincide
    after lifting are merged.
    """
    out = {}
    for S, pi in signals.items():
        slack = inst.utilities @ (inst.prior * pi)
        T = tuple(sorted(set(S) | {int(i) for i in np.flatnonzero(slack >= -LIFT_TOL)}))
        out[T] = out.get(T, 0) + pi
    return out


def gen_gap_example(n: int) -> PersuasionInstance:
    """n identical receivers, states H/L with prior 1/(n+1), n/(n+1),
    u_i = (+1, -1), shared objective min(|S|, 1)."""
    if n < 2:
        raise ValueError("the gap example needs n >= 2")
    f = Anonymous.at_least_one(n)
    u = np.tile([1.0, -1.0], (n, 1))
    return PersuasionInstance([1.0 / (n + 1), n / (n + 1.0)], u, [f, f], states=("H", "L"))
