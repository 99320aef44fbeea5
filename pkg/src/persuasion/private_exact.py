"""Exactly optimal private signaling.

Master LP over columns (theta, S) with phi(theta, S) >= 0:

    max   sum lambda(theta) f_theta(S) phi(theta, S)
    s.t.  sum_theta lambda(theta) u_i(theta) sum_{S containing i} phi(theta, S) >= 0   (each i)
          sum_S phi(theta, S) = 1                                                   (each theta)

The marginals x_{theta,i} are substituted out.  Rows 0..n-1 are the
persuasiveness rows, rows n.. the per-state normalization rows.
"""
from __future__ import annotations

import numpy as np

from .errors import InstanceTooLargeError, UnsupportedObjectiveError
from .instance import PersuasionInstance, classify_states, require_valid
from .lp import EQ, GE, Column, LinearProgram, solve_lp, solve_with_column_generation, write_lp
from .oracles import has_fast_path, price_column
from .schemes import PrivateScheme
from .setfunctions import TABLE_MAX_N, all_membership, subset_to_mask

ENUM_DEFAULT_MAX_N = 12
SUPPORT_EPS = 1e-13


def _column(inst: PersuasionInstance, t: int, S) -> tuple[float, np.ndarray]:
    n, k = inst.n, inst.num_states
    lam = inst.prior[t]
    a = np.zeros(n + k)
    idx = list(S)
    a[idx] = lam * inst.utilities[idx, t]
    a[n + t] = 1.0
    return float(lam * inst.objectives[t](S)), a


def _master(inst, columns) -> LinearProgram:
    n, k = inst.n, inst.num_states
    c = np.empty(len(columns))
    A = np.empty((n + k, len(columns)))
    for j, (t, S) in enumerate(columns):
        c[j], A[:, j] = _column(inst, t, S)
    names = tuple(f"phi_{inst.states[t]}_{'_'.join(map(str, S)) or 'none'}" for t, S in columns)
    return LinearProgram(c, A, [GE] * n + [EQ] * k, np.r_[np.zeros(n), np.ones(k)], names=names)


def _extract(inst, columns, x) -> PrivateScheme:
    support = [[] for _ in range(inst.num_states)]
    for (t, S), p in zip(columns, x):
        if p > SUPPORT_EPS:
            support[t].append((S, float(p)))
    for per_state in support:
        per_state.sort()
    return PrivateScheme.from_lists(inst.n, inst.states, support)


def always_recommend_preferred(inst: PersuasionInstance) -> np.ndarray:
    """Boolean |states| x n mask of marginals that can be fixed to 1.

    Under monotone objectives some optimal scheme always recommends action 1
    to receiver i in every state where u_i >= 0.
    """
    return classify_states(inst).positive.T.copy()


def solve_private_enumeration(inst: PersuasionInstance, max_n: int = ENUM_DEFAULT_MAX_N,
                              fix_preferred: bool = False, dump_lp=None):
    """Solve the full private LP with one column per (state, subset).

    ``fix_preferred`` keeps only columns S containing every receiver that
    weakly prefers action 1 in that state.  Returns (scheme, value).
    """
    require_valid(inst)
    n = inst.n
    cap = min(max_n, TABLE_MAX_N)
    if n > cap:
        raise InstanceTooLargeError(
            f"enumeration is capped at n <= {cap} (got n={n}); "
            "use column generation or the submodular approximation")
    X = all_membership(n)
    masks = np.arange(1 << n)
    fixed = always_recommend_preferred(inst)
    columns = []
    for t in range(inst.num_states):
        need = subset_to_mask(np.flatnonzero(fixed[t])) if fix_preferred else 0
        for m in masks[(masks & need) == need]:
            columns.append((t, tuple(int(i) for i in np.flatnonzero(X[m]))))
    lp = _master_fast(inst, columns)
    if dump_lp is not None:
        write_lp(lp, dump_lp)
    sol = solve_lp(lp)
    if not sol.optimal:  # the all-empty scheme is always feasible
        raise RuntimeError(f"private LP unexpectedly {sol.status}")
    return _extract(inst, columns, sol.x), sol.objective


def _master_fast(inst, columns):
    # vectorised assembly for the enumerated master
    n, k = inst.n, inst.num_states
    tables = [f.table() for f in inst.objectives]
    ts = np.array([t for t, _ in columns])
    memb = np.zeros((len(columns), n), dtype=bool)
    c = np.empty(len(columns))
    for j, (t, S) in enumerate(columns):
        memb[j, list(S)] = True
        c[j] = tables[t][subset_to_mask(S)]
    lam = inst.prior[ts]
    c *= lam
    A = np.zeros((n + k, len(columns)))
    A[:n] = (memb * (lam[:, None] * inst.utilities[:, ts].T)).T
    A[n + ts, np.arange(len(columns))] = 1.0
    return LinearProgram(c, A, [GE] * n + [EQ] * k, np.r_[np.zeros(n), np.ones(k)])


def solve_private_column_generation(inst: PersuasionInstance, dump_lp=None, return_details=False):
    """Same optimum as enumeration, generating columns by pricing.

    Starts from the columns {empty set, I_theta^+} per state.  Each round
    prices every state with ``maximize_plus_additive``.  Returns
    (scheme, value), or (scheme, value, ColumnGenerationResult).
    """
    require_valid(inst)
    for t, f in enumerate(inst.objectives):
        if not has_fast_path(f) and f.n > TABLE_MAX_N:
            raise UnsupportedObjectiveError(
                f"state {inst.states[t]}: no pricing oracle for {f.kind} objectives at n={f.n} > {TABLE_MAX_N}")
    n = inst.n
    cls = classify_states(inst)
    columns = []
    for t in range(inst.num_states):
        columns.append((t, ()))
        if cls.by_state[t]:
            columns.append((t, cls.by_state[t]))
    master = _master(inst, columns)

    def pricing(duals):
        out = []
        for t in range(inst.num_states):
            w = duals[:n] * inst.prior[t] * inst.utilities[:, t]
            S, rc = price_column(inst, t, w, duals[n + t])
            obj, a = _column(inst, t, S)
            out.append(Column(obj, a, tag=(t, S), reduced_cost=rc))
        return out

    res = solve_with_column_generation(master, pricing, tags=columns)
    if dump_lp is not None:
        write_lp(res.master, dump_lp)
    if not res.solution.optimal:
        raise RuntimeError(f"private master unexpectedly {res.solution.status}")
    scheme = _extract(inst, res.tags, res.solution.x)
    if return_details:
        return scheme, res.solution.objective, res
    return scheme, res.solution.objective
