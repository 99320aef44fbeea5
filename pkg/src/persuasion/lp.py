"""Dense two-phase primal simplex with dual extraction, plus a column-generation driver.

Pivoting uses Bland's rule (smallest eligible index enters; ratio-test ties
leave by smallest basic index), so degenerate problems cannot cycle.

Tolerances: 1e-9 for feasibility during pivoting, 1e-7 on reduced costs.
Duals are shadow prices in the LP's own sense: ``duals[r]`` is the change in
the optimal objective per unit increase of ``rhs[r]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInstanceError, SolverStalledError

FEAS_TOL = 1e-9
OPT_TOL = 1e-7
MAX_ITER = 10**6

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """max/min c.x  s.t.  A x (senses) rhs,  lower <= x <= upper."""

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None
    maximize: bool = True
    names: tuple = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float)
        nv = len(c)
        if A.size == 0:
            A = A.reshape(0, nv)
        if A.ndim != 2 or A.shape[1] != nv:
            raise InvalidInstanceError(f"constraint matrix shape {A.shape} does not match {nv} variables")
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        senses = tuple(self.senses)
        if len(rhs) != A.shape[0] or len(senses) != A.shape[0]:
            raise InvalidInstanceError("one sense and one right-hand side per row required")
        bad = set(senses) - {LE, EQ, GE}
        if bad:
            raise InvalidInstanceError(f"unknown row senses {bad}")
        lo = np.zeros(nv) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        hi = np.full(nv, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if len(lo) != nv or len(hi) != nv:
            raise InvalidInstanceError("bounds must have one entry per variable")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(rhs))):
            raise InvalidInstanceError("LP coefficients must be finite")
        if np.any(lo == np.inf) or np.any(hi == -np.inf) or np.any(lo > hi):
            raise InvalidInstanceError("inconsistent variable bounds")
        for name, val in (("c", c), ("A", A), ("rhs", rhs), ("lower", lo), ("upper", hi)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "senses", senses)
        if self.names is not None and len(self.names) != nv:
            raise InvalidInstanceError("one name per variable required")

    @property
    def num_vars(self):
        return len(self.c)

    @property
    def num_rows(self):
        return self.A.shape[0]


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray = None
    duals: np.ndarray = None
    reduced_costs: np.ndarray = None
    objective: float = math.nan
    iterations: int = 0
    basis: tuple = ()

    @property
    def optimal(self):
        return self.status == "optimal"


def _standardize(lp: LinearProgram):
    """Map to  A' z (senses) b',  z >= 0  with x = offset + T z."""
    nv = lp.num_vars
    cols, T_entries, offset = [], [], np.zeros(nv)
    bound_rows = []
    for j in range(nv):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            offset[j] = lo
            k = len(cols)
            cols.append(lp.A[:, j])
            T_entries.append((j, k, 1.0))
            if np.isfinite(hi):
                bound_rows.append((k, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append(-lp.A[:, j])
            T_entries.append((j, len(cols) - 1, -1.0))
        else:
            cols.append(lp.A[:, j])
            T_entries.append((j, len(cols) - 1, 1.0))
            cols.append(-lp.A[:, j])
            T_entries.append((j, len(cols) - 1, -1.0))
    nz = len(cols)
    T = np.zeros((nv, nz))
    for j, k, s in T_entries:
        T[j, k] = s
    A = np.column_stack(cols) if cols else np.zeros((lp.num_rows, 0))
    b = lp.rhs - lp.A @ offset
    senses = list(lp.senses)
    if bound_rows:
        extra = np.zeros((len(bound_rows), nz))
        for r, (k, ub) in enumerate(bound_rows):
            extra[r, k] = 1.0
        A = np.vstack([A, extra])
        b = np.concatenate([b, [ub for _, ub in bound_rows]])
        senses += [LE] * len(bound_rows)
    sign = 1.0 if lp.maximize else -1.0
    cz = sign * (T.T @ lp.c)
    const = sign * float(lp.c @ offset)
    return A, b, senses, cz, const, T, offset


class _Tableau:
    def __init__(self, A, b, senses):
        m, nz = A.shape
        A = A.copy()
        b = b.copy()
        self.row_sign = np.ones(m)
        senses = list(senses)
        for r in range(m):
            if b[r] < 0 or (b[r] == 0 and senses[r] == GE):
                A[r] *= -1
                b[r] *= -1
                self.row_sign[r] = -1.0
                senses[r] = {LE: GE, GE: LE, EQ: EQ}[senses[r]]
        # slack (+1 for <=, -1 for >=) then one identity column per row:
        # the slack itself for <= rows, an artificial otherwise
        n_slack = sum(s != EQ for s in senses)
        n_art = sum(s != LE for s in senses)
        N = nz + n_slack + n_art
        T = np.zeros((m + 1, N + 1))
        T[:m, :nz] = A
        T[:m, -1] = b
        self.identity_col = np.zeros(m, dtype=int)
        self.artificial = np.zeros(N, dtype=bool)
        basis = np.zeros(m, dtype=int)
        s = nz
        a = nz + n_slack
        for r in range(m):
            if senses[r] == LE:
                T[r, s] = 1.0
                basis[r] = s
                self.identity_col[r] = s
                s += 1
            else:
                if senses[r] == GE:
                    T[r, s] = -1.0
                    s += 1
                T[r, a] = 1.0
                basis[r] = a
                self.identity_col[r] = a
                self.artificial[a] = True
                a += 1
        self.T = T
        self.basis = basis
        self.m = m
        self.N = N
        self.nz = nz
        self.iterations = 0

    def set_objective(self, cost):
        # reduced costs d = c - c_B B^-1 A ; rhs cell holds -c_B B^-1 b
        T, m = self.T, self.m
        cB = cost[self.basis]
        T[m, :-1] = cost - cB @ T[:m, :-1]
        T[m, -1] = -cB @ T[:m, -1]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, eligible, max_iter):
        T, m = self.T, self.m
        while True:
            d = T[m, :-1]
            cand = np.flatnonzero((d > OPT_TOL) & eligible)
            if len(cand) == 0:
                return "optimal"
            j = cand[0]
            colj = T[:m, j]
            rows = np.flatnonzero(colj > FEAS_TOL)
            if len(rows) == 0:
                return "unbounded"
            ratios = T[rows, -1] / colj[rows]
            best = ratios.min()
            ties = rows[ratios <= best + FEAS_TOL * max(1.0, abs(best))]
            r = ties[np.argmin(self.basis[ties])]
            if self.iterations >= max_iter:
                raise SolverStalledError(
                    f"simplex iteration cap {max_iter} exceeded", best_bound=-float(T[m, -1]))
            self.pivot(r, j)


def solve_lp(lp: LinearProgram, max_iter: int = MAX_ITER, dump_path=None) -> LpSolution:
    """Solve ``lp``; returns a basic (vertex) solution with duals when optimal."""
    if dump_path is not None:
        write_lp(lp, dump_path)
    A, b, senses, cz, const, Tmap, offset = _standardize(lp)
    tab = _Tableau(A, b, senses)
    m, N, nz = tab.m, tab.N, tab.nz
    if tab.artificial.any():
        tab.set_objective(-tab.artificial.astype(float))
        status = tab.run(np.ones(N, dtype=bool), max_iter)
        infeas = -tab.T[m, -1]
        if infeas < -FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution("infeasible", iterations=tab.iterations)
        # drive artificials out of the basis where a structural pivot exists;
        # rows where none exists are redundant and keep a zero artificial
        for r in range(m):
            if tab.artificial[tab.basis[r]]:
                row = tab.T[r, :N]
                nz_cols = np.flatnonzero((np.abs(row) > FEAS_TOL) & ~tab.artificial)
                if len(nz_cols):
                    tab.pivot(r, nz_cols[0])
    cost = np.zeros(N)
    cost[:nz] = cz
    tab.set_objective(cost)
    status = tab.run(~tab.artificial, max_iter)
    if status == "unbounded":
        return LpSolution("unbounded", iterations=tab.iterations)
    z = np.zeros(N)
    z[tab.basis] = tab.T[:m, -1]
    x = offset + Tmap @ z[:nz]
    sign = 1.0 if lp.maximize else -1.0
    # y_r = -d at the identity column of row r, undone for row flips and sense
    y_std = -tab.T[m, tab.identity_col] * tab.row_sign
    y = sign * y_std[: lp.num_rows]
    d = lp.c - lp.A.T @ y
    return LpSolution(
        "optimal",
        x=x,
        duals=y,
        reduced_costs=d,
        objective=float(lp.c @ x),
        iterations=tab.iterations,
        basis=tuple(int(k) for k in tab.basis),
    )


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    """b.y plus bound terms  sum_j d_j * (bound x_j sits at)."""
    val = float(lp.rhs @ sol.duals)
    for j, dj in enumerate(sol.reduced_costs):
        if abs(dj) <= OPT_TOL:
            continue
        lo, hi = lp.lower[j], lp.upper[j]
        at_upper = (dj > 0) == lp.maximize
        bound = hi if at_upper else lo
        if not np.isfinite(bound):
            return math.nan
        val += dj * bound
    return val


def residuals(lp: LinearProgram, sol: LpSolution) -> dict:
    """Primal feasibility and complementary-slackness residuals."""
    Ax = lp.A @ sol.x
    viol = np.zeros(lp.num_rows)
    slack = lp.rhs - Ax
    for r, s in enumerate(lp.senses):
        if s == LE:
            viol[r] = max(0.0, -slack[r])
        elif s == GE:
            viol[r] = max(0.0, slack[r])
        else:
            viol[r] = abs(slack[r])
    bnd = np.maximum(lp.lower - sol.x, 0.0).max(initial=0.0)
    bnd = max(bnd, np.maximum(sol.x - lp.upper, 0.0).max(initial=0.0))
    cs_rows = np.abs(sol.duals * slack).max(initial=0.0)
    gap_lo = np.where(np.isfinite(lp.lower), sol.x - lp.lower, np.inf)
    gap_hi = np.where(np.isfinite(lp.upper), lp.upper - sol.x, np.inf)
    gap = np.minimum(gap_lo, gap_hi)
    d = np.abs(sol.reduced_costs)
    with np.errstate(invalid="ignore"):
        cs_vars = np.where(np.isfinite(gap), d * np.where(np.isfinite(gap), gap, 0.0),
                           np.where(d > OPT_TOL, np.inf, 0.0))
    return {
        "primal": float(max(viol.max(initial=0.0), bnd)),
        "complementary": float(max(cs_rows, cs_vars.max(initial=0.0))),
    }


# column generation


@dataclass
class Column:
    """A candidate master column; ``tag`` identifies it to the caller."""

    objective: float
    coefficients: np.ndarray
    tag: object = None
    reduced_cost: float = math.nan
    lower: float = 0.0
    upper: float = math.inf


@dataclass
class ColumnGenerationResult:
    solution: LpSolution
    master: LinearProgram
    tags: list
    history: list = field(default_factory=list)
    rounds: int = 0


def solve_with_column_generation(
    master: LinearProgram,
    pricing: Callable[[np.ndarray], Sequence[Column]],
    tags: Sequence = None,
    tol: float = OPT_TOL,
    max_rounds: int = 100_000,
    max_iter: int = MAX_ITER,
) -> ColumnGenerationResult:
    """Re-solve the restricted master until pricing finds no improving column.

    ``pricing(duals)`` returns candidate columns (an empty sequence, or only
    columns with reduced cost <= tol, ends the loop).  Columns whose tag is
    already in the master are ignored so degenerate duals cannot loop.
    """
    tags = list(tags) if tags is not None else list(range(master.num_vars))
    if len(tags) != master.num_vars:
        raise InvalidInstanceError("one tag per initial master column required")
    seen = set(tags)
    lp = master
    history = []
    for rnd in range(1, max_rounds + 1):
        sol = solve_lp(lp, max_iter=max_iter)
        if not sol.optimal:
            return ColumnGenerationResult(sol, lp, tags, history, rnd)
        history.append(sol.objective)
        new = [col for col in pricing(sol.duals) if col.reduced_cost > tol and col.tag not in seen]
        if not new:
            return ColumnGenerationResult(sol, lp, tags, history, rnd)
        for col in new:
            seen.add(col.tag)
            tags.append(col.tag)
        lp = LinearProgram(
            np.concatenate([lp.c, [col.objective for col in new]]),
            np.column_stack([lp.A] + [np.asarray(col.coefficients, dtype=float) for col in new]),
            lp.senses,
            lp.rhs,
            np.concatenate([lp.lower, [col.lower for col in new]]),
            np.concatenate([lp.upper, [col.upper for col in new]]),
            lp.maximize,
        )
    raise SolverStalledError(f"column generation exceeded {max_rounds} rounds", best_bound=history[-1])


# LP text dump (CPLEX LP format) for cross-checking with external solvers


def _term(coef, name, first):
    if coef == 0:
        return ""
    sign = "-" if coef < 0 else ("" if first else "+")
    mag = abs(coef)
    body = name if mag == 1 else f"{mag:.17g} {name}"
    return f"{sign} {body}" if sign else body


def format_lp(lp: LinearProgram) -> str:
    names = lp.names or tuple(f"x{j}" for j in range(lp.num_vars))
    names = [str(s).replace(" ", "_") for s in names]

    def expr(coefs):
        parts = []
        for j, a in enumerate(coefs):
            t = _term(float(a), names[j], not parts)
            if t:
                parts.append(t)
        return " ".join(parts) if parts else f"0 {names[0]}" if names else "0"

    lines = ["\\ persuasion LP dump", "Maximize" if lp.maximize else "Minimize", f" obj: {expr(lp.c)}", "Subject To"]
    for r in range(lp.num_rows):
        lines.append(f" c{r}: {expr(lp.A[r])} {lp.senses[r]} {lp.rhs[r]:.17g}")
    lines.append("Bounds")
    for j, nm in enumerate(names):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == 0 and hi == np.inf:
            continue
        if lo == -np.inf and hi == np.inf:
            lines.append(f" {nm} free")
            continue
        los = "-inf" if lo == -np.inf else f"{lo:.17g}"
        his = "+inf" if hi == np.inf else f"{hi:.17g}"
        lines.append(f" {los} <= {nm} <= {his}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(lp: LinearProgram, path) -> None:
    Path(path).write_text(format_lp(lp))
