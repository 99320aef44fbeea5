"""Unconstrained maximization of f(S) + sum_{i in S} w_i.

This is the pricing problem for the private-signaling master LP.  Closed
forms exist for additive and anonymous f; supermodular quadratics reduce to
a maximum-weight closure (min cut); anything else is enumerated for n <= 20.
"""
from __future__ import annotations

import networkx as nx
import numpy as np

from .errors import InstanceTooLargeError
from .setfunctions import (
    TABLE_MAX_N, Additive, Anonymous, SetFunction, SupermodularQuadratic, mask_to_subset,
)

TIE_TOL = 1e-12


def _subset_weight(w, S):
    return float(sum(w[i] for i in S))


def maximize_exhaustive(f: SetFunction, w) -> tuple[tuple[int, ...], float]:
    """Brute force over all 2^n sets; ties go to the lexicographically smallest set."""
    n = f.n
    if n > TABLE_MAX_N:
        raise InstanceTooLargeError(f"exhaustive maximization needs n <= {TABLE_MAX_N}, got {n}")
    w = np.asarray(w, dtype=float)
    wsum = np.zeros(1 << n)
    for i in range(n):
        wsum[1 << i: 1 << (i + 1)] = wsum[: 1 << i] + w[i]
    g = f.table() + wsum
    best = g.max()
    cands = np.flatnonzero(g >= best - TIE_TOL)
    S = min(mask_to_subset(int(m)) for m in cands)
    return S, float(f(S) + _subset_weight(w, S))


def _max_additive(f: Additive, w):
    gain = f.weights + w
    S = tuple(int(i) for i in np.flatnonzero(gain > 0))
    return S, float(gain[list(S)].sum())


def _max_anonymous(f: Anonymous, w):
    # best set of size k is the k largest weights (stable order breaks ties)
    order = np.argsort(-w, kind="stable")
    prefix = np.concatenate([[0.0], np.cumsum(w[order])])
    vals = f.g + prefix
    k = int(np.argmax(vals >= vals.max() - TIE_TOL))
    S = tuple(sorted(int(i) for i in order[:k]))
    return S, float(f.g[k] + _subset_weight(w, S))


def _max_quadratic(f: SupermodularQuadratic, w):
    # max-weight closure: pair node (i,j) worth b_ij requires both i and j
    n = f.n
    node_w = f.linear + w
    G = nx.DiGraph()
    G.add_node("s")
    G.add_node("t")
    for i in range(n):
        if node_w[i] > 0:
            G.add_edge("s", i, capacity=float(node_w[i]))
        elif node_w[i] < 0:
            G.add_edge(i, "t", capacity=float(-node_w[i]))
    for i, j, b in f.pairs():
        if b > 0:
            p = ("p", i, j)
            G.add_edge("s", p, capacity=b)
            G.add_edge(p, i)  # no capacity attribute = infinite
            G.add_edge(p, j)
    _, (source_side, _) = nx.minimum_cut(G, "s", "t")
    S = tuple(sorted(v for v in source_side if isinstance(v, (int, np.integer))))
    val = f(S) + _subset_weight(w, S)
    if val < -TIE_TOL:  # the empty set is always available
        return (), 0.0
    return S, float(val)


def maximize_plus_additive(f: SetFunction, w) -> tuple[tuple[int, ...], float]:
    """argmax_S f(S) + sum_{i in S} w_i, with its value.

    Additive: elements with strictly positive gain.  Anonymous: best prefix
    of the weight-sorted order.  SupermodularQuadratic: min-cut closure.
    Others: exhaustive (n <= 20).  The value is exact in every path; only
    the choice among tied maximizers differs between paths.
    """
    w = np.asarray(w, dtype=float).ravel()
    if len(w) != f.n:
        raise ValueError(f"weight vector has length {len(w)}, expected {f.n}")
    if isinstance(f, Additive):
        return _max_additive(f, w)
    if isinstance(f, Anonymous):
        return _max_anonymous(f, w)
    if isinstance(f, SupermodularQuadratic):
        return _max_quadratic(f, w)
    return maximize_exhaustive(f, w)


def has_fast_path(f: SetFunction) -> bool:
    return isinstance(f, (Additive, Anonymous, SupermodularQuadratic))


def price_column(inst, theta, w_theta, y_theta) -> tuple[tuple[int, ...], float]:
    """Best column for state ``theta`` given the dual charges.

    Maximizes g(S) = f_theta(S) - (1/lambda) sum_{i in S} w_theta[i] and returns
    (S*, lambda * g(S*) - y_theta), the reduced cost of column (theta, S*).
    """
    t = inst.state_index(theta)
    lam = float(inst.prior[t])
    if lam <= 0:
        raise ValueError("pricing needs a state with positive prior mass")
    S, g = maximize_plus_additive(inst.objectives[t], -np.asarray(w_theta, dtype=float) / lam)
    return S, lam * g - float(y_theta)
