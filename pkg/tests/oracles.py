"""Brute-force reference implementations used only by the test suite.

Everything here favors obviousness over speed: explicit double loops,
exhaustive enumeration, and textbook formulas, so the fast library code
can be checked against an independent route.
"""

from __future__ import annotations

import itertools

import numpy as np


def project_double_loop(counts: np.ndarray, side: str) -> np.ndarray:
    """Shared-counterpart weights by looping over every node pair."""
    b = counts > 0
    if side == "municipalities":
        rows = b
    else:
        rows = b.T
    n = rows.shape[0]
    w = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            shared = 0
            for k in range(rows.shape[1]):
                if rows[i, k] and rows[j, k]:
                    shared += 1
            w[i, j] = shared
    return w


def modularity_double_sum(w: np.ndarray, labels: np.ndarray) -> float:
    """Modularity straight from the pairwise definition."""
    two_m = w.sum()
    k = w.sum(axis=1)
    total = 0.0
    n = w.shape[0]
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                total += w[i, j] - k[i] * k[j] / two_m
    return total / two_m


def all_partitions(items: list):
    """Every set partition of ``items`` (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in all_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [smaller[i] + [first]] + smaller[i + 1 :]
        yield smaller + [[first]]


def best_modularity_exhaustive(w: np.ndarray) -> float:
    best = -np.inf
    n = w.shape[0]
    for parts in all_partitions(list(range(n))):
        labels = np.empty(n, dtype=np.int64)
        for c, block in enumerate(parts):
            for v in block:
                labels[v] = c
        best = max(best, modularity_double_sum(w, labels))
    return best


def maximal_cliques_subsets(b: np.ndarray) -> set[frozenset[int]]:
    """All maximal cliques by checking every vertex subset."""
    n = b.shape[0]
    adj = [set(np.flatnonzero(b[i]).tolist()) for i in range(n)]

    def is_clique(nodes: tuple[int, ...]) -> bool:
        return all(v in adj[u] for u, v in itertools.combinations(nodes, 2))

    cliques = set()
    for size in range(1, n + 1):
        for nodes in itertools.combinations(range(n), size):
            if not is_clique(nodes):
                continue
            extendable = any(
                set(nodes) <= adj[u] for u in range(n) if u not in nodes
            )
            if not extendable:
                cliques.add(frozenset(nodes))
    return cliques


def coreness_peeling(b: np.ndarray) -> np.ndarray:
    """Core numbers by repeatedly deleting low-degree vertices per k."""
    n = b.shape[0]
    core = np.zeros(n, dtype=np.int64)
    for k in range(1, n + 1):
        alive = np.ones(n, dtype=bool)
        changed = True
        while changed:
            changed = False
            deg = (b & alive[None, :]).sum(axis=1)
            for v in range(n):
                if alive[v] and deg[v] < k:
                    alive[v] = False
                    changed = True
        core[alive] = k
        if not alive.any():
            break
    return core


def betweenness_accumulation(b: np.ndarray) -> np.ndarray:
    """Per-source Brandes with explicit predecessor lists."""
    n = b.shape[0]
    adj = [np.flatnonzero(b[i]).tolist() for i in range(n)]
    bc = np.zeros(n)
    for s in range(n):
        dist = {s: 0}
        sigma = {s: 1.0}
        preds: dict[int, list[int]] = {s: []}
        order = [s]
        queue = [s]
        while queue:
            nxt = []
            for u in queue:
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        sigma[v] = 0.0
                        preds[v] = []
                        nxt.append(v)
                    if dist[v] == dist[u] + 1:
                        sigma[v] += sigma[u]
                        preds[v].append(u)
            order.extend(nxt)
            queue = nxt
        delta = {v: 0.0 for v in order}
        for v in reversed(order):
            for u in preds[v]:
                delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v])
            if v != s:
                bc[v] += delta[v]
    return bc / 2.0


def transitivity_triples(b: np.ndarray) -> float:
    """Transitivity by counting every ordered triple."""
    n = b.shape[0]
    closed = 0
    connected = 0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if len({i, j, k}) < 3:
                    continue
                if b[i, j] and b[j, k]:
                    connected += 1
                    if b[i, k]:
                        closed += 1
    return closed / connected if connected else 0.0


def components_dfs(b: np.ndarray) -> list[set[int]]:
    n = b.shape[0]
    seen = set()
    comps = []
    for start in range(n):
        if start in seen:
            continue
        stack = [start]
        comp = set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(np.flatnonzero(b[v]).tolist())
        seen |= comp
        comps.append(comp)
    return comps


def quantile_linear(sorted_values: list[float], p: float) -> float:
    """Linear interpolation between order statistics, by hand."""
    n = len(sorted_values)
    h = (n - 1) * p
    lo = int(np.floor(h))
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return sorted_values[lo] * (1 - frac) + sorted_values[hi] * frac


def random_symmetric_graph(
    rng: np.random.Generator, n: int, p: float, max_weight: int = 1
) -> np.ndarray:
    w = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                w[i, j] = w[j, i] = int(rng.integers(1, max_weight + 1))
    return w
