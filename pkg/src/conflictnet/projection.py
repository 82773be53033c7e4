"""One-mode projections and topological metrics of weighted graphs.

Projection binarizes the incidence matrix first, so an edge weight is the
number of shared counterparts, not a function of victim counts. All
metrics except strength operate on the binarized graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .bipartite import IncidenceMatrix, Side

try:
    from numba import njit as _njit
except ImportError:
    _njit = None


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph as a symmetric non-negative integer matrix.

    The diagonal is zero; node ids index rows and columns in order.
    """

    nodes: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        n = len(self.nodes)
        if w.shape != (n, n):
            raise ValueError(f"weight matrix shape {w.shape} does not match {n} nodes")
        if w.dtype.kind not in "iu":
            if w.size and not np.all(w == np.floor(w)):
                raise ValueError("edge weights must be integers")
        w = w.astype(np.int64)
        if w.size:
            if not np.array_equal(w, w.T):
                raise ValueError("weight matrix must be symmetric")
            if w.min() < 0:
                raise ValueError("edge weights must be non-negative")
            if np.any(np.diag(w) != 0):
                raise ValueError("self-loops are not allowed")
        if len(set(self.nodes)) != n:
            raise ValueError("duplicate node ids")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.nodes == other.nodes and np.array_equal(self.weights, other.weights)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, 1)))

    def binarized(self) -> np.ndarray:
        return self.weights > 0

    def degrees(self) -> np.ndarray:
        return self.binarized().sum(axis=1)

    def strengths(self) -> np.ndarray:
        return self.weights.sum(axis=1)


def project(matrix: IncidenceMatrix, side: Side) -> WeightedGraph:
    """Project the binarized incidence onto one mode.

    Weight between two nodes is the count of counterparts incident to
    both; the diagonal is discarded.
    """
    b = (matrix.counts > 0).astype(np.int64)
    if side == "municipalities":
        nodes, shared = matrix.municipalities, b @ b.T
    elif side == "structures":
        nodes, shared = matrix.structures, b.T @ b
    else:
        raise ValueError(f"unknown side {side!r}")
    np.fill_diagonal(shared, 0)
    return WeightedGraph(nodes, shared)


def graph_density(graph: WeightedGraph) -> float:
    """Edges over possible pairs; undefined below two nodes."""
    n = graph.n_nodes
    if n < 2:
        raise ValueError("density needs at least two nodes")
    return graph.n_edges / (n * (n - 1) / 2)


def global_transitivity(graph: WeightedGraph) -> float:
    """Closed triples over connected triples on the binarized graph."""
    if graph.n_nodes < 3:
        raise ValueError("transitivity needs at least three nodes")
    return _transitivity(graph.binarized())


def _transitivity(b: np.ndarray) -> float:
    deg = b.sum(axis=1)
    triples = int((deg * (deg - 1)).sum())
    if triples == 0:
        return 0.0
    # float32 is exact here: every intermediate is an integer below 2**24
    bf = b.astype(np.float32)
    closed = float(((bf @ bf) * bf).sum(dtype=np.float64))
    return closed / triples


def centralization(graph: WeightedGraph, kind: str) -> float:
    """Freeman centralization of degree, closeness, or betweenness.

    Scores are computed on the binarized graph; closeness and betweenness
    fall back to the giant component when the graph is disconnected.
    """
    n = graph.n_nodes
    if n < 3:
        raise ValueError("centralization needs at least three nodes")
    b = graph.binarized()
    if kind == "degree":
        deg = b.sum(axis=1)
        num = float((deg.max() - deg).sum())
        return _clip01(num / ((n - 1) * (n - 2)))
    if kind not in ("closeness", "betweenness"):
        raise ValueError(f"unknown centralization kind {kind!r}")
    sub = _giant_component_submatrix(b)
    m = sub.shape[0]
    if m < 3:
        return 0.0
    if kind == "closeness":
        dist = shortest_path(csr_matrix(sub), method="D", directed=False, unweighted=True)
        scores = (m - 1) / dist.sum(axis=1)
        denom = (m - 1) * (m - 2) / (2 * m - 3)
    else:
        scores = _betweenness_scores(sub)
        denom = (m - 1) ** 2 * (m - 2) / 2
    num = float((scores.max() - scores).sum())
    return _clip01(num / denom)


def _clip01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def _giant_component_submatrix(b: np.ndarray) -> np.ndarray:
    count, labels = connected_components(csr_matrix(b), directed=False)
    if count == 1:
        return b
    sizes = np.bincount(labels, minlength=count)
    keep = labels == int(sizes.argmax())
    return b[np.ix_(keep, keep)]


def _betweenness(b: np.ndarray, dtype=np.float64) -> np.ndarray:
    """Raw betweenness for all nodes of an undirected binary graph.

    Vectorized over sources: breadth-first sweeps as matrix products give
    geodesic counts and distances for every source at once, then pair
    dependencies accumulate level by level in reverse. Buffers are reused
    because this sits in the goodness-of-fit hot loop.
    """
    n = b.shape[0]
    if n == 0:
        return np.zeros(0)
    a = b.astype(dtype)
    sigma = np.eye(n, dtype=dtype)
    unvisited = ~np.eye(n, dtype=bool)
    frontier = np.eye(n, dtype=bool)
    levels: list[np.ndarray] = []
    masked = np.empty((n, n), dtype=dtype)
    reached = np.empty((n, n), dtype=dtype)
    while True:
        np.multiply(sigma, frontier, out=masked)
        np.matmul(masked, a, out=reached)
        new = (reached > 0) & unvisited
        if not new.any():
            break
        np.copyto(sigma, reached, where=new)
        unvisited &= ~new
        frontier = new
        levels.append(new)
    delta = np.zeros((n, n), dtype=dtype)
    numer = np.empty((n, n), dtype=dtype)
    ratio = np.empty((n, n), dtype=dtype)
    spread = np.empty((n, n), dtype=dtype)
    # the level-1 iteration would only touch the diagonal, so skip it
    for d in range(len(levels) - 1, 0, -1):
        on_level = levels[d]
        np.add(delta, 1.0, out=numer)
        ratio.fill(0)
        np.divide(numer, sigma, out=ratio, where=on_level)
        np.matmul(ratio, a, out=spread)
        spread *= sigma
        np.add(delta, spread, out=delta, where=levels[d - 1])
    np.fill_diagonal(delta, 0.0)
    # each unordered (s, t) pair was counted from both endpoint sources
    return delta.sum(axis=0, dtype=np.float64) / 2.0


def _brandes_csr_py(indptr: np.ndarray, indices: np.ndarray, n: int) -> np.ndarray:
    # per-source Brandes on CSR adjacency; compiled when numba is present
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int32)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int32)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head, tail = 0, 1
        while head < tail:
            u = order[head]
            head += 1
            du = dist[u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[v] < 0:
                    dist[v] = du + 1
                    order[tail] = v
                    tail += 1
                if dist[v] == du + 1:
                    sigma[v] += sigma[u]
        for idx in range(tail - 1, 0, -1):
            v = order[idx]
            coeff = (1.0 + delta[v]) / sigma[v]
            dv = dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if dist[u] == dv - 1:
                    delta[u] += sigma[u] * coeff
            bc[v] += delta[v]
    return bc / 2.0


_brandes_csr = _njit(cache=True)(_brandes_csr_py) if _njit is not None else None


def _betweenness_scores(b: np.ndarray) -> np.ndarray:
    """Raw betweenness via the compiled kernel, or the matrix sweep without it."""
    if _brandes_csr is None:
        return _betweenness(b)
    n = b.shape[0]
    counts = b.sum(axis=1)
    # int32 keeps the hot adjacency scan inside half the memory traffic
    indptr = np.zeros(n + 1, dtype=np.int32)
    np.cumsum(counts, out=indptr[1:])
    indices = np.nonzero(b)[1].astype(np.int32)
    return _brandes_csr(indptr, indices, n)


def _neighbor_masks(b: np.ndarray) -> list[int]:
    n = b.shape[0]
    if n == 0:
        return []
    packed = np.packbits(b, axis=1, bitorder="little")
    return [int.from_bytes(packed[i].tobytes(), "little") for i in range(n)]


def _degeneracy_order(masks: list[int]) -> tuple[list[int], np.ndarray]:
    """Min-degree peeling with bucketed vertices; order and core numbers.

    Standard linear-time core decomposition: vertices sit in an array
    sorted by current degree, and decrementing a neighbor swaps it to the
    front of its bucket.
    """
    n = len(masks)
    core = np.zeros(n, dtype=np.int64)
    if n == 0:
        return [], core
    deg = [m.bit_count() for m in masks]
    maxdeg = max(deg)
    bucket_start = [0] * (maxdeg + 1)
    for d in deg:
        bucket_start[d] += 1
    total = 0
    for d in range(maxdeg + 1):
        count = bucket_start[d]
        bucket_start[d] = total
        total += count
    fill = bucket_start.copy()
    vert = [0] * n
    pos = [0] * n
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    order = []
    removed = 0
    for i in range(n):
        v = vert[i]
        core[v] = deg[v]
        order.append(v)
        removed |= 1 << v
        neigh = masks[v] & ~removed
        while neigh:
            low = neigh & -neigh
            u = low.bit_length() - 1
            neigh &= neigh - 1
            du = deg[u]
            if du > deg[v]:
                pu = pos[u]
                pw = bucket_start[du]
                w = vert[pw]
                if u != w:
                    vert[pu], vert[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bucket_start[du] += 1
                deg[u] = du - 1
    # removal-time degrees are non-decreasing, so they are core numbers
    return order, core


def _bron_kerbosch(r: int, p: int, x: int, masks: list[int], out: list[int]):
    if p == 0:
        if x == 0:
            out.append(r)
        return
    pc = p.bit_count()
    if pc <= 2:
        # pivoting can prune at most one branch here, the scan costs more
        cand = p
    else:
        # pivot on the candidate dominating most of P
        best, pivot = -1, -1
        scan = p | x
        while scan:
            low = scan & -scan
            u = low.bit_length() - 1
            c = (p & masks[u]).bit_count()
            if c > best:
                best, pivot = c, u
                if c == pc:
                    break
            scan &= scan - 1
        cand = p & ~masks[pivot]
    while cand:
        low = cand & -cand
        v = low.bit_length() - 1
        _bron_kerbosch(r | low, p & masks[v], x & masks[v], masks, out)
        p &= ~low
        x |= low
        cand &= cand - 1


def _maximal_clique_masks(b: np.ndarray, masks: list[int] | None = None) -> list[int]:
    if masks is None:
        masks = _neighbor_masks(b)
    order, _ = _degeneracy_order(masks)
    out: list[int] = []
    earlier = 0
    for v in order:
        bit = 1 << v
        _bron_kerbosch(bit, masks[v] & ~earlier & ~bit, masks[v] & earlier, masks, out)
        earlier |= bit
    return out


def _mask_to_indices(mask: int) -> tuple[int, ...]:
    idx = []
    while mask:
        low = mask & -mask
        idx.append(low.bit_length() - 1)
        mask &= mask - 1
    return tuple(idx)


def maximal_cliques(graph: WeightedGraph) -> list[tuple[str, ...]]:
    """All maximal cliques of the binarized graph, singletons included.

    Each clique is a tuple of node ids sorted ascending; the list is
    sorted lexicographically so the output order is deterministic.
    """
    cliques = []
    for mask in _maximal_clique_masks(graph.binarized()):
        ids = sorted(graph.nodes[i] for i in _mask_to_indices(mask))
        cliques.append(tuple(ids))
    return sorted(cliques)


def clique_size_distribution(cliques: list[tuple[str, ...]]) -> dict[int, int]:
    dist: dict[int, int] = {}
    for c in cliques:
        dist[len(c)] = dist.get(len(c), 0) + 1
    return dict(sorted(dist.items()))


def core_decomposition(graph: WeightedGraph) -> dict[str, int]:
    """Coreness of every node on the binarized graph."""
    _, core = _degeneracy_order(_neighbor_masks(graph.binarized()))
    return {node: int(core[i]) for i, node in enumerate(graph.nodes)}


def graph_components(graph: WeightedGraph) -> tuple[int, int]:
    """(component count, giant component order); isolated nodes count."""
    n = graph.n_nodes
    if n == 0:
        return 0, 0
    count, labels = connected_components(csr_matrix(graph.binarized()), directed=False)
    sizes = np.bincount(labels, minlength=count)
    return int(count), int(sizes.max())
