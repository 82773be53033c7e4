"""Community structure: modularity, greedy agglomeration, Poisson SBM.

The SBM treats edge weights between distinct nodes as Poisson draws whose
rate depends only on the endpoints' blocks. Fitting is variational EM
with sequential responsibility updates, so every iteration provably
raises the evidence lower bound; model order is chosen by the integrated
completed likelihood (ICL).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from .projection import WeightedGraph

# Rates below RATE_FLOOR are treated as structural zeros; logs are floored
# at these values everywhere, E-step and bound alike, so the objective
# being ascended is one fixed function.
RATE_FLOOR = 1e-10
PROB_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class Partition:
    """Hard assignment of node ids to community labels 1..q, all non-empty."""

    assignment: Mapping[str, int]
    q: int

    def __post_init__(self):
        assignment = dict(self.assignment)
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if not assignment:
            raise ValueError("partition needs at least one node")
        labels = set(assignment.values())
        if not labels.issubset(range(1, self.q + 1)):
            raise ValueError(f"labels must lie in 1..{self.q}")
        if labels != set(range(1, self.q + 1)):
            raise ValueError("every label in 1..q must be non-empty")
        object.__setattr__(self, "assignment", assignment)

    @classmethod
    def from_labels(cls, nodes: Sequence[str], labels: Sequence[int]) -> "Partition":
        """Build from parallel arrays, compacting labels to 1..q by value order."""
        if len(nodes) != len(labels):
            raise ValueError("nodes and labels must be parallel")
        distinct = sorted(set(int(l) for l in labels))
        remap = {old: new for new, old in enumerate(distinct, start=1)}
        return cls({v: remap[int(l)] for v, l in zip(nodes, labels)}, len(distinct))

    def label_array(self, nodes: Sequence[str]) -> np.ndarray:
        """Zero-based labels in the given node order."""
        try:
            return np.array([self.assignment[v] for v in nodes], dtype=np.int64) - 1
        except KeyError as exc:
            raise ValueError(f"partition does not cover node {exc.args[0]!r}") from None

    def sizes(self) -> dict[int, int]:
        out = {label: 0 for label in range(1, self.q + 1)}
        for label in self.assignment.values():
            out[label] += 1
        return out

    def members(self, label: int) -> tuple[str, ...]:
        return tuple(sorted(v for v, l in self.assignment.items() if l == label))


@dataclass(frozen=True)
class EmConfig:
    """Settings for variational EM; the seed is mandatory."""

    seed: int
    restarts: int = 5
    max_iter: int = 500
    tol: float = 1e-6
    inner_sweeps: int = 1

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError("an explicit integer seed is required")
        if self.restarts < 1 or self.max_iter < 1 or self.inner_sweeps < 1:
            raise ValueError("restarts, max_iter and inner_sweeps must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True, eq=False)
class SbmFit:
    """Converged Poisson SBM variational fit."""

    nodes: tuple[str, ...]
    q: int
    theta: np.ndarray
    lam: np.ndarray
    responsibilities: np.ndarray
    map_partition: Partition
    map_loglik: float
    icl: float
    bound: float
    bound_trajectory: tuple[float, ...]
    restart_trajectories: tuple[tuple[float, ...], ...]
    compacted: bool

    @property
    def n(self) -> int:
        return len(self.nodes)

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "q": int(self.q),
            "theta": [float(x) for x in self.theta],
            "lambda": [[float(x) for x in row] for row in self.lam],
            "responsibilities": [[float(x) for x in row] for row in self.responsibilities],
            "map": {v: int(l) for v, l in self.map_partition.assignment.items()},
            "map_loglik": float(self.map_loglik),
            "icl": float(self.icl),
            "bound": float(self.bound),
            "bound_trajectory": [float(x) for x in self.bound_trajectory],
            "restart_trajectories": [
                [float(x) for x in t] for t in self.restart_trajectories
            ],
            "compacted": bool(self.compacted),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SbmFit":
        nodes = tuple(data["nodes"])
        return cls(
            nodes=nodes,
            q=int(data["q"]),
            theta=np.asarray(data["theta"], dtype=float),
            lam=np.asarray(data["lambda"], dtype=float),
            responsibilities=np.asarray(data["responsibilities"], dtype=float),
            map_partition=Partition(
                {v: int(l) for v, l in data["map"].items()}, int(data["q"])
            ),
            map_loglik=float(data["map_loglik"]),
            icl=float(data["icl"]),
            bound=float(data["bound"]),
            bound_trajectory=tuple(float(x) for x in data["bound_trajectory"]),
            restart_trajectories=tuple(
                tuple(float(x) for x in t) for t in data["restart_trajectories"]
            ),
            compacted=bool(data["compacted"]),
        )


@dataclass(frozen=True)
class CommunityStat:
    """Per-community vertex statistics; CVs are percentages."""

    label: int
    size: int
    intra_degree_mean: float
    intra_degree_cv: float
    degree_mean: float
    degree_cv: float
    clustering_mean: float


@dataclass(frozen=True, eq=False)
class FlowMatrix:
    """Node counts moving between consecutive partitions.

    Sources are the earlier partition's labels plus "new"; targets are the
    later partition's labels plus "inactive".
    """

    sources: tuple[str, ...]
    targets: tuple[str, ...]
    counts: np.ndarray

    def to_rows(self) -> list[tuple[str, str, int]]:
        rows = []
        for i, s in enumerate(self.sources):
            for j, t in enumerate(self.targets):
                c = int(self.counts[i, j])
                if c:
                    rows.append((s, t, c))
        return rows


# ---------------------------------------------------------------------------
# modularity and greedy agglomeration


def modularity(graph: WeightedGraph, partition: Partition) -> float:
    """Weighted modularity of a hard partition.

    Computed with integer arithmetic and a single final division, so
    values that are exactly representable come out exact.
    """
    w = graph.weights
    total = int(w.sum())
    if total == 0:
        raise ValueError("modularity is undefined for a graph with zero total weight")
    if set(partition.assignment) != set(graph.nodes):
        raise ValueError("partition must cover exactly the graph's nodes")
    labels = partition.label_array(graph.nodes)
    strength = w.sum(axis=1)
    numerator = 0
    for c in range(partition.q):
        members = labels == c
        within = int(w[np.ix_(members, members)].sum())
        k = int(strength[members].sum())
        numerator += total * within - k * k
    return numerator / (total * total)


def fast_greedy(graph: WeightedGraph) -> tuple[Partition, list[tuple[int, int]], float]:
    """Greedy modularity agglomeration with best-cut selection.

    Starts from singleton communities and repeatedly merges the pair with
    the largest modularity gain; among equal gains the lexicographically
    smallest (label_a, label_b) pair wins. Initial communities carry
    labels 0..n-1 in node order and merge step s creates label n+s. The
    returned partition is the cut with the highest modularity along the
    merge path (earliest such cut on ties), and the returned value is its
    exactly recomputed modularity.
    """
    w = graph.weights
    total = int(w.sum())
    if total == 0:
        raise ValueError("modularity is undefined for a graph with zero total weight")
    n = graph.n_nodes
    f = w / total
    a = f.sum(axis=1)
    gain = 2.0 * (f - np.outer(a, a))
    np.fill_diagonal(gain, -np.inf)
    active = np.ones(n, dtype=bool)
    label = list(range(n))
    merges: list[tuple[int, int]] = []
    merge_slots: list[tuple[int, int]] = []
    current = float(-(a @ a))
    best = current
    best_step = 0
    for step in range(n - 1):
        mask = active[:, None] & active[None, :]
        masked = np.where(mask, gain, -np.inf)
        top = masked.max()
        rows, cols = np.where(masked == top)
        candidates = [
            (min(label[i], label[j]), max(label[i], label[j]), i, j)
            for i, j in zip(rows, cols)
            if i < j
        ]
        la, lb, i, j = min(candidates)
        merges.append((la, lb))
        merge_slots.append((i, j))
        f[i, :] += f[j, :]
        f[:, i] += f[:, j]
        f[j, :] = 0.0
        f[:, j] = 0.0
        a[i] += a[j]
        a[j] = 0.0
        active[j] = False
        label[i] = n + step
        current += float(top)
        if current > best:
            best = current
            best_step = step + 1
        gain[i, :] = 2.0 * (f[i, :] - a[i] * a)
        gain[:, i] = gain[i, :]
        gain[i, i] = -np.inf
    parent = list(range(n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, j in merge_slots[:best_step]:
        parent[find(j)] = find(i)
    roots = [find(v) for v in range(n)]
    first_seen: dict[int, int] = {}
    labels = []
    for r in roots:
        if r not in first_seen:
            first_seen[r] = len(first_seen) + 1
        labels.append(first_seen[r])
    partition = Partition.from_labels(graph.nodes, labels)
    return partition, merges, modularity(graph, partition)


# ---------------------------------------------------------------------------
# Poisson SBM internals


def _m_step(y: np.ndarray, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = tau.sum(axis=0)
    theta = s / tau.shape[0]
    num = tau.T @ y @ tau
    num = 0.5 * (num + num.T)
    den = np.outer(s, s) - tau.T @ tau
    den = 0.5 * (den + den.T)
    lam = np.zeros_like(num)
    np.divide(num, den, out=lam, where=den > 0)
    # rates below the floor cannot beat a structural zero under the
    # floored objective, so zero is the exact maximizer there
    lam[lam < RATE_FLOOR] = 0.0
    return theta, lam


def _elbo(
    y: np.ndarray,
    tau: np.ndarray,
    theta: np.ndarray,
    lam: np.ndarray,
    log_theta: np.ndarray,
    log_lam: np.ndarray,
    log_fact: float,
) -> float:
    s = tau.sum(axis=0)
    blocks = tau.T @ y @ tau
    pairs = np.outer(s, s) - tau.T @ tau
    pair_term = 0.5 * float((blocks * log_lam).sum() - (pairs * lam).sum())
    mixing = float((tau * log_theta).sum())
    entropy = -float(xlogy(tau, tau).sum())
    return mixing + entropy + pair_term - log_fact


def _e_sweep(
    y: np.ndarray,
    tau: np.ndarray,
    log_theta: np.ndarray,
    lam: np.ndarray,
    log_lam: np.ndarray,
) -> None:
    # sequential coordinate ascent: each row update is the exact maximizer
    # given all other rows, so the bound cannot decrease
    yt = y @ tau
    s = tau.sum(axis=0)
    n = tau.shape[0]
    for i in range(n):
        old = tau[i].copy()
        s -= old
        g = log_theta + log_lam @ yt[i] - lam @ s
        g -= g.max()
        np.exp(g, out=g)
        g /= g.sum()
        tau[i] = g
        s += g
        yt += np.outer(y[:, i], g - old)


def _floored_logs(theta: np.ndarray, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.log(np.maximum(theta, PROB_FLOOR)),
        np.log(np.maximum(lam, RATE_FLOOR)),
    )


def _run_em(
    y: np.ndarray, tau: np.ndarray, config: EmConfig, log_fact: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[float]]:
    trajectory: list[float] = []
    previous = None
    for _ in range(config.max_iter):
        theta, lam = _m_step(y, tau)
        log_theta, log_lam = _floored_logs(theta, lam)
        for _ in range(config.inner_sweeps):
            _e_sweep(y, tau, log_theta, lam, log_lam)
        bound = _elbo(y, tau, theta, lam, log_theta, log_lam, log_fact)
        trajectory.append(bound)
        if previous is not None and abs(bound - previous) <= config.tol * max(1.0, abs(bound)):
            break
        previous = bound
    theta, lam = _m_step(y, tau)
    log_theta, log_lam = _floored_logs(theta, lam)
    trajectory.append(_elbo(y, tau, theta, lam, log_theta, log_lam, log_fact))
    return tau, theta, lam, trajectory


def _kmeans_labels(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Plain k-means with greedy seeding; deterministic given the generator."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[int(rng.integers(n))]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        d2 = np.minimum(d2, ((x - centers[j]) ** 2).sum(axis=1))
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(30):
        dist = (
            (x**2).sum(axis=1)[:, None]
            - 2.0 * (x @ centers.T)
            + (centers**2).sum(axis=1)[None, :]
        )
        new_labels = dist.argmin(axis=1)
        for j in range(k):
            members = new_labels == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
            else:
                centers[j] = x[int(dist.min(axis=1).argmax())]
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return labels


def _initial_tau(
    y: np.ndarray, q: int, restart: int, rng: np.random.Generator
) -> np.ndarray:
    n = y.shape[0]
    if q == 1:
        return np.ones((n, 1))
    if restart == 0:
        labels = _kmeans_labels(y, q, rng)
        eps = 0.1
        tau = np.full((n, q), eps / (q - 1))
        tau[np.arange(n), labels] = 1.0 - eps
        return tau
    return rng.dirichlet(np.ones(q), size=n)


def sbm_fit(graph: WeightedGraph, q: int, config: EmConfig) -> SbmFit:
    """Fit a q-block Poisson SBM by restarted variational EM.

    Restart r draws from an independent stream keyed by (seed, q, r); the
    restart with the highest final bound wins, earliest on ties. MAP
    labels take the lowest block index on responsibility ties, and blocks
    left empty by the MAP are dropped (``compacted``) before scoring.
    """
    n = graph.n_nodes
    if not isinstance(q, int) or isinstance(q, bool):
        raise ValueError("q must be an integer")
    if q < 1:
        raise ValueError("q must be at least 1")
    if q > n:
        raise ValueError(f"q={q} exceeds the number of nodes {n}")
    if graph.weights.dtype.kind not in "iu":
        raise ValueError("SBM fitting requires integer edge weights")
    y = graph.weights.astype(np.float64)
    log_fact = float(gammaln(graph.weights + 1).sum()) / 2.0

    best: tuple[np.ndarray, np.ndarray, np.ndarray, list[float]] | None = None
    restart_trajectories: list[tuple[float, ...]] = []
    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, q, restart])
        tau0 = _initial_tau(y, q, restart, rng)
        result = _run_em(y, tau0, config, log_fact)
        restart_trajectories.append(tuple(result[3]))
        if best is None or result[3][-1] > best[3][-1]:
            best = result
    assert best is not None
    tau, theta, lam, trajectory = best

    labels = tau.argmax(axis=1)
    used = np.unique(labels)
    compacted = used.size < tau.shape[1]
    if compacted:
        tau = tau[:, used]
        tau = tau / tau.sum(axis=1, keepdims=True)
        theta, lam = _m_step(y, tau)
        labels = tau.argmax(axis=1)
    q_eff = tau.shape[1]
    log_theta, log_lam = _floored_logs(theta, lam)
    bound = _elbo(y, tau, theta, lam, log_theta, log_lam, log_fact)

    partition = Partition.from_labels(graph.nodes, labels + 1)
    map_ll = poisson_complete_loglik(graph, partition, lam, theta, smoothing=True)
    icl = map_ll - _icl_penalty(q_eff, n)
    return SbmFit(
        nodes=graph.nodes,
        q=q_eff,
        theta=theta,
        lam=lam,
        responsibilities=tau,
        map_partition=partition,
        map_loglik=map_ll,
        icl=icl,
        bound=bound,
        bound_trajectory=tuple(trajectory),
        restart_trajectories=tuple(restart_trajectories),
        compacted=compacted,
    )


def _check_rates(
    rates: np.ndarray, q: int
) -> np.ndarray:
    lam = np.asarray(rates, dtype=float)
    if lam.shape != (q, q):
        raise ValueError(f"rate matrix must be {q}x{q}")
    if not np.allclose(lam, lam.T):
        raise ValueError("rate matrix must be symmetric")
    if lam.min() < 0:
        raise ValueError("rates must be non-negative")
    return lam


def poisson_complete_loglik(
    graph: WeightedGraph,
    partition: Partition,
    rates,
    proportions=None,
    smoothing: bool = False,
) -> float:
    """Completed log-likelihood of hard labels under pairwise Poisson rates.

    Sums over unordered node pairs; with ``proportions`` the mixing term
    for the labels is added. A zero rate facing a positive count is an
    error unless ``smoothing`` floors the offending rates.
    """
    if set(partition.assignment) != set(graph.nodes):
        raise ValueError("partition must cover exactly the graph's nodes")
    lam = _check_rates(rates, partition.q)
    z = partition.label_array(graph.nodes)
    iu = np.triu_indices(graph.n_nodes, k=1)
    counts = graph.weights[iu]
    pair_rates = lam[z[iu[0]], z[iu[1]]]
    if np.any((pair_rates == 0) & (counts > 0)):
        if not smoothing:
            raise ValueError(
                "zero rate for an observed pair; pass smoothing=True to floor it"
            )
        pair_rates = np.maximum(pair_rates, RATE_FLOOR)
    total = float(
        xlogy(counts, pair_rates).sum()
        - pair_rates.sum()
        - gammaln(counts + 1).sum()
    )
    if proportions is not None:
        total += _mixing_term(np.asarray(proportions, dtype=float), z, smoothing)
    return total


def block_aggregated_loglik(
    graph: WeightedGraph,
    partition: Partition,
    rates,
    proportions=None,
    smoothing: bool = False,
    dense_pairs: bool = False,
) -> float:
    """Same likelihood as :func:`poisson_complete_loglik`, via block sums.

    Within-block pair counts are n_c(n_c-1)/2; ``dense_pairs`` switches to
    n_c^2/2 for comparability with conventions that keep self-pairs.
    """
    if set(partition.assignment) != set(graph.nodes):
        raise ValueError("partition must cover exactly the graph's nodes")
    lam = _check_rates(rates, partition.q)
    z = partition.label_array(graph.nodes)
    q = partition.q
    zmat = np.zeros((graph.n_nodes, q), dtype=np.int64)
    zmat[np.arange(graph.n_nodes), z] = 1
    block_sums = zmat.T @ graph.weights @ zmat
    sizes = zmat.sum(axis=0)
    if dense_pairs:
        diag_pairs = sizes.astype(float) ** 2 / 2.0
    else:
        diag_pairs = sizes * (sizes - 1) / 2.0
    pair_counts = np.outer(sizes, sizes).astype(float)
    np.fill_diagonal(pair_counts, diag_pairs)
    pair_sums = block_sums.astype(float)
    np.fill_diagonal(pair_sums, np.diag(block_sums) / 2.0)
    if np.any((lam == 0) & (pair_sums > 0)):
        if not smoothing:
            raise ValueError(
                "zero rate for an observed pair; pass smoothing=True to floor it"
            )
        lam = np.where((lam == 0) & (pair_sums > 0), RATE_FLOOR, lam)
    iu = np.triu_indices(graph.n_nodes, k=1)
    log_fact = float(gammaln(graph.weights[iu] + 1).sum())
    upper = np.triu_indices(q)
    total = float(
        xlogy(pair_sums[upper], lam[upper]).sum()
        - (lam[upper] * pair_counts[upper]).sum()
        - log_fact
    )
    if proportions is not None:
        total += _mixing_term(np.asarray(proportions, dtype=float), z, smoothing)
    return total


def _mixing_term(theta: np.ndarray, z: np.ndarray, smoothing: bool) -> float:
    probs = theta[z]
    if np.any(probs == 0):
        if not smoothing:
            raise ValueError(
                "zero mixing proportion for an occupied block; "
                "pass smoothing=True to floor it"
            )
        probs = np.maximum(probs, PROB_FLOOR)
    return float(np.log(probs).sum())


def _icl_penalty(q: int, n: int) -> float:
    if n < 2:
        raise ValueError("ICL needs at least two nodes")
    return (q - 1) / 2.0 * math.log(n) + q * (q + 1) / 4.0 * math.log(n * (n - 1) / 2.0)


def icl_score(fit: SbmFit, n: int | None = None) -> float:
    """ICL of a fit: completed MAP log-likelihood minus model-order penalties."""
    size = fit.n if n is None else n
    return fit.map_loglik - _icl_penalty(fit.q, size)


def select_communities(
    graph: WeightedGraph, q_values: Iterable[int], config: EmConfig
) -> tuple[SbmFit, list[tuple[int, float]]]:
    """Fit every candidate block count and keep the highest ICL.

    Returns the winning fit and the (q, ICL) curve in candidate order;
    ties prefer the smaller q.
    """
    candidates = list(q_values)
    if not candidates:
        raise ValueError("q_values must be non-empty")
    curve: list[tuple[int, float]] = []
    best_fit: SbmFit | None = None
    for q in candidates:
        fit = sbm_fit(graph, q, config)
        curve.append((q, fit.icl))
        if best_fit is None or fit.icl > best_fit.icl:
            best_fit = fit
    assert best_fit is not None
    return best_fit, curve


# ---------------------------------------------------------------------------
# descriptive statistics and cross-period flows


def _cv_percent(values: np.ndarray) -> float:
    mean = values.mean()
    if mean == 0:
        return 0.0
    return float(100.0 * values.std() / mean)


def community_vertex_stats(
    graph: WeightedGraph, partition: Partition
) -> list[CommunityStat]:
    """Size, degree and clustering profiles for each community.

    Degrees are binarized; intra-degree counts neighbors inside the own
    community; CVs use the population standard deviation, as a
    percentage of the mean; local clustering of a node with fewer than
    two neighbors is 0.
    """
    if set(partition.assignment) != set(graph.nodes):
        raise ValueError("partition must cover exactly the graph's nodes")
    b = graph.binarized()
    n = graph.n_nodes
    labels = partition.label_array(graph.nodes)
    zmat = np.zeros((n, partition.q), dtype=np.int64)
    zmat[np.arange(n), labels] = 1
    degrees = b.sum(axis=1)
    intra = (b @ zmat)[np.arange(n), labels]
    bf = b.astype(np.float64)
    closed = ((bf @ bf) * bf).sum(axis=1)
    denom = degrees * (degrees - 1)
    local_cc = np.divide(
        closed, denom, out=np.zeros(n, dtype=np.float64), where=denom > 0
    )
    stats = []
    for c in range(partition.q):
        members = labels == c
        stats.append(
            CommunityStat(
                label=c + 1,
                size=int(members.sum()),
                intra_degree_mean=float(intra[members].mean()),
                intra_degree_cv=_cv_percent(intra[members].astype(float)),
                degree_mean=float(degrees[members].mean()),
                degree_cv=_cv_percent(degrees[members].astype(float)),
                clustering_mean=float(local_cc[members].mean()),
            )
        )
    return stats


def community_flow(previous: Partition, current: Partition) -> FlowMatrix:
    """Count node movements between two partitions of possibly different node sets.

    Nodes absent from the later partition flow to the "inactive" sink;
    nodes absent from the earlier one flow from the "new" source.
    """
    prev_labels = sorted(set(previous.assignment.values()))
    curr_labels = sorted(set(current.assignment.values()))
    sources = tuple(str(l) for l in prev_labels) + ("new",)
    targets = tuple(str(l) for l in curr_labels) + ("inactive",)
    source_index = {str(l): i for i, l in enumerate(prev_labels)}
    target_index = {str(l): j for j, l in enumerate(curr_labels)}
    counts = np.zeros((len(sources), len(targets)), dtype=np.int64)
    for node, label in previous.assignment.items():
        i = source_index[str(label)]
        if node in current.assignment:
            j = target_index[str(current.assignment[node])]
        else:
            j = len(targets) - 1
        counts[i, j] += 1
    for node, label in current.assignment.items():
        if node not in previous.assignment:
            counts[len(sources) - 1, target_index[str(label)]] += 1
    return FlowMatrix(sources, targets, counts)
