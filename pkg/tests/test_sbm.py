import math

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from conflictnet import community
from conflictnet.community import EmConfig, Partition, SbmFit
from conflictnet.projection import WeightedGraph

from oracles import random_symmetric_graph


def graph_from_weights(w):
    w = np.asarray(w)
    nodes = tuple(f"N{i}" for i in range(w.shape[0]))
    return WeightedGraph(nodes, w)


def planted_graph(seed, n=60, q=2, rate_in=4.0, rate_out=0.3):
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % q
    lam = np.full((q, q), rate_out)
    np.fill_diagonal(lam, rate_in)
    w = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            w[i, j] = w[j, i] = rng.poisson(lam[labels[i], labels[j]])
    return graph_from_weights(w), labels


def random_partition(rng, nodes, q_max):
    labels = rng.integers(1, q_max + 1, size=len(nodes))
    return Partition.from_labels(nodes, labels)


def random_rates(rng, q):
    lam = rng.uniform(0.2, 3.0, size=(q, q))
    return (lam + lam.T) / 2.0


# ---------------------------------------------------------------------------
# configuration and guards


def test_em_config_requires_seed():
    with pytest.raises(TypeError):
        EmConfig()
    with pytest.raises(ValueError):
        EmConfig(seed=True)
    with pytest.raises(ValueError):
        EmConfig(seed=1.5)
    with pytest.raises(ValueError):
        EmConfig(seed=3, restarts=0)
    with pytest.raises(ValueError):
        EmConfig(seed=3, tol=0.0)
    EmConfig(seed=0)


def test_sbm_fit_guards():
    g, _ = planted_graph(1, n=10)
    config = EmConfig(seed=1, restarts=1, max_iter=20)
    with pytest.raises(ValueError):
        community.sbm_fit(g, 0, config)
    with pytest.raises(ValueError):
        community.sbm_fit(g, 11, config)
    with pytest.raises(ValueError):
        community.sbm_fit(g, 2.0, config)


# ---------------------------------------------------------------------------
# single-block closed form


def test_single_block_rate_is_pair_mean():
    g, _ = planted_graph(7, n=20)
    fit = community.sbm_fit(g, 1, EmConfig(seed=5, restarts=1))
    n = g.n_nodes
    expected_rate = g.weights.sum() / (n * (n - 1))
    assert fit.q == 1
    assert fit.theta.tolist() == [1.0]
    assert fit.lam[0, 0] == pytest.approx(expected_rate, rel=1e-12)
    assert np.all(fit.responsibilities == 1.0)
    assert fit.map_partition.q == 1


def test_single_block_map_loglik_matches_direct_sum():
    g, _ = planted_graph(8, n=15)
    fit = community.sbm_fit(g, 1, EmConfig(seed=5, restarts=1))
    lam = fit.lam[0, 0]
    iu = np.triu_indices(g.n_nodes, k=1)
    counts = g.weights[iu]
    want = float(
        (counts * math.log(lam) - lam - np.array([math.lgamma(c + 1) for c in counts])).sum()
    )
    assert fit.map_loglik == pytest.approx(want, rel=1e-10)


# ---------------------------------------------------------------------------
# bound behavior


def test_bound_never_decreases_within_restarts():
    rng = np.random.default_rng(90)
    for trial in range(6):
        n = int(rng.integers(8, 30))
        w = random_symmetric_graph(rng, n, 0.3, max_weight=4)
        g = graph_from_weights(w)
        config = EmConfig(seed=trial, restarts=3, max_iter=80)
        fit = community.sbm_fit(g, int(rng.integers(1, 5)), config)
        assert len(fit.restart_trajectories) == 3
        for trajectory in fit.restart_trajectories:
            diffs = np.diff(np.array(trajectory))
            assert (diffs >= -1e-9).all()


def test_best_restart_wins():
    g, _ = planted_graph(3, n=40)
    fit = community.sbm_fit(g, 2, EmConfig(seed=9, restarts=4, max_iter=60))
    finals = [t[-1] for t in fit.restart_trajectories]
    if not fit.compacted:
        assert fit.bound == pytest.approx(max(finals), rel=1e-12)
    assert fit.bound_trajectory[-1] == pytest.approx(max(finals), rel=1e-12)


def test_fit_is_deterministic_per_seed():
    g, _ = planted_graph(4, n=30)
    config = EmConfig(seed=123, restarts=2, max_iter=60)
    a = community.sbm_fit(g, 3, config)
    b = community.sbm_fit(g, 3, config)
    assert a.bound == b.bound
    assert np.array_equal(a.responsibilities, b.responsibilities)
    assert a.map_partition.assignment == b.map_partition.assignment
    assert a.icl == b.icl


# ---------------------------------------------------------------------------
# recovery and selection


def test_planted_two_blocks_recovered():
    g, truth = planted_graph(10, n=60, q=2)
    fit = community.sbm_fit(g, 2, EmConfig(seed=2, restarts=2, max_iter=120))
    got = fit.map_partition.label_array(g.nodes)
    assert adjusted_rand_score(truth, got) == 1.0
    assert sorted(fit.map_partition.sizes().values()) == [30, 30]


def test_select_communities_prefers_planted_order():
    g, _ = planted_graph(11, n=60, q=2)
    config = EmConfig(seed=6, restarts=2, max_iter=120)
    best, curve = community.select_communities(g, range(1, 5), config)
    assert [q for q, _ in curve] == [1, 2, 3, 4]
    assert best.q == 2
    assert max(icl for _, icl in curve) == pytest.approx(best.icl)
    with pytest.raises(ValueError):
        community.select_communities(g, [], config)


def test_overfit_q_compacts_to_fewer_blocks():
    # two dense blocks, no cross edges: q=4 collapses in the MAP
    w = np.zeros((16, 16), dtype=np.int64)
    for block in (range(8), range(8, 16)):
        for i in block:
            for j in block:
                if i != j:
                    w[i, j] = 3
    g = graph_from_weights(w)
    fit = community.sbm_fit(g, 4, EmConfig(seed=1, restarts=3, max_iter=80))
    assert fit.q <= 4
    assert fit.responsibilities.shape == (16, fit.q)
    assert fit.theta.shape == (fit.q,)
    assert fit.lam.shape == (fit.q, fit.q)
    assert set(fit.map_partition.assignment.values()) == set(range(1, fit.q + 1))
    if fit.q < 4:
        assert fit.compacted


# ---------------------------------------------------------------------------
# completed likelihood, two routes


def test_complete_loglik_hand_value():
    # one pair, count 2, rate 1: -1 + 2 log 1 - log 2!
    g = graph_from_weights([[0, 2], [2, 0]])
    p = Partition.from_labels(g.nodes, (1, 1))
    got = community.poisson_complete_loglik(g, p, np.array([[1.0]]))
    assert got == pytest.approx(-1.0 - math.log(2.0), abs=1e-12)


def test_pairwise_and_block_routes_agree():
    rng = np.random.default_rng(55)
    for _ in range(50):
        n = int(rng.integers(2, 30))
        w = random_symmetric_graph(rng, n, 0.4, max_weight=5)
        g = graph_from_weights(w)
        q = int(rng.integers(1, min(n, 5) + 1))
        p = random_partition(rng, g.nodes, q)
        lam = random_rates(rng, p.q)
        theta = rng.dirichlet(np.ones(p.q))
        a = community.poisson_complete_loglik(g, p, lam)
        b = community.block_aggregated_loglik(g, p, lam)
        assert a == pytest.approx(b, abs=1e-9)
        a2 = community.poisson_complete_loglik(g, p, lam, theta)
        b2 = community.block_aggregated_loglik(g, p, lam, theta)
        assert a2 == pytest.approx(b2, abs=1e-9)


def test_dense_pair_convention_shifts_by_half_diagonal():
    rng = np.random.default_rng(66)
    for _ in range(20):
        n = int(rng.integers(3, 20))
        w = random_symmetric_graph(rng, n, 0.5, max_weight=3)
        g = graph_from_weights(w)
        p = random_partition(rng, g.nodes, 3)
        lam = random_rates(rng, p.q)
        sparse = community.block_aggregated_loglik(g, p, lam)
        dense = community.block_aggregated_loglik(g, p, lam, dense_pairs=True)
        sizes = np.array([p.sizes()[c] for c in range(1, p.q + 1)], dtype=float)
        shift = float((np.diag(lam) * sizes).sum()) / 2.0
        assert dense == pytest.approx(sparse - shift, abs=1e-9)


def test_mixing_term_adds_label_logs():
    g = graph_from_weights([[0, 1, 0], [1, 0, 2], [0, 2, 0]])
    p = Partition.from_labels(g.nodes, (1, 2, 1))
    lam = np.array([[0.5, 1.0], [1.0, 2.0]])
    theta = np.array([0.25, 0.75])
    base = community.poisson_complete_loglik(g, p, lam)
    with_mix = community.poisson_complete_loglik(g, p, lam, theta)
    assert with_mix == pytest.approx(base + 2 * math.log(0.25) + math.log(0.75))


def test_zero_rate_needs_smoothing():
    g = graph_from_weights([[0, 3], [3, 0]])
    p = Partition.from_labels(g.nodes, (1, 1))
    zero = np.array([[0.0]])
    with pytest.raises(ValueError, match="smoothing"):
        community.poisson_complete_loglik(g, p, zero)
    with pytest.raises(ValueError, match="smoothing"):
        community.block_aggregated_loglik(g, p, zero)
    smoothed = community.poisson_complete_loglik(g, p, zero, smoothing=True)
    floor = community.RATE_FLOOR
    want = 3 * math.log(floor) - floor - math.log(6.0)
    assert smoothed == pytest.approx(want, rel=1e-12)
    assert community.block_aggregated_loglik(g, p, zero, smoothing=True) == pytest.approx(
        want, rel=1e-12
    )


def test_zero_rate_without_observations_is_fine():
    g = graph_from_weights([[0, 0, 2], [0, 0, 2], [2, 2, 0]])
    p = Partition.from_labels(g.nodes, (1, 1, 2))
    lam = np.array([[0.0, 1.0], [1.0, 0.5]])
    value = community.poisson_complete_loglik(g, p, lam)
    assert np.isfinite(value)


def test_rate_matrix_validation():
    g = graph_from_weights([[0, 1], [1, 0]])
    p = Partition.from_labels(g.nodes, (1, 2))
    with pytest.raises(ValueError):
        community.poisson_complete_loglik(g, p, np.array([[1.0]]))
    with pytest.raises(ValueError):
        community.poisson_complete_loglik(g, p, np.array([[1.0, 2.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        community.poisson_complete_loglik(g, p, -np.ones((2, 2)))


# ---------------------------------------------------------------------------
# ICL


def test_icl_penalty_hand_value():
    # q=1: only the rate penalty survives
    n = 10
    assert community._icl_penalty(1, n) == pytest.approx(0.5 * math.log(45.0))
    # q=2 adds the proportion penalty (2-1)/2 log n
    assert community._icl_penalty(2, n) == pytest.approx(
        0.5 * math.log(10.0) + 1.5 * math.log(45.0)
    )
    with pytest.raises(ValueError):
        community._icl_penalty(1, 1)


def test_icl_score_matches_fit():
    g, _ = planted_graph(12, n=30)
    fit = community.sbm_fit(g, 2, EmConfig(seed=4, restarts=2, max_iter=60))
    assert community.icl_score(fit) == pytest.approx(fit.icl, rel=1e-12)
    assert fit.icl == pytest.approx(
        fit.map_loglik - community._icl_penalty(fit.q, g.n_nodes)
    )


# ---------------------------------------------------------------------------
# serialization


def test_fit_round_trips_through_dict():
    g, _ = planted_graph(13, n=25)
    fit = community.sbm_fit(g, 2, EmConfig(seed=8, restarts=2, max_iter=60))
    data = fit.to_dict()
    back = SbmFit.from_dict(data)
    assert back.nodes == fit.nodes
    assert back.q == fit.q
    assert np.array_equal(back.theta, fit.theta)
    assert np.array_equal(back.lam, fit.lam)
    assert np.array_equal(back.responsibilities, fit.responsibilities)
    assert back.map_partition.assignment == fit.map_partition.assignment
    assert back.map_loglik == fit.map_loglik
    assert back.icl == fit.icl
    assert back.bound == fit.bound
    assert back.bound_trajectory == fit.bound_trajectory
    assert back.restart_trajectories == fit.restart_trajectories
    assert back.compacted == fit.compacted
