"""Unit tests for topology, combiners, and the network step orchestration."""

import numpy as np
import pytest

from diffcg.diffusion import (
    Protocol,
    Topology,
    atc_step,
    build_topology,
    combine,
    cta_step,
    from_edge_list,
    identity_weights,
    metropolis_weights,
    network_step,
    noncooperative_step,
    to_edge_list,
)
from diffcg.engines import Engine, EngineParams, init_state
from diffcg.penalties import PenaltyParams


def path_topology(n):
    adj = np.eye(n, dtype=bool)
    for k in range(n - 1):
        adj[k, k + 1] = adj[k + 1, k] = True
    return Topology(adj)


def cg_ref(corr, cross, start, max_iters, tol):
    """Plain-arithmetic transcription of the inner CG loop."""
    w = start.astype(complex)
    g = cross - corr @ w
    p = g.copy()
    limit = tol * np.linalg.norm(cross)
    for _ in range(max_iters):
        if np.linalg.norm(g) <= limit:
            break
        alpha = np.real(np.conj(g) @ g) / np.real(np.conj(p) @ (corr @ p))
        w = w + alpha * p
        g_new = g - alpha * (corr @ p)
        beta = np.real(np.conj(g_new) @ g_new) / np.real(np.conj(g) @ g)
        p = g_new + beta * p
        g = g_new
    return w


class TestBuildTopology:
    def test_single_node(self):
        topo = build_topology(1)
        assert topo.nodes == 1
        assert np.array_equal(topo.adjacency, [[True]])

    def test_triangle_ring(self):
        topo = build_topology(3, extra_edges=0)
        assert np.all(topo.adjacency)
        np.testing.assert_array_equal(topo.neighbor_counts(), [3, 3, 3])

    def test_desk_scale_graph(self):
        topo = build_topology(20, extra_edges=20, seed=7)
        again = build_topology(20, extra_edges=20, seed=7)
        assert np.array_equal(topo.adjacency, again.adjacency)
        off_diag_true = int(topo.adjacency.sum()) - 20
        assert off_diag_true == 2 * 40  # ring 20 + chords 20, both directions
        assert np.all(np.diag(topo.adjacency))

    def test_different_seeds_differ(self):
        a = build_topology(20, extra_edges=20, seed=1)
        b = build_topology(20, extra_edges=20, seed=2)
        assert not np.array_equal(a.adjacency, b.adjacency)

    def test_too_many_chords(self):
        with pytest.raises(ValueError, match="extra_edges"):
            build_topology(4, extra_edges=100)

    def test_two_nodes_single_edge(self):
        topo = build_topology(2)
        np.testing.assert_array_equal(topo.neighbor_counts(), [2, 2])

    def test_validation(self):
        with pytest.raises(ValueError, match="symmetric"):
            Topology(np.array([[True, True], [False, True]]))
        with pytest.raises(ValueError, match="diagonal"):
            Topology(np.array([[False, True], [True, False]]))
        with pytest.raises(ValueError, match="connected"):
            adj = np.eye(4, dtype=bool)
            adj[0, 1] = adj[1, 0] = True
            adj[2, 3] = adj[3, 2] = True
            Topology(adj)


class TestMetropolisWeights:
    def test_single_node(self):
        np.testing.assert_array_equal(metropolis_weights(build_topology(1)), [[1.0]])

    def test_three_node_path(self):
        weights = metropolis_weights(path_topology(3))
        expected = np.array([
            [2.0 / 3.0, 1.0 / 3.0, 0.0],
            [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            [0.0, 1.0 / 3.0, 2.0 / 3.0],
        ])
        np.testing.assert_allclose(weights, expected, atol=1e-15)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    def test_stochastic_symmetric_supported(self, seed):
        rng = np.random.default_rng(seed)
        topo = build_topology(int(rng.integers(2, 25)), int(rng.integers(0, 10)), seed)
        weights = metropolis_weights(topo)
        assert np.array_equal(weights, weights.T)
        assert np.all(weights >= 0.0)
        np.testing.assert_allclose(weights.sum(axis=0), 1.0, atol=1e-12)
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(weights[~topo.adjacency] == 0.0)


class TestCombine:
    def test_identity_returns_own_estimate(self):
        rng = np.random.default_rng(0)
        est = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        out = combine(identity_weights(4), est)
        assert np.array_equal(out, est)

    def test_uniform_two_node_average(self):
        est = np.array([[1.0, 0.0], [0.0, 1.0]], dtype=complex)
        weights = np.full((2, 2), 0.5)
        np.testing.assert_allclose(combine(weights, est), [[0.5, 0.5], [0.5, 0.5]], atol=0)
        np.testing.assert_allclose(combine(weights, est, node=1), [0.5, 0.5], atol=0)

    def test_consensus_fixed_point(self):
        v = np.array([1.0 + 2j, -3.0, 0.5j])
        est = np.tile(v, (5, 1))
        weights = metropolis_weights(build_topology(5, 2, seed=3))
        np.testing.assert_allclose(combine(weights, est), est, atol=1e-12)

    def test_dimension_mismatch(self):
        from diffcg.numerics import DimensionMismatchError

        with pytest.raises(DimensionMismatchError):
            combine(np.eye(3), np.zeros((4, 2)))

    def test_averaging_contraction_bound(self):
        rng = np.random.default_rng(13)
        topo = build_topology(6, 3, seed=1)
        weights = metropolis_weights(topo)
        w0 = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        est = w0 + 0.3 * (rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4)))
        phi = combine(weights, est)
        errs = np.linalg.norm(est - w0, axis=1)
        for k in range(6):
            hood = np.flatnonzero(topo.adjacency[:, k])
            assert np.linalg.norm(phi[k] - w0) <= errs[hood].max() + 1e-12


def make_instant_data(rng, n, m, w0):
    x = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)
    noise = 0.03 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    d = (np.conj(w0) * x).sum(axis=1) + noise
    return x, d


class TestProtocolSteps:
    @pytest.mark.parametrize("engine", list(Engine))
    @pytest.mark.parametrize("protocol", [Protocol.CTA, Protocol.ATC])
    def test_single_node_reduces_to_engine(self, protocol, engine):
        rng = np.random.default_rng(2)
        params = EngineParams()
        w0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        net = init_state(3, params.diag_load, nodes=1)
        alone = init_state(3, params.diag_load, nodes=1)
        weights = metropolis_weights(build_topology(1))
        for _ in range(8):
            x, d = make_instant_data(rng, 1, 3, w0)
            net = network_step(protocol, net, weights, x, d, params, engine)
            alone = noncooperative_step(alone, x, d, params, engine)
            assert np.array_equal(net.weights, alone.weights)

    @pytest.mark.parametrize("engine", list(Engine))
    @pytest.mark.parametrize("protocol", [Protocol.CTA, Protocol.ATC])
    def test_identity_combiner_reduces_to_noncooperative(self, protocol, engine):
        rng = np.random.default_rng(3)
        params = EngineParams(penalty=PenaltyParams(kind="za", weight=1e-3))
        n, m = 5, 4
        w0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        net = init_state(m, params.diag_load, nodes=n)
        alone = init_state(m, params.diag_load, nodes=n)
        weights = identity_weights(n)
        for _ in range(6):
            x, d = make_instant_data(rng, n, m, w0)
            net = network_step(protocol, net, weights, x, d, params, engine)
            alone = noncooperative_step(alone, x, d, params, engine)
            assert np.array_equal(net.weights, alone.weights)

    @pytest.mark.parametrize("protocol", [Protocol.CTA, Protocol.ATC])
    def test_zero_weight_penalty_is_bit_identical(self, protocol):
        rng = np.random.default_rng(4)
        n, m = 4, 3
        plain = EngineParams()
        zeroed = EngineParams(penalty=PenaltyParams(kind="rza", weight=0.0))
        w0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        weights = metropolis_weights(build_topology(n, 1, seed=2))
        a = init_state(m, plain.diag_load, nodes=n)
        b = init_state(m, plain.diag_load, nodes=n)
        for _ in range(6):
            x, d = make_instant_data(rng, n, m, w0)
            a = network_step(protocol, a, weights, x, d, plain, Engine.CG)
            b = network_step(protocol, b, weights, x, d, zeroed, Engine.CG)
            assert np.array_equal(a.weights, b.weights)

    def test_cta_straight_line_oracle(self):
        rng = np.random.default_rng(8)
        m, lam, max_j, tol = 3, 0.95, 4, 1e-8
        params = EngineParams(forgetting=lam, step_scale=0.6, max_cg_iters=max_j, cg_tol=tol)
        weights = np.full((2, 2), 0.5)
        w0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        state = init_state(m, params.diag_load, nodes=2)
        # reference carries per node: R, b, w
        corr = [0.01 * np.eye(m, dtype=complex) for _ in range(2)]
        cross = [np.zeros(m, complex) for _ in range(2)]
        est = [np.zeros(m, complex) for _ in range(2)]
        for _ in range(3):
            x, d = make_instant_data(rng, 2, m, w0)
            phi = [0.5 * (est[0] + est[1]), 0.5 * (est[0] + est[1])]
            for k in range(2):
                corr[k] = lam * corr[k] + np.outer(x[k], np.conj(x[k]))
                cross[k] = lam * cross[k] + np.conj(d[k]) * x[k]
                est[k] = cg_ref(corr[k], cross[k], phi[k], max_j, tol)
            state = cta_step(state, weights, x, d, params, Engine.CG)
            for k in range(2):
                np.testing.assert_allclose(state.weights[k], est[k], atol=1e-10)
                np.testing.assert_allclose(state.corr[k], corr[k], atol=1e-12)

    def test_atc_straight_line_oracle(self):
        rng = np.random.default_rng(9)
        m, lam, max_j, tol = 3, 0.95, 4, 1e-8
        params = EngineParams(forgetting=lam, step_scale=0.6, max_cg_iters=max_j, cg_tol=tol)
        weights = np.full((2, 2), 0.5)
        w0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        state = init_state(m, params.diag_load, nodes=2)
        corr = [0.01 * np.eye(m, dtype=complex) for _ in range(2)]
        cross = [np.zeros(m, complex) for _ in range(2)]
        est = [np.zeros(m, complex) for _ in range(2)]
        for _ in range(3):
            x, d = make_instant_data(rng, 2, m, w0)
            adapted = []
            for k in range(2):
                corr[k] = lam * corr[k] + np.outer(x[k], np.conj(x[k]))
                cross[k] = lam * cross[k] + np.conj(d[k]) * x[k]
                adapted.append(cg_ref(corr[k], cross[k], est[k], max_j, tol))
            est = [0.5 * (adapted[0] + adapted[1]), 0.5 * (adapted[0] + adapted[1])]
            state = atc_step(state, weights, x, d, params, Engine.CG)
            for k in range(2):
                np.testing.assert_allclose(state.weights[k], est[k], atol=1e-10)
                np.testing.assert_allclose(state.combined[k], adapted[k], atol=1e-10)

    @pytest.mark.parametrize("protocol", [Protocol.CTA, Protocol.ATC])
    def test_permutation_equivariance(self, protocol):
        rng = np.random.default_rng(10)
        n, m = 4, 3
        perm = np.array([2, 0, 3, 1])
        params = EngineParams(penalty=PenaltyParams(kind="za", weight=1e-3))
        topo = build_topology(n, 1, seed=5)
        weights = metropolis_weights(topo)
        w0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        state = init_state(m, params.diag_load, nodes=n)
        state_p = init_state(m, params.diag_load, nodes=n)
        for _ in range(4):
            x, d = make_instant_data(rng, n, m, w0)
            state = network_step(protocol, state, weights, x, d, params, Engine.CG)
            state_p = network_step(
                protocol, state_p, weights[np.ix_(perm, perm)], x[perm], d[perm],
                params, Engine.CG,
            )
            np.testing.assert_allclose(state_p.weights, state.weights[perm], atol=1e-10)

    def test_penalty_applied_to_final_estimate(self):
        # CTA shrinks the adapted estimate; ATC shrinks the combined one
        rng = np.random.default_rng(11)
        n, m = 3, 2
        rho = 1e-2
        plain = EngineParams()
        spars = EngineParams(penalty=PenaltyParams(kind="za", weight=rho))
        weights = metropolis_weights(build_topology(n))
        w0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        x, d = make_instant_data(rng, n, m, w0)
        base = init_state(m, plain.diag_load, nodes=n)
        from diffcg.penalties import shrink

        cta_plain = cta_step(base, weights, x, d, plain, Engine.CG)
        cta_spars = cta_step(base, weights, x, d, spars, Engine.CG)
        np.testing.assert_allclose(
            cta_spars.weights, shrink(cta_plain.weights, spars.penalty), atol=1e-14
        )
        atc_plain = atc_step(base, weights, x, d, plain, Engine.CG)
        atc_spars = atc_step(base, weights, x, d, spars, Engine.CG)
        np.testing.assert_allclose(
            atc_spars.weights, shrink(atc_plain.weights, spars.penalty), atol=1e-14
        )


class TestEdgeList:
    def test_round_trip(self):
        topo = build_topology(9, 4, seed=6)
        back = from_edge_list(to_edge_list(topo))
        assert np.array_equal(topo.adjacency, back.adjacency)

    def test_single_node_round_trip(self):
        topo = build_topology(1)
        assert to_edge_list(topo).strip() == "0 0"
        assert from_edge_list(to_edge_list(topo)).nodes == 1

    def test_malformed_lines(self):
        with pytest.raises(ValueError, match="line 1"):
            from_edge_list("0 1 2\n")
        with pytest.raises(ValueError, match="non-integer"):
            from_edge_list("0 x\n")
        with pytest.raises(ValueError, match="empty"):
            from_edge_list("\n\n")

    def test_comments_and_blanks_ignored(self):
        topo = from_edge_list("# ring of 3\n0 1\n\n1 2\n0 2\n")
        assert topo.nodes == 3
        assert np.all(topo.adjacency)
