import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from megflood.markov import TransitionKernel, complete_walk_kernel, two_state_kernel
from megflood.mobility import build_random_path, cycle
from megflood.nodemeg import (
    PAIR_DEPENDENCE_FACTOR,
    ConstantConnection,
    MatrixConnection,
    NodeMeg,
    NodeMegError,
    PointConnection,
    brute_force_p_nm,
    constant_model,
    epoch_length,
    epoch_length_value,
    model_from_json,
    node_meg_bound,
    node_meg_bound_value,
    pair_dependence_closed_form,
    pair_dependence_enumerate,
    pair_dependence_monte_carlo,
    point_meeting_model,
    verify_pair_dependence,
)


@pytest.fixture(scope="module")
def cycle_paths():
    H = cycle(3)
    return build_random_path(H, H.edge_paths(), n=64)


def triple_loop_p_nm(C, pi):
    S = len(pi)
    p = p2 = 0.0
    for x, y in itertools.product(range(S), repeat=2):
        p += pi[x] * pi[y] * C[x][y]
    for x, y, z in itertools.product(range(S), repeat=3):
        p2 += pi[x] * pi[y] * pi[z] * C[x][z] * C[y][z]
    return p, p2


def naive_pair_terms(C, pi, a):
    """P(e_iA e_jA) and P(e_iA) summing over all states of i, j and A."""
    S = len(pi)
    joint = single = 0.0
    for tup in itertools.product(range(S), repeat=a + 2):
        w = math.prod(pi[s] for s in tup)
        i, j, A = tup[0], tup[1], tup[2:]
        ei = any(C[i][z] for z in A)
        ej = any(C[j][z] for z in A)
        joint += w * (ei and ej)
        single += w * ei
    return joint, single


@st.composite
def small_models(draw):
    S = draw(st.integers(1, 4))
    rows = np.array(draw(st.lists(st.lists(st.floats(0.05, 1.0), min_size=S, max_size=S),
                                  min_size=S, max_size=S)))
    kernel = TransitionKernel(rows / rows.sum(axis=1, keepdims=True))
    bits = draw(st.lists(st.booleans(), min_size=S * S, max_size=S * S))
    C = np.array(bits, dtype=bool).reshape(S, S)
    C = C | C.T
    if not C.any():
        C[0, 0] = True
    return NodeMeg(6, kernel, MatrixConnection(C))


class TestConnections:
    def test_matrix_must_be_symmetric(self):
        with pytest.raises(NodeMegError):
            MatrixConnection([[1, 1], [0, 1]])

    def test_adjacency_has_no_self_loops(self):
        conn = ConstantConnection(3, True)
        adj = conn.adjacency(np.array([0, 1, 2, 0]))
        assert not adj.diagonal().any()
        assert adj.sum() == 12

    def test_point_connection_radius(self):
        coords = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
        conn = PointConnection.within_radius([0, 1, 2, 2], coords, 1.0)
        C = conn.matrix()
        assert C[0, 1] and not C[0, 2] and C[2, 3]
        assert conn.is_symmetric(rng=0)

    def test_point_q_from_profile(self):
        conn = PointConnection.same_point([0, 0, 1], 2)
        pi = np.array([0.2, 0.3, 0.5])
        assert np.allclose(conn.profile(pi), [0.5, 0.5])
        assert np.allclose(conn.q(pi), [0.5, 0.5, 0.5])
        assert np.allclose(conn.q(pi), conn.matrix() @ pi)


class TestAnalytics:
    def test_cycle_paths_exact(self, cycle_paths):
        nm = cycle_paths
        assert nm.state_count == 6
        assert np.allclose(nm.pi, 1 / 6)
        assert np.allclose(nm.q, 1 / 3)
        assert nm.p_nm == pytest.approx(1 / 3, abs=1e-12)
        assert nm.p_nm2 == pytest.approx(1 / 9, abs=1e-12)
        assert nm.eta == 1.0

    def test_cycle_paths_brute_force(self, cycle_paths):
        C = cycle_paths.connection.matrix().astype(int).tolist()
        p, p2 = triple_loop_p_nm(C, list(cycle_paths.pi))
        assert p == pytest.approx(cycle_paths.p_nm, abs=1e-12)
        assert p2 == pytest.approx(cycle_paths.p_nm2, abs=1e-12)
        assert brute_force_p_nm(cycle_paths) == pytest.approx((p, p2), abs=1e-12)

    def test_cycle_paths_monte_carlo(self, cycle_paths):
        rng = np.random.default_rng(0)
        N = 100_000
        xs = cycle_paths.sample_states(3 * N, rng).reshape(N, 3)
        conn = cycle_paths.connection
        e01 = conn.pairs(xs[:, 0], xs[:, 1])
        e02 = conn.pairs(xs[:, 0], xs[:, 2])
        for est, exact in ((e01.mean(), 1 / 3), ((e01 & e02).mean(), 1 / 9)):
            assert abs(est - exact) <= 3 * math.sqrt(exact * (1 - exact) / N)

    def test_point_meeting(self):
        nm = point_meeting_model()
        assert nm.p_nm == pytest.approx(0.81)
        assert nm.p_nm2 == pytest.approx(0.729)
        assert nm.eta == pytest.approx(0.729 / 0.81**2)
        assert nm.t_mix == 1

    def test_eta_clamped(self):
        nm = constant_model(5, complete_walk_kernel(3), True)
        assert nm.p_nm == 1.0 and nm.eta_raw == 1.0 and nm.eta == 1.0

    def test_never_connected(self):
        nm = constant_model(5, complete_walk_kernel(3), False)
        assert nm.p_nm == 0.0
        with pytest.raises(NodeMegError):
            nm.eta

    @given(small_models())
    @settings(max_examples=60, deadline=None)
    def test_p_nm_matches_loops(self, nm):
        C = nm.connection.matrix().astype(int).tolist()
        p, p2 = triple_loop_p_nm(C, list(nm.pi))
        assert nm.p_nm == pytest.approx(p, abs=1e-12)
        assert nm.p_nm2 == pytest.approx(p2, abs=1e-12)
        # Jensen: E[q^2] >= E[q]^2
        assert nm.p_nm2 >= nm.p_nm**2 - 1e-12


class TestBounds:
    def test_epoch_length(self):
        assert epoch_length_value(3, 0.5, 10) == math.ceil(3 * math.log(2 * 10 / 0.25))
        nm = point_meeting_model(n=16)
        assert epoch_length(nm) == math.ceil(math.log(32 / 0.81**2))

    def test_bound_formula(self):
        v = node_meg_bound_value(2, 0.1, 1.5, 50, c=3.0)
        assert v == pytest.approx(3 * 2 * (1 / 5 + 1.5) ** 2 * math.log(50) ** 3)

    def test_bound_clamps_eta(self):
        assert node_meg_bound_value(1, 0.2, 0.3, 20) == node_meg_bound_value(1, 0.2, 1.0, 20)

    def test_bound_on_model(self, cycle_paths):
        expected = cycle_paths.t_mix * (3 / 64 + 1) ** 2 * math.log(64) ** 3
        assert node_meg_bound(cycle_paths) == pytest.approx(expected)
        assert node_meg_bound(cycle_paths, n=128) > node_meg_bound(cycle_paths)

    def test_tiny_density_warns(self):
        with pytest.warns(RuntimeWarning):
            node_meg_bound_value(1, 1e-15, 1.0, 100)
        with pytest.raises(NodeMegError):
            node_meg_bound_value(1, 0.0, 1.0, 100)


class TestPairDependence:
    def test_three_routes_agree(self, cycle_paths):
        for a in (1, 2, 3):
            e = pair_dependence_enumerate(cycle_paths, a)
            c = pair_dependence_closed_form(cycle_paths, a)
            assert e == pytest.approx(c, abs=1e-12)
            joint, prod, ratio, radius = pair_dependence_monte_carlo(cycle_paths, a, 40_000, a)
            assert abs(ratio - e[0] / e[1] ** 2) <= radius

    def test_naive_enumeration(self):
        nm = point_meeting_model()
        C = nm.connection.matrix().astype(int).tolist()
        for a in (1, 2):
            assert pair_dependence_enumerate(nm, a) == pytest.approx(
                naive_pair_terms(C, list(nm.pi), a), abs=1e-12)

    @given(small_models(), st.integers(1, 2))
    @settings(max_examples=40, deadline=None)
    def test_routes_agree_and_bound_holds(self, nm, a):
        C = nm.connection.matrix().astype(int).tolist()
        naive = naive_pair_terms(C, list(nm.pi), a)
        assert pair_dependence_enumerate(nm, a) == pytest.approx(naive, abs=1e-12)
        assert pair_dependence_closed_form(nm, a) == pytest.approx(naive, abs=1e-12)
        joint, single = naive
        assert joint <= PAIR_DEPENDENCE_FACTOR * nm.eta * single**2 + 1e-12

    def test_report(self, cycle_paths):
        rep = verify_pair_dependence(cycle_paths, trials=5000, rng=1)
        assert rep.passed
        methods = {r.method for r in rep.rows}
        assert methods == {"enumeration", "inclusion-exclusion", "monte-carlo"}
        assert all(r.limit == 17.0 for r in rep.rows)

    def test_indeterminate_rows(self):
        rep = verify_pair_dependence(constant_model(6, two_state_kernel(0.5, 0.5), True),
                                     set_sizes=(1,), trials=0)
        assert rep.passed
        with pytest.raises(NodeMegError):
            verify_pair_dependence(point_meeting_model(n=4), set_sizes=(3,))


class TestProcess:
    def test_snapshots_follow_connection(self, cycle_paths):
        meg = cycle_paths.with_n(10).as_meg()
        rng = np.random.default_rng(2)
        meg.reset(rng)
        for _ in range(5):
            snap = meg.advance(rng)
            pts = cycle_paths.connection.point_of_state[meg.states]
            assert np.array_equal(snap.adj, (pts[:, None] == pts[None, :]) & ~np.eye(10, dtype=bool))

    def test_stationary_occupancy(self, cycle_paths):
        meg = cycle_paths.with_n(500).as_meg()
        rng = np.random.default_rng(3)
        meg.reset(rng)
        counts = np.zeros(6)
        for _ in range(40):
            meg.advance(rng)
            counts += np.bincount(meg.states, minlength=6)
        freq = counts / counts.sum()
        assert np.abs(freq - 1 / 6).max() < 0.02

    def test_from_json(self):
        nm = model_from_json({"n": 5, "kernel": {"builtin": "two_state", "p": 0.5, "q": 0.5},
                              "connection": {"matrix": [[0, 1], [1, 1]]}})
        assert nm.p_nm == pytest.approx(0.75)
        with pytest.raises(NodeMegError):
            model_from_json({"n": 5, "kernel": {"builtin": "cycle", "k": 2}, "connection": {"other": 1}})
