import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from megflood.edgemeg import (
    EdgeChainSpec,
    EdgeMeg,
    build_two_state,
    edge_meg_alpha,
    edge_meg_bound,
    edge_meg_value,
    sparse_flooding_comparator,
    spec_from_config,
    two_state_alpha,
)
from megflood.markov import MarkovError, TransitionKernel, mixing_time, two_state_kernel


class TestSpec:
    @given(st.floats(0.001, 1.0), st.floats(0.001, 1.0))
    @settings(max_examples=50, deadline=None)
    def test_two_state_alpha(self, p, q):
        spec = EdgeChainSpec(two_state_kernel(p, q), (0, 1))
        assert edge_meg_alpha(spec) == pytest.approx(p / (p + q), abs=1e-9)
        assert two_state_alpha(p, q) == pytest.approx(p / (p + q))

    def test_three_state_hidden_chain(self):
        # on only in state 2 of a uniform-stationary doubly stochastic chain
        P = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        spec = EdgeChainSpec(TransitionKernel(P), (0, 0, 1))
        assert spec.alpha == pytest.approx(1 / 3)
        assert not spec.degenerate

    def test_degenerate(self):
        spec = EdgeChainSpec(two_state_kernel(0.3, 0.3), (0, 0))
        assert spec.degenerate
        with pytest.raises(MarkovError):
            edge_meg_bound(10, spec)

    def test_chi_validation(self):
        with pytest.raises(MarkovError):
            EdgeChainSpec(two_state_kernel(0.3, 0.3), (0, 1, 1))
        with pytest.raises(MarkovError):
            EdgeChainSpec(two_state_kernel(0.3, 0.3), (0, 2))

    def test_rates_validated(self):
        with pytest.raises(MarkovError):
            build_two_state(10, 0.0, 0.5)
        with pytest.raises(MarkovError):
            build_two_state(1, 0.5, 0.5)

    def test_from_config(self):
        assert spec_from_config({"p": 0.2, "q": 0.3}).alpha == pytest.approx(0.4)
        spec = spec_from_config({"kernel": {"builtin": "two_state", "p": 0.1, "q": 0.1},
                                 "chi": [1, 0], "init": [1.0, 0.0]})
        assert spec.alpha == pytest.approx(0.5)
        assert np.array_equal(spec.init, [1.0, 0.0])


class TestProcess:
    def test_stationary_density(self):
        meg = build_two_state(40, 0.1, 0.4)
        rng = np.random.default_rng(0)
        meg.reset(rng)
        dens = [meg.advance(rng).edge_count / meg.pair_count for _ in range(200)]
        assert np.mean(dens) == pytest.approx(0.2, abs=0.01)

    def test_transition_rates(self):
        p, q = 0.2, 0.6
        meg = build_two_state(60, p, q)
        rng = np.random.default_rng(1)
        before = meg.reset(rng).adj[meg.iu, meg.ju]
        born = died = off = on = 0
        for _ in range(60):
            after = meg.advance(rng).adj[meg.iu, meg.ju]
            born += int((~before & after).sum())
            died += int((before & ~after).sum())
            off += int((~before).sum())
            on += int(before.sum())
            before = after
        assert born / off == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / off))
        assert died / on == pytest.approx(q, abs=4 * math.sqrt(q * (1 - q) / on))

    def test_edges_independent(self):
        # incident edges {0,1} and {0,2} should be uncorrelated
        meg = build_two_state(3, 0.3, 0.3)
        rng = np.random.default_rng(2)
        N = 20_000
        a = np.empty(N, dtype=bool)
        b = np.empty(N, dtype=bool)
        for k in range(N):
            s = meg.reset(rng)
            a[k], b[k] = s.adj[0, 1], s.adj[0, 2]
        joint = (a & b).mean()
        assert joint == pytest.approx(a.mean() * b.mean(), abs=4 * math.sqrt(0.25 * 0.75 / N))

    def test_point_mass_init(self):
        spec = EdgeChainSpec(two_state_kernel(0.5, 0.5), (0, 1), init=[0.0, 1.0])
        meg = EdgeMeg(6, spec)
        assert meg.exchangeable
        assert meg.reset(np.random.default_rng(0)).edge_count == 15

    def test_per_edge_init(self):
        E = 3
        table = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        meg = EdgeMeg(3, EdgeChainSpec(two_state_kernel(0.5, 0.5), (0, 1), init=table))
        assert not meg.exchangeable
        assert meg.reset(np.random.default_rng(0)).edges() == [(0, 2)]
        bad = EdgeMeg(3, EdgeChainSpec(two_state_kernel(0.5, 0.5), (0, 1), init=np.ones((E + 1, 2)) / 2))
        with pytest.raises(MarkovError):
            bad.reset(np.random.default_rng(0))


class TestBounds:
    def test_bound_formula(self):
        spec = EdgeChainSpec(two_state_kernel(0.02, 0.5), (0, 1))
        alpha = 0.02 / 0.52
        t = mixing_time(spec.kernel)
        expected = t * (1 / (128 * alpha) + 1) ** 2 * math.log(128) ** 2
        assert edge_meg_bound(128, spec) == pytest.approx(expected)
        assert edge_meg_value(t, alpha, 128, c=2.0) == pytest.approx(2 * expected)

    def test_comparator(self):
        assert sparse_flooding_comparator(64, 2 / 64) == pytest.approx(math.log(64) / math.log(3))
        with pytest.raises(MarkovError):
            sparse_flooding_comparator(64, 0.0)

    def test_comparator_log_growth(self):
        vals = [sparse_flooding_comparator(n, 2 / n) for n in (64, 128, 256)]
        for a, b in zip(vals, vals[1:]):
            assert b - a == pytest.approx(math.log(2) / math.log(3))

    def test_edge_bound_dominates_comparator(self):
        for n in (64, 128, 256):
            spec = EdgeChainSpec(two_state_kernel(2 / n, 0.5), (0, 1))
            assert edge_meg_bound(n, spec) > sparse_flooding_comparator(n, 2 / n)
