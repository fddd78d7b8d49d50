import math

import networkx as nx
import numpy as np
import pytest

from megflood.markov import NotErgodicError, mixing_time, stationary_distribution
from megflood.mobility import (
    GridRegion,
    MobilityError,
    MobilityGraph,
    PathFamily,
    PositionalProfile,
    PreconditionError,
    WaypointChain,
    WaypointConfig,
    analyse_waypoint,
    build_random_path,
    build_random_walk,
    build_random_waypoint,
    complete,
    cycle,
    graph_delta,
    graph_walk_bound,
    graph_walk_bound_value,
    grid,
    k_augmented_grid,
    path_chain,
    path_family_checks,
    path_model_bound,
    path_model_bound_value,
    positional_profile,
    region_bound,
    region_bound_value,
    region_check,
    star,
)


def line_family(m):
    """All shortest paths along a path graph 0..m-1, both directions."""
    paths = []
    for a in range(m):
        for b in range(m):
            if a != b:
                step = 1 if b > a else -1
                paths.append(tuple(range(a, b + step, step)))
    return PathFamily(paths)


def path_graph(m):
    return MobilityGraph(nx.path_graph(m), name=f"path({m})")


class TestGraphs:
    def test_grid(self):
        H = grid(4)
        assert H.point_count == 16
        assert H.graph.number_of_edges() == 24
        assert H.graph.has_edge(0, 1) and H.graph.has_edge(0, 4)
        assert tuple(H.coords[5]) == (1.0, 1.0)

    def test_k_augmented_grid_by_manhattan(self):
        H = k_augmented_grid(5, 2)
        for u in range(25):
            for v in range(u + 1, 25):
                d = abs(u // 5 - v // 5) + abs(u % 5 - v % 5)
                assert H.graph.has_edge(u, v) == (d <= 2)

    def test_star_and_cycle_delta(self):
        assert graph_delta(star(5)) == 5
        assert graph_delta(cycle(7)) == 1
        assert graph_delta(complete(4)) == 1

    def test_validation(self):
        g = nx.Graph([(0, 1), (2, 3)])
        with pytest.raises(MobilityError):
            MobilityGraph(g)
        with pytest.raises(MobilityError):
            MobilityGraph(nx.Graph([(1, 2)]))
        with pytest.raises(MobilityError):
            grid(1)

    def test_json_round_trip(self):
        H = grid(3)
        back = MobilityGraph.from_json(H.to_json())
        assert nx.utils.graphs_equal(back.graph, H.graph)
        assert np.array_equal(back.coords, H.coords)


class TestPathFamilies:
    def test_closure_required(self):
        with pytest.raises(MobilityError):
            PathFamily([(0, 1)])
        with pytest.raises(MobilityError):
            PathFamily([(0,)])

    def test_non_edges_rejected(self):
        with pytest.raises(MobilityError):
            PathFamily([(0, 2), (2, 0)]).validate_on(path_graph(3))

    def test_checks(self):
        H = path_graph(4)
        fam = line_family(4)
        chk = path_family_checks(H, fam)
        assert chk.simple and chk.reversible and not chk.failures
        counts = fam.pass_counts(4)
        assert chk.delta == pytest.approx(counts.max() / counts.mean())

    def test_failures_listed(self):
        H = cycle(3)
        fam = PathFamily([(0, 1, 2, 0), (0, 2, 1, 0)])
        chk = path_family_checks(H, fam)
        assert not chk.simple and chk.reversible
        one_way = PathFamily([(0, 1, 2), (2, 0)])
        assert not path_family_checks(H, one_way).reversible
        with pytest.raises(PreconditionError):
            path_model_bound(1, chk, 3, 10)

    def test_chain_structure(self):
        kernel, point = path_chain(PathFamily([(0, 1, 2), (2, 1, 0)]))
        assert point.tolist() == [1, 2, 1, 0]
        P = kernel.dense()
        assert P[0, 1] == 1 and P[1, 2] == 1 and P[3, 0] == 1

    @pytest.mark.parametrize("H,fam", [(path_graph(4), line_family(4)),
                                       (cycle(5), cycle(5).edge_paths())])
    def test_uniform_stationary_and_density(self, H, fam):
        nm = build_random_path(H, fam, n=10)
        pi = stationary_distribution(nm.chain)
        assert np.allclose(pi, 1 / nm.state_count, atol=1e-12)
        delta = path_family_checks(H, fam).delta
        assert nm.p_nm >= 1 / H.point_count - 1e-12
        assert nm.p_nm2 <= delta**3 * nm.p_nm**2 + 1e-12


class TestRandomWalk:
    def test_bipartite_needs_laziness(self):
        with pytest.raises(NotErgodicError):
            build_random_walk(grid(3))
        nm = build_random_walk(grid(3), laziness=0.5)
        assert not nm.flags

    def test_nonstrict_keeps_flag(self):
        nm = build_random_walk(cycle(4), strict=False)
        assert nm.flags and "periodic" in nm.flags[0]

    def test_profile_proportional_to_degree(self):
        H = k_augmented_grid(4, 2)
        nm = build_random_walk(H)
        prof = positional_profile(nm)
        deg = np.array([H.degree(u) for u in range(H.point_count)])
        assert np.allclose(prof.weights, deg / deg.sum())

    def test_complete_graph_meeting_probability(self):
        # positions uniform over m points, nodes meet iff co-located
        nm = build_random_walk(complete(5))
        assert nm.p_nm == pytest.approx(1 / 5)
        assert nm.p_nm2 == pytest.approx(1 / 25)

    def test_walk_bound(self):
        H = star(4)
        v = graph_walk_bound(3, H, 50)
        assert v == pytest.approx(graph_walk_bound_value(3, 5, 4.0, 50))
        assert v == pytest.approx(3 * (16 * 5 / 50 + 4**7) ** 2 * math.log(50) ** 3)


class TestRegion:
    def test_uniform_square(self):
        prof = PositionalProfile(np.full(64, 1 / 64))
        chk = region_check(prof, 1.0, GridRegion(8))
        assert chk.passed
        assert chk.delta == pytest.approx(1.0)
        assert chk.lam == pytest.approx((6 / 8) ** 2)

    def test_torus(self):
        chk = region_check(PositionalProfile(np.full(64, 1 / 64)), 1.0, GridRegion(8, wrap=True))
        assert chk.lam == pytest.approx(1.0)

    def test_interior_brute_force(self):
        rng = np.random.default_rng(0)
        w = rng.random(49) ** 3
        w /= w.sum()
        chk = region_check(PositionalProfile(w), 1.5, GridRegion(7))
        B = w * 49 >= 1 / chk.delta - 1e-12
        pts = [(i // 7, i % 7) for i in range(49)]
        inside = 0
        for i, (x, y) in enumerate(pts):
            if not B[i]:
                continue
            disc = [(x + dx, y + dy) for dx in range(-2, 3) for dy in range(-2, 3)
                    if dx * dx + dy * dy <= 2.25]
            if all(0 <= a < 7 and 0 <= b < 7 and B[a * 7 + b] for a, b in disc):
                inside += 1
        assert chk.br_size == inside
        assert chk.lam == pytest.approx(inside / 49)
        assert chk.delta >= w.max() * 49 - 1e-12

    def test_empty_interior(self):
        chk = region_check(PositionalProfile(np.full(4, 0.25)), 5.0, GridRegion(2))
        assert not chk.passed
        with pytest.raises(PreconditionError):
            region_bound(1, chk, 10)

    def test_size_mismatch(self):
        with pytest.raises(MobilityError):
            region_check(PositionalProfile(np.full(4, 0.25)), 1.0, GridRegion(3))

    def test_bound_formulas(self):
        v = region_bound_value(2, 1.5, 0.5, 100.0, 2.0, 2, 40)
        x = 1.5**2 * 100 / (0.5 * 40 * 4) + 1.5**6 / 0.25
        assert v == pytest.approx(2 * x**2 * math.log(40) ** 3)
        assert path_model_bound_value(1, 9, 2.0, 30) == pytest.approx((9 / 30 + 8) ** 2 * math.log(30) ** 3)


class TestWaypoint:
    small = WaypointConfig(n=4, L=2.0, r=1.0, v_min=1.0, v_max=2.0, m=3)

    def test_config_validation(self):
        with pytest.raises(MobilityError):
            WaypointConfig(4, 1.0, 2.0, 1.0, 1.0)
        with pytest.raises(MobilityError):
            WaypointConfig(4, 1.0, 0.5, 1.0, 0.5)
        cfg = WaypointConfig(4, 10.0, 2.0, 2.0, 2.0)
        assert cfg.resolution == 11 and cfg.spacing == pytest.approx(1.0)

    def test_speed_grid(self):
        assert self.small.speeds.tolist() == [1.0, 2.0]

    def test_stationary_is_uniform(self):
        chain = WaypointChain(self.small)
        pi = stationary_distribution(chain.to_kernel())
        assert np.allclose(pi, 1 / chain.state_count, atol=1e-12)

    def test_step_matches_kernel(self):
        chain = WaypointChain(self.small)
        P = chain.to_kernel().dense()
        rng = np.random.default_rng(4)
        N = 20_000
        for s in (0, chain.state_count - 1, chain.state_count // 2):
            nxt = chain.step(np.full(N, s), rng)
            freq = np.bincount(nxt, minlength=chain.state_count) / N
            assert np.all(np.abs(freq - P[s]) <= 4 * np.sqrt(P[s] * (1 - P[s]) / N) + 1e-12)

    def test_evolve_matches_kernel(self):
        chain = WaypointChain(self.small)
        P = chain.to_kernel().dense()
        d = np.random.default_rng(1).dirichlet(np.ones(chain.state_count))
        assert np.allclose(chain.evolve(d), d @ P)

    @pytest.mark.parametrize("cfg", [
        WaypointConfig(4, 2.0, 1.0, 1.0, 2.0, m=3),
        WaypointConfig(4, 3.0, 1.0, 1.0, 1.0, m=4),
        WaypointConfig(4, 1.0, 1.0, 1.0, 1.0, m=2),
    ])
    def test_exact_mixing_matches_kernel(self, cfg):
        chain = WaypointChain(cfg)
        assert chain.exact_mixing().steps == mixing_time(chain.to_kernel())

    def test_sampled_is_lower_bound(self):
        chain = WaypointChain(WaypointConfig(4, 3.0, 1.0, 1.0, 1.0, m=4))
        est = chain.sampled_mixing(walkers=5000)
        assert est.steps <= chain.exact_mixing().steps

    def test_positions_stay_on_segment(self):
        chain = WaypointChain(WaypointConfig(4, 4.0, 1.0, 1.0, 1.0, m=5))
        fan = chain.points * chain.speeds.size
        trip = chain.trip_of_state
        a = trip // fan
        b = chain.trip_dest[trip]
        pa, pb, pc = chain.coords[a], chain.coords[b], chain.coords[chain.point_of_state]
        # rounding moves a point at most half a cell per axis off the segment
        seg = pb - pa
        t = np.clip(((pc - pa) * seg).sum(1) / np.maximum((seg**2).sum(1), 1e-12), 0, 1)
        off = np.linalg.norm(pa + t[:, None] * seg - pc, axis=1)
        assert off.max() <= math.sqrt(0.5) + 1e-9
        last = chain.step_in_trip == chain.trip_len[trip]
        assert np.array_equal(chain.point_of_state[last], b[last])

    def test_model_and_region(self):
        cfg = WaypointConfig(n=10, L=4.0, r=1.0, v_min=1.0, v_max=1.0, m=5)
        an = analyse_waypoint(cfg)
        assert an.profile.weights.sum() == pytest.approx(1.0)
        assert an.region.passed and an.region.delta >= 1.0
        nm = build_random_waypoint(cfg)
        assert 0 < nm.p_nm <= 1
        # centre is visited more than corners
        w = an.profile.weights.reshape(5, 5)
        assert w[2, 2] > w[0, 0]

    def test_speed_ratio_warning(self):
        with pytest.warns(RuntimeWarning):
            WaypointChain(WaypointConfig(2, 10.0, 1.0, 1.0, 5.0, m=3))
