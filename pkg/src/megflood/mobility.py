"""Mobility models as node-MEGs: random paths and walks on graphs, random waypoint.

Also: path-family regularity checks, positional profiles, and the region
parameters and bound formulas for geometric and graph-based mobility.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import networkx as nx
import numpy as np
from scipy import sparse

from .markov import (EXACT_LIMIT, MixingEstimate, MixingNotDetected, NotErgodicError,
                     TransitionKernel, chain_period, closed_classes, estimate_mixing_time)
from .nodemeg import NodeMeg, PointConnection

# --- graphs ------------------------------------------------------------------------


class MobilityError(ValueError):
    pass


class PreconditionError(MobilityError):
    """A bound was requested whose hypotheses were not verified."""


class MobilityGraph:
    """Connected simple undirected graph on points 0..V-1, optionally with coordinates."""

    def __init__(self, graph: nx.Graph, coords=None, name: str = ""):
        if graph.is_directed() or graph.is_multigraph():
            raise MobilityError("mobility graph must be simple and undirected")
        if nx.number_of_selfloops(graph):
            raise MobilityError("mobility graph has self-loops")
        if graph.number_of_nodes() == 0 or not nx.is_connected(graph):
            raise MobilityError("mobility graph must be nonempty and connected")
        if sorted(graph.nodes) != list(range(graph.number_of_nodes())):
            raise MobilityError("points must be labelled 0..V-1")
        self.graph = graph
        self.coords = None if coords is None else np.asarray(coords, dtype=float)
        self.name = name

    @property
    def point_count(self) -> int:
        return self.graph.number_of_nodes()

    def degree(self, u: int) -> int:
        return self.graph.degree[u]

    def edge_paths(self) -> "PathFamily":
        """Every edge in both directions: the family of the simple random walk."""
        paths = [(u, v) for u, v in self.graph.edges] + [(v, u) for u, v in self.graph.edges]
        return PathFamily(sorted(paths))

    @classmethod
    def from_json(cls, doc) -> "MobilityGraph":
        if isinstance(doc, (str, Path)):
            doc = json.loads(Path(doc).read_text())
        g = nx.Graph()
        g.add_nodes_from(range(int(doc["points"])))
        g.add_edges_from(tuple(e) for e in doc["edges"])
        return cls(g, doc.get("coords"), doc.get("name", ""))

    def to_json(self) -> dict:
        out = {"points": self.point_count, "edges": [list(e) for e in self.graph.edges]}
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        return out


def grid(m: int) -> MobilityGraph:
    """m x m lattice; point index = row * m + col."""
    if m < 2:
        raise MobilityError("grid needs m >= 2")
    g = nx.convert_node_labels_to_integers(nx.grid_2d_graph(m, m), ordering="sorted")
    coords = [(r, c) for r in range(m) for c in range(m)]
    return MobilityGraph(g, coords, f"grid({m})")


def k_augmented_grid(m: int, k: int) -> MobilityGraph:
    """m x m lattice plus an edge between any two points within k lattice hops."""
    if k < 1:
        raise MobilityError("k must be >= 1")
    base = grid(m)
    coords = base.coords.astype(int)
    g = nx.Graph()
    g.add_nodes_from(range(m * m))
    diff = np.abs(coords[:, None, :] - coords[None, :, :]).sum(axis=-1)
    iu, ju = np.nonzero(np.triu((diff >= 1) & (diff <= k), 1))
    g.add_edges_from(zip(iu.tolist(), ju.tolist()))
    return MobilityGraph(g, base.coords, f"k_augmented_grid({m}, {k})")


def cycle(m: int) -> MobilityGraph:
    if m < 3:
        raise MobilityError("cycle needs m >= 3")
    return MobilityGraph(nx.cycle_graph(m), name=f"cycle({m})")


def star(k: int) -> MobilityGraph:
    """Center 0 with leaves 1..k."""
    if k < 1:
        raise MobilityError("star needs k >= 1")
    return MobilityGraph(nx.star_graph(k), name=f"star({k})")


def complete(m: int) -> MobilityGraph:
    if m < 2:
        raise MobilityError("complete graph needs m >= 2")
    return MobilityGraph(nx.complete_graph(m), name=f"complete({m})")


GRAPH_GENERATORS = {
    "grid": grid,
    "k_augmented_grid": k_augmented_grid,
    "cycle": cycle,
    "star": star,
    "complete": complete,
}


def graph_delta(H: MobilityGraph) -> float:
    """max degree / min degree."""
    degs = [d for _, d in H.graph.degree]
    return max(degs) / min(degs)


# --- path families ------------------------------------------------------------------


@dataclass(frozen=True)
class PathFamily:
    paths: tuple[tuple[int, ...], ...]

    def __init__(self, paths: Sequence[Sequence[int]]):
        object.__setattr__(self, "paths", tuple(tuple(int(u) for u in h) for h in paths))
        if not self.paths:
            raise MobilityError("empty path family")
        for h in self.paths:
            if len(h) < 2:
                raise MobilityError(f"path {h} has fewer than two points")
        starts = self.starting_at
        for h in self.paths:
            if h[-1] not in starts:
                raise MobilityError(f"closure violated: no path starts where {h} ends")

    @cached_property
    def starting_at(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for k, h in enumerate(self.paths):
            out.setdefault(h[0], []).append(k)
        return out

    def pass_counts(self, point_count: int) -> np.ndarray:
        """#P(u): number of states at u, i.e. visits of u after the first point of a path."""
        counts = np.zeros(point_count, dtype=np.int64)
        for h in self.paths:
            for u in h[1:]:
                counts[u] += 1
        return counts

    def validate_on(self, H: MobilityGraph) -> None:
        for h in self.paths:
            for u, v in zip(h, h[1:]):
                if not H.graph.has_edge(u, v):
                    raise MobilityError(f"path {h} uses the non-edge ({u}, {v})")

    @classmethod
    def from_json(cls, doc) -> "PathFamily":
        if isinstance(doc, (str, Path)):
            doc = json.loads(Path(doc).read_text())
        return cls(doc["paths"])


@dataclass(frozen=True)
class PathChecks:
    simple: bool
    reversible: bool
    delta: float

    @property
    def failures(self) -> list[str]:
        out = []
        if not self.simple:
            out.append("family is not simple (a path revisits a point)")
        if not self.reversible:
            out.append("family is not reversible (a path's reverse is missing)")
        return out


def path_family_checks(H: MobilityGraph, P: PathFamily) -> PathChecks:
    P.validate_on(H)
    simple = all(len(set(h)) == len(h) for h in P.paths)
    members = set(P.paths)
    reversible = all(h[::-1] in members for h in P.paths)
    counts = P.pass_counts(H.point_count)
    mean = counts.sum() / H.point_count
    return PathChecks(simple, reversible, float(counts.max() / mean))


# --- random path / random walk models -------------------------------------------


def path_chain(P: PathFamily) -> tuple[TransitionKernel, np.ndarray]:
    """Kernel over states (path, index >= 1) plus the point occupied by each state."""
    offsets = np.cumsum([0] + [len(h) - 1 for h in P.paths])
    S = int(offsets[-1])
    point = np.empty(S, dtype=np.int64)
    rows, cols, vals = [], [], []
    starts = P.starting_at
    for k, h in enumerate(P.paths):
        base = offsets[k]
        for i in range(1, len(h)):
            s = base + i - 1
            point[s] = h[i]
            if i < len(h) - 1:
                rows.append(s)
                cols.append(s + 1)
                vals.append(1.0)
            else:
                nxt = starts[h[-1]]
                for k2 in nxt:
                    rows.append(s)
                    cols.append(offsets[k2])
                    vals.append(1.0 / len(nxt))
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(S, S))
    return TransitionKernel(mat, label="random_path"), point


def _ergodicity_flags(kernel: TransitionKernel) -> tuple[str, ...]:
    classes = closed_classes(kernel)
    if len(classes) != 1:
        return (f"reducible: {len(classes)} closed classes",)
    period = chain_period(kernel)
    if period != 1:
        return (f"periodic: period {period}",)
    return ()


def build_random_path(H: MobilityGraph, P: PathFamily, n: int = 2, *, strict: bool = False,
                      label: str = "") -> NodeMeg:
    """Random path model: walk the current path, then pick a uniform path from its end.

    Nodes connect iff they occupy the same point. Periodic or reducible chains
    raise with ``strict``; otherwise they are returned with a flag.
    """
    P.validate_on(H)
    kernel, point = path_chain(P)
    flags = _ergodicity_flags(kernel)
    if flags and strict:
        raise NotErgodicError(f"random path chain is not ergodic ({flags[0]})")
    conn = PointConnection.same_point(point, H.point_count)
    return NodeMeg(n, kernel, conn, label=label or f"random_path[{H.name}]", flags=flags)


def build_random_walk(H: MobilityGraph, n: int = 2, *, laziness: float = 0.0,
                      strict: bool = True) -> NodeMeg:
    """Random walk on H as the edge-path model; ``laziness`` adds a stay-put probability."""
    if not 0 <= laziness < 1:
        raise MobilityError("laziness must lie in [0, 1)")
    P = H.edge_paths()
    kernel, point = path_chain(P)
    if laziness:
        kernel = kernel.lazy(laziness)
    flags = _ergodicity_flags(kernel)
    if flags and strict:
        raise NotErgodicError(
            f"random walk on {H.name or 'H'} is not ergodic ({flags[0]}); pass laziness > 0")
    conn = PointConnection.same_point(point, H.point_count)
    name = f"random_walk[{H.name}]" + (f"(lazy {laziness})" if laziness else "")
    return NodeMeg(n, kernel, conn, label=name, flags=flags)


# --- positional profiles and region parameters ------------------------------------


@dataclass(frozen=True)
class PositionalProfile:
    weights: np.ndarray
    coords: np.ndarray | None = None

    @property
    def point_count(self) -> int:
        return self.weights.size


def positional_profile(nm: NodeMeg, position_of=None, point_count: int | None = None,
                       coords=None) -> PositionalProfile:
    """Marginal of the stationary law on points.

    ``position_of`` maps state indices to points; it defaults to the point
    map of a point-based connection.
    """
    conn = nm.connection
    if position_of is None:
        if not isinstance(conn, PointConnection):
            raise MobilityError("position_of is required for non point-based connections")
        pos = conn.point_of_state
        point_count = conn.point_count if point_count is None else point_count
    else:
        pos = np.asarray([position_of(x) for x in range(nm.state_count)]
                         if callable(position_of) else position_of, dtype=np.int64)
        point_count = int(pos.max()) + 1 if point_count is None else point_count
    w = np.bincount(pos, weights=nm.pi, minlength=point_count)
    w = w / w.sum()
    if coords is None:
        coords = getattr(nm.chain, "coords", None)
    return PositionalProfile(w, None if coords is None else np.asarray(coords, dtype=float))


@dataclass(frozen=True)
class GridRegion:
    """Square region sampled by an m x m lattice with the given spacing."""

    m: int
    spacing: float = 1.0
    wrap: bool = False
    dim: int = 2

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return self.m**self.dim * self.cell_volume

    def coords(self) -> np.ndarray:
        idx = np.indices((self.m,) * self.dim).reshape(self.dim, -1).T
        return idx * self.spacing


@dataclass(frozen=True)
class RegionCheck:
    delta: float
    lam: float
    volume: float
    radius: float
    dim: int
    upper_delta: float
    b_size: int
    br_size: int
    passed: bool
    note: str = ""


def _disc_offsets(r_cells: float, dim: int) -> np.ndarray:
    k = int(math.floor(r_cells + 1e-9))
    rng_ = np.arange(-k, k + 1)
    grid_ = np.stack(np.meshgrid(*([rng_] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return grid_[(grid_**2).sum(axis=1) <= r_cells**2 + 1e-9]


def _interior(member: np.ndarray, region: GridRegion, r: float) -> np.ndarray:
    """Points of ``member`` whose closed r-disc lies inside ``member`` (and the region)."""
    m, d = region.m, region.dim
    shaped = member.reshape((m,) * d)
    ok = shaped.copy()
    for off in _disc_offsets(r / region.spacing, d):
        if region.wrap:
            ok &= np.roll(shaped, shift=tuple(-off), axis=tuple(range(d)))
        elif np.abs(off).max() >= m:
            # the disc is wider than the region: no point qualifies
            ok[...] = False
            break
        else:
            shifted = np.zeros_like(shaped)
            src = tuple(slice(max(o, 0), m + min(o, 0)) for o in off)
            dst = tuple(slice(max(-o, 0), m - max(o, 0)) for o in off)
            shifted[dst] = shaped[src]
            ok &= shifted
    return ok.reshape(-1)


def region_check(profile: PositionalProfile, r: float, region: GridRegion,
                     candidates: int = 200, cap: float = 1e3) -> RegionCheck:
    """Region parameters (delta, lambda) for a lattice-sampled positional profile.

    (a) every point has mass at most delta / (number of points);
    (b) B = points with mass at least 1 / (delta * number of points), B_r =
        points of B whose r-disc stays in B, and lambda = |B_r| / |R|.
    Candidates for delta are log-spaced from the least value meeting (a) up to
    ``cap`` times it; the one minimizing delta^6 / lambda^2 is kept.
    """
    P = region.m**region.dim
    if profile.point_count != P:
        raise MobilityError(f"profile has {profile.point_count} points, region {P}")
    scaled = profile.weights * P
    upper = float(max(1.0, scaled.max()))
    best = None
    for delta in np.geomspace(upper, upper * cap, candidates):
        B = scaled >= 1 / delta - 1e-12
        Br = _interior(B, region, r)
        lam = Br.sum() / P
        if lam <= 0:
            continue
        score = delta**6 / lam**2
        if best is None or score < best[0] - 1e-12:
            best = (score, float(delta), float(lam), int(B.sum()), int(Br.sum()))
    if best is None:
        return RegionCheck(math.inf, 0.0, region.volume, r, region.dim, upper, 0, 0, False,
                           "conditions not met: B_r is empty for every candidate delta")
    _, delta, lam, b, br = best
    return RegionCheck(delta, lam, region.volume, r, region.dim, upper, b, br, True)


# --- bound formulas -------------------------------------------------------------------


def region_bound_value(t_mix: float, delta: float, lam: float, volume: float, radius: float,
                     dim: int, n: int, c: float = 1.0) -> float:
    """c T (delta^2 vol / (lambda n r^d) + delta^6 / lambda^2)^2 ln^3 n."""
    x = delta**2 * volume / (lam * n * radius**dim) + delta**6 / lam**2
    return c * t_mix * x**2 * math.log(n) ** 3


def path_model_bound_value(t_mix: float, points: int, delta: float, n: int, c: float = 1.0) -> float:
    """c T (|V|/n + delta^3)^2 ln^3 n."""
    return c * t_mix * (points / n + delta**3) ** 2 * math.log(n) ** 3


def graph_walk_bound_value(t_mix: float, points: int, delta: float, n: int, c: float = 1.0) -> float:
    """c T (delta^2 |V|/n + delta^7)^2 ln^3 n."""
    return c * t_mix * (delta**2 * points / n + delta**7) ** 2 * math.log(n) ** 3


def region_bound(t_mix: float, check: RegionCheck, n: int, c: float = 1.0) -> float:
    if not check.passed:
        raise PreconditionError(f"region conditions failed: {check.note}")
    if check.radius <= 0:
        raise PreconditionError("radius must be positive")
    return region_bound_value(t_mix, check.delta, check.lam, check.volume, check.radius, check.dim, n, c)


def path_model_bound(t_mix: float, checks: PathChecks, points: int, n: int, c: float = 1.0) -> float:
    """Only for simple reversible families; refuses otherwise."""
    if checks.failures:
        raise PreconditionError("path family checks failed: " + "; ".join(checks.failures))
    return path_model_bound_value(t_mix, points, checks.delta, n, c)


def graph_walk_bound(t_mix: float, H: MobilityGraph, n: int, c: float = 1.0) -> float:
    """Random walk on H, with delta = max/min degree."""
    return graph_walk_bound_value(t_mix, H.point_count, graph_delta(H), n, c)


# --- random waypoint ------------------------------------------------------------------


@dataclass(frozen=True)
class WaypointConfig:
    """Random waypoint on an L x L square sampled by an m x m lattice.

    ``m=None`` picks the coarsest lattice whose spacing is at most
    min(r, v_min) / 2.
    """

    n: int
    L: float
    r: float
    v_min: float
    v_max: float
    m: int | None = None

    def __post_init__(self):
        if self.L <= 0:
            raise MobilityError("L must be positive")
        if not 0 < self.v_min <= self.v_max:
            raise MobilityError("need 0 < v_min <= v_max")
        if self.r < 0:
            raise MobilityError("r must be >= 0")
        diag = self.L * math.sqrt(2)
        if self.r > diag * (1 + 1e-12) or self.v_max > diag * (1 + 1e-12):
            raise MobilityError("r and v_max must not exceed the diagonal L*sqrt(2)")
        if self.resolution < 2:
            raise MobilityError("m must be >= 2")

    @property
    def resolution(self) -> int:
        if self.m is not None:
            return self.m
        scale = min(self.r, self.v_min) / 2 if self.r > 0 else self.v_min / 2
        return max(2, math.ceil(self.L / scale - 1e-9) + 1)

    @property
    def spacing(self) -> float:
        return self.L / (self.resolution - 1)

    @property
    def speeds(self) -> np.ndarray:
        h = self.spacing
        k = math.floor((self.v_max - self.v_min) / h + 1e-9)
        return self.v_min + h * np.arange(k + 1)


class WaypointChain:
    """Procedural chain over (origin, destination, speed, step) tuples.

    The state after k steps of the trip from a to b at speed v sits at the
    lattice point nearest to a + (b - a) * min(1, k v / |b - a|); the trip
    takes K = max(1, ceil(|b - a| / v)) steps. After the last step a new
    destination and speed are drawn uniformly. Every valid state has the same
    stationary probability, since trip pairs (a, b) are uniform at
    stationarity and each trip contributes K equally likely phases.
    """

    def __init__(self, cfg: WaypointConfig):
        self.cfg = cfg
        m = cfg.resolution
        self.m = m
        h = cfg.spacing
        lattice = np.indices((m, m)).reshape(2, -1).T  # point index = row * m + col
        self.coords = lattice * h
        P = m * m
        self.points = P
        speeds = cfg.speeds
        self.speeds = speeds
        ns = speeds.size
        a = np.repeat(np.arange(P), P * ns)
        b = np.tile(np.repeat(np.arange(P), ns), P)
        s = np.tile(np.arange(ns), P * P)
        dist = np.linalg.norm(self.coords[a] - self.coords[b], axis=1)
        K = np.maximum(1, np.ceil(dist / speeds[s] - 1e-9)).astype(np.int64)
        self.trip_len = K
        self.trip_dest = b
        self.offset = np.concatenate([[0], np.cumsum(K)])
        self.state_count = int(self.offset[-1])
        # positions of every state, computed trip by trip in one vectorized pass
        trip = np.repeat(np.arange(K.size), K)
        k = np.arange(self.state_count) - self.offset[trip] + 1
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(dist[trip] > 0, np.minimum(1.0, k * speeds[s[trip]] / dist[trip]), 1.0)
        ideal = lattice[a[trip]] + (lattice[b[trip]] - lattice[a[trip]]) * frac[:, None]
        cell = np.clip(np.rint(ideal).astype(np.int64), 0, m - 1)
        self.point_of_state = cell[:, 0] * m + cell[:, 1]
        self.trip_of_state = trip
        self.step_in_trip = k
        if cfg.v_max / cfg.v_min > 4:
            warnings.warn("v_max / v_min > 4: speeds are far from a constant ratio",
                          RuntimeWarning, stacklevel=2)

    def stationary(self) -> np.ndarray:
        pi = np.full(self.state_count, 1.0 / self.state_count)
        pi.setflags(write=False)
        return pi

    def step(self, states, rng) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        trip = self.trip_of_state[states]
        done = self.step_in_trip[states] == self.trip_len[trip]
        out = states + 1
        k = int(done.sum())
        if k:
            b = self.trip_dest[trip[done]]
            nb = rng.integers(self.points, size=k)
            ns = rng.integers(self.speeds.size, size=k)
            new_trip = (b * self.points + nb) * self.speeds.size + ns
            out[done] = self.offset[new_trip]
        return out

    def to_kernel(self) -> TransitionKernel:
        """Explicit kernel; only for small lattices."""
        S = self.state_count
        if S > 50 * EXACT_LIMIT:
            raise MobilityError(f"{S} states is too many for an explicit kernel")
        trip = self.trip_of_state
        done = self.step_in_trip == self.trip_len[trip]
        rows = [np.flatnonzero(~done)]
        cols = [rows[0] + 1]
        vals = [np.ones(rows[0].size)]
        ns = self.speeds.size
        fan = self.points * ns
        for s in np.flatnonzero(done):
            b = self.trip_dest[trip[s]]
            first = b * fan + np.arange(fan)
            rows.append(np.full(fan, s))
            cols.append(self.offset[first])
            vals.append(np.full(fan, 1.0 / fan))
        mat = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                shape=(S, S))
        return TransitionKernel(mat, label="waypoint")

    def profile(self) -> np.ndarray:
        return np.bincount(self.point_of_state, minlength=self.points) / self.state_count

    @cached_property
    def _flow(self):
        trip = self.trip_of_state
        done = np.flatnonzero(self.step_in_trip == self.trip_len[trip])
        moving = np.setdiff1d(np.arange(self.state_count), done, assume_unique=True)
        fan = self.points * self.speeds.size
        origin = np.arange(self.trip_len.size) // fan
        return moving, done, self.trip_dest[trip[done]], origin, self.offset[:-1], fan

    def evolve(self, dist: np.ndarray) -> np.ndarray:
        """One exact step of the state distribution (row vector times kernel)."""
        moving, done, dest, origin, first, fan = self._flow
        out = np.zeros_like(dist)
        out[moving + 1] = dist[moving]
        arrived = np.bincount(dest, weights=dist[done], minlength=self.points) / fan
        out[first] += arrived[origin]
        return out

    def _arrival_state(self, b: int) -> int:
        fan = self.points * self.speeds.size
        return int(self.offset[b * fan + b * self.speeds.size])  # zero-length trip b -> b

    def _representatives(self) -> np.ndarray:
        m = self.m
        reps = [r * m + c for r in range((m + 1) // 2) for c in range(r, m - r)]
        return np.array(reps, dtype=np.int64)

    def exact_mixing(self, eps: float = 0.25, *, symmetric: bool | None = None,
                     max_steps: int = 10_000) -> MixingEstimate:
        """Mixing time by exact distribution evolution.

        A start state with r steps left before arriving at b behaves, after
        those r steps, exactly like the arrival state at b. Since distance to
        stationarity is nonincreasing in time, the worst start is the first
        step of the longest trip into some b, and
        T_mix = max_b (longest remaining trip into b + mixing time from b).
        With ``symmetric`` only one point per orbit of the square's symmetry
        group is evaluated (lattice rounding ties make this approximate).
        """
        if symmetric is None:
            symmetric = self.state_count * self.points > 2 * 10**8
        pts = self._representatives() if symmetric else np.arange(self.points)
        remaining = np.zeros(self.points, dtype=np.int64)
        np.maximum.at(remaining, self.trip_dest, self.trip_len - 1)
        uniform = 1.0 / self.state_count
        worst, worst_tv = 0, 0.0
        for b in pts:
            dist = np.zeros(self.state_count)
            dist[self._arrival_state(int(b))] = 1.0
            for s in range(1, max_steps + 1):
                dist = self.evolve(dist)
                tv = 0.5 * float(np.abs(dist - uniform).sum())
                if tv <= eps:
                    break
            else:
                raise MixingNotDetected(f"no mixing from point {b} within {max_steps} steps", tv)
            if remaining[b] + s > worst:
                worst, worst_tv = int(remaining[b] + s), tv
        scope = "symmetry representatives" if symmetric else "all points"
        return MixingEstimate(worst, not symmetric, f"exact evolution from arrival states ({scope})",
                              worst_tv, eps)

    def mixing_report(self, eps: float = 0.25) -> MixingEstimate:
        return self.exact_mixing(eps)

    def sampled_mixing(self, eps: float = 0.25, walkers: int = 20_000, seed: int = 0) -> MixingEstimate:
        """Empirical, projected onto positions (a lower bound); see ``estimate_mixing_time``."""
        rng = np.random.default_rng(seed)
        # start from the corners and the centre, arriving there at the slowest speed
        m = self.m
        corners = [0, m - 1, m * (m - 1), m * m - 1, (m // 2) * m + m // 2]
        fan = self.points * self.speeds.size
        starts = [int(self.offset[c * fan + c * self.speeds.size]) for c in corners]
        return estimate_mixing_time(
            self, eps, rng=rng, starts=starts, project=lambda s: self.point_of_state[s],
            target=self.profile(), walkers=walkers, max_steps=100_000)


def build_random_waypoint(cfg: WaypointConfig, *, mixing=None) -> NodeMeg:
    """Node-MEG of the discretized random waypoint; nodes within distance r connect."""
    chain = WaypointChain(cfg)
    conn = PointConnection.within_radius(chain.point_of_state, chain.coords, cfg.r)
    meta = (f"lattice {chain.m}x{chain.m}, spacing {cfg.spacing:.4g}, r/spacing {cfg.r / cfg.spacing:.3g}",)
    return NodeMeg(cfg.n, chain, conn, mixing=mixing, label=f"waypoint(L={cfg.L:g}, r={cfg.r:g})",
                   flags=meta)


def waypoint_region(cfg: WaypointConfig) -> GridRegion:
    return GridRegion(cfg.resolution, cfg.spacing)


@dataclass
class WaypointAnalysis:
    model: NodeMeg
    profile: PositionalProfile
    region: RegionCheck
    notes: list[str] = field(default_factory=list)


def analyse_waypoint(cfg: WaypointConfig) -> WaypointAnalysis:
    nm = build_random_waypoint(cfg)
    prof = PositionalProfile(nm.chain.profile(), nm.chain.coords)
    check = region_check(prof, cfg.r, waypoint_region(cfg))
    return WaypointAnalysis(nm, prof, check)
