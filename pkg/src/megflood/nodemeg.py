"""Node-Markovian evolving graphs.

Every node runs an independent copy of one chain; two nodes are adjacent at
time t exactly when their current states are related by a symmetric
connection map C.
"""

from __future__ import annotations

import itertools
import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dyngraph import MegProcess, Snapshot
from .markov import (EXACT_LIMIT, MixingEstimate, TransitionKernel, as_distribution,
                     mixing_report, stationary_distribution)
from .seeding import as_rng

PAIR_DEPENDENCE_FACTOR = 17


class NodeMegError(ValueError):
    pass


# --- connection maps ----------------------------------------------------------


class Connection(ABC):
    """Symmetric 0/1 relation over chain states."""

    state_count: int

    @abstractmethod
    def pairs(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Elementwise C(x[k], y[k]) as a boolean array."""

    @abstractmethod
    def q(self, pi: np.ndarray) -> np.ndarray:
        """q(x) = pi(Gamma(x)) for every state x."""

    def adjacency(self, states: np.ndarray) -> np.ndarray:
        s = np.asarray(states)
        adj = self.pairs(s[:, None], s[None, :])
        np.fill_diagonal(adj, False)
        return adj

    def matrix(self) -> np.ndarray:
        """Dense S x S relation; only sensible for small chains."""
        if self.state_count > EXACT_LIMIT:
            raise NodeMegError(f"refusing to materialize a {self.state_count}^2 relation")
        s = np.arange(self.state_count)
        return self.pairs(s[:, None], s[None, :])

    def gamma(self, x: int) -> np.ndarray:
        s = np.arange(self.state_count)
        return s[self.pairs(np.full(s.size, x), s)]

    def is_symmetric(self, samples: int = 10_000, rng=None) -> bool:
        if self.state_count <= 512:
            m = self.matrix()
            return bool(np.array_equal(m, m.T))
        rng = as_rng(rng)
        x = rng.integers(self.state_count, size=samples)
        y = rng.integers(self.state_count, size=samples)
        return bool(np.array_equal(self.pairs(x, y), self.pairs(y, x)))


class MatrixConnection(Connection):
    def __init__(self, matrix):
        m = np.asarray(matrix).astype(bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NodeMegError("connection matrix must be square")
        if not np.array_equal(m, m.T):
            raise NodeMegError("connection matrix must be symmetric")
        m.setflags(write=False)
        self._m = m
        self.state_count = m.shape[0]

    def pairs(self, x, y):
        return self._m[x, y]

    def q(self, pi):
        return self._m.astype(float) @ pi

    def matrix(self):
        return self._m


class ConstantConnection(Connection):
    """C identically 1 or identically 0."""

    def __init__(self, state_count: int, value: bool):
        self.state_count = state_count
        self.value = bool(value)

    def pairs(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.value)

    def q(self, pi):
        return np.full(self.state_count, float(self.value))


class PointConnection(Connection):
    """States live at points; C depends only on the two points.

    ``point_adj[u, w]`` says whether nodes at points u and w can talk. The
    identity gives the same-point rule, a distance threshold the disc rule.
    """

    def __init__(self, point_of_state, point_adj):
        pos = np.asarray(point_of_state, dtype=np.int64)
        adj = np.asarray(point_adj).astype(bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise NodeMegError("point relation must be square")
        if not np.array_equal(adj, adj.T):
            raise NodeMegError("point relation must be symmetric")
        if pos.size and (pos.min() < 0 or pos.max() >= adj.shape[0]):
            raise NodeMegError("state mapped to an unknown point")
        pos.setflags(write=False)
        adj.setflags(write=False)
        self.point_of_state = pos
        self.point_adj = adj
        self.state_count = pos.size
        self.point_count = adj.shape[0]

    @classmethod
    def same_point(cls, point_of_state, point_count: int) -> "PointConnection":
        return cls(point_of_state, np.eye(point_count, dtype=bool))

    @classmethod
    def within_radius(cls, point_of_state, coords, radius: float) -> "PointConnection":
        c = np.asarray(coords, dtype=float)
        d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(axis=-1)
        # tiny slack so that lattice distances equal to r count as in range
        return cls(point_of_state, d2 <= radius**2 * (1 + 1e-12))

    def pairs(self, x, y):
        return self.point_adj[self.point_of_state[x], self.point_of_state[y]]

    def profile(self, pi) -> np.ndarray:
        return np.bincount(self.point_of_state, weights=pi, minlength=self.point_count)

    def q(self, pi):
        q_pt = self.point_adj.astype(float) @ self.profile(pi)
        return q_pt[self.point_of_state]


# --- the model ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NodeMeg:
    """NM(n, chain, C) with cached analytics.

    ``chain`` is a TransitionKernel or any object with ``state_count`` and a
    vectorized ``step``; procedural chains must also offer ``stationary()``
    and either carry a ``mixing_report()`` or be given ``mixing`` explicitly.
    ``init`` is "stationary" or an explicit distribution shared by all nodes.
    """

    n: int
    chain: object
    connection: Connection
    init: object = "stationary"
    mixing: MixingEstimate | int | None = None
    label: str = ""
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n < 2:
            raise NodeMegError("need at least two nodes")
        if self.connection.state_count != self.chain.state_count:
            raise NodeMegError("connection map and chain disagree on the state count")
        if not (isinstance(self.init, str) and self.init == "stationary"):
            object.__setattr__(self, "init", as_distribution(self.init, self.chain.state_count))

    def with_n(self, n: int) -> "NodeMeg":
        """Same model on a different number of nodes (analytics are recomputed)."""
        return NodeMeg(n, self.chain, self.connection, self.init, self.mixing, self.label, self.flags)

    @property
    def state_count(self) -> int:
        return self.chain.state_count

    @property
    def stationary_start(self) -> bool:
        return isinstance(self.init, str)

    @cached_property
    def pi(self) -> np.ndarray:
        if hasattr(self.chain, "stationary"):
            return self.chain.stationary()
        return stationary_distribution(self.chain)

    @cached_property
    def _pi_cdf(self) -> np.ndarray:
        c = np.cumsum(self.pi)
        c[-1] = 1.0
        return c

    @cached_property
    def q(self) -> np.ndarray:
        out = np.clip(self.connection.q(self.pi), 0.0, 1.0)
        out.setflags(write=False)
        return out

    def state_connect_prob(self, x: int) -> float:
        return float(self.q[x])

    @cached_property
    def p_nm(self) -> float:
        return float(self.pi @ self.q)

    @cached_property
    def p_nm2(self) -> float:
        return float(self.pi @ self.q**2)

    @property
    def eta_raw(self) -> float:
        if self.p_nm == 0:
            raise NodeMegError("P_NM = 0: the model never connects two nodes")
        return self.p_nm2 / self.p_nm**2

    @property
    def eta(self) -> float:
        """Least admissible eta: P_NM2 / P_NM^2, never below 1."""
        return max(1.0, self.eta_raw)

    @cached_property
    def mixing_estimate(self) -> MixingEstimate:
        m = self.mixing
        if isinstance(m, MixingEstimate):
            return m
        if m is not None:
            return MixingEstimate(int(m), False, "supplied", math.nan, 0.25)
        if hasattr(self.chain, "mixing_report"):
            return self.chain.mixing_report()
        if isinstance(self.chain, TransitionKernel):
            return mixing_report(self.chain, rng=np.random.default_rng(0))
        raise NodeMegError("no mixing time available for this chain")

    @property
    def t_mix(self) -> int:
        return self.mixing_estimate.steps

    def sample_states(self, size: int, rng) -> np.ndarray:
        rng = as_rng(rng)
        if self.stationary_start:
            return np.searchsorted(self._pi_cdf, rng.random(size), side="right").astype(np.int64)
        c = np.cumsum(self.init)
        c[-1] = 1.0
        return np.searchsorted(c, rng.random(size), side="right").astype(np.int64)

    def as_meg(self) -> "NodeMegProcess":
        return NodeMegProcess(self)


class NodeMegProcess(MegProcess):
    """Snapshot stream E_t = {{i, j} : C(s_i^t, s_j^t) = 1}."""

    exchangeable = True

    def __init__(self, model: NodeMeg):
        self.model = model
        self.n = model.n
        self.states: np.ndarray | None = None

    def _snapshot(self) -> Snapshot:
        self._current = Snapshot(self.model.connection.adjacency(self.states), check=False)
        return self._current

    def reset(self, rng) -> Snapshot:
        self.states = self.model.sample_states(self.n, rng)
        return self._snapshot()

    def advance(self, rng) -> Snapshot:
        self.states = self.model.chain.step(self.states, rng)
        return self._snapshot()


def as_meg(nm: NodeMeg) -> NodeMegProcess:
    return NodeMegProcess(nm)


# --- epoch length and bound ---------------------------------------------------------


def epoch_length_value(t_mix: float, p_nm: float, n: int) -> int:
    """ceil(T_mix * ln(2n / P_NM^2))."""
    if p_nm <= 0:
        raise NodeMegError("P_NM must be positive")
    return max(1, math.ceil(t_mix * math.log(2 * n / p_nm**2)))


def epoch_length(nm: NodeMeg, n: int | None = None) -> int:
    return epoch_length_value(nm.t_mix, nm.p_nm, nm.n if n is None else n)


def node_meg_bound_value(t_mix: float, p_nm: float, eta: float, n: int, c: float = 1.0) -> float:
    """c * T_mix * (1/(n P_NM) + eta)^2 * ln(n)^3."""
    if p_nm <= 0:
        raise NodeMegError("P_NM must be positive")
    if p_nm < n ** -6.0:
        warnings.warn(f"P_NM = {p_nm:.3g} is below n^-6; the polynomial-density hypothesis is doubtful",
                      RuntimeWarning, stacklevel=2)
    eta = max(1.0, eta)
    return c * t_mix * (1 / (n * p_nm) + eta) ** 2 * math.log(n) ** 3


def node_meg_bound(nm: NodeMeg, n: int | None = None, c: float = 1.0) -> float:
    n = nm.n if n is None else n
    return node_meg_bound_value(nm.t_mix, nm.p_nm, nm.eta, n, c)


# --- pairwise dependence check --------------------------------------------------------


@dataclass(frozen=True)
class PairDependenceRow:
    size: int
    method: str
    joint: float
    product: float
    ratio: float | None
    limit: float
    radius: float
    passed: bool | None

    @property
    def indeterminate(self) -> bool:
        return self.ratio is None


@dataclass
class PairDependenceReport:
    eta: float
    rows: list[PairDependenceRow]

    @property
    def passed(self) -> bool:
        decided = [r for r in self.rows if r.passed is not None]
        return bool(decided) and all(r.passed for r in decided)


ENUMERATION_LIMIT = 64


def pair_dependence_enumerate(nm: NodeMeg, a: int) -> tuple[float, float]:
    """(P(e_iA e_jA), P(e_iA)) by summing over every state assignment of A.

    Given the states of A, i and j are independent, so the sum over their
    states is done in closed form; every tuple in S^a is visited.
    """
    S = nm.state_count
    if S > ENUMERATION_LIMIT:
        raise NodeMegError(f"enumeration needs at most {ENUMERATION_LIMIT} states")
    C = nm.connection.matrix()
    pi = np.asarray(nm.pi)
    joint = single = 0.0
    for tup in itertools.product(range(S), repeat=a):
        idx = list(tup)
        w = float(np.prod(pi[idx]))
        if w == 0:
            continue
        h = float(pi @ C[:, idx].any(axis=1))
        joint += w * h * h
        single += w * h
    return joint, single


def pair_dependence_closed_form(nm: NodeMeg, a: int) -> tuple[float, float]:
    """Same quantities via inclusion-exclusion over the union Gamma(x) + Gamma(y)."""
    C = nm.connection.matrix().astype(float)
    pi = np.asarray(nm.pi)
    q = C @ pi
    both = C @ (pi[:, None] * C)  # pi(Gamma(x) & Gamma(y))
    miss = (1 - q) ** a
    union_miss = np.clip(1 - q[:, None] - q[None, :] + both, 0.0, 1.0) ** a
    cond = 1 - miss[:, None] - miss[None, :] + union_miss
    joint = float(pi @ cond @ pi)
    single = float(pi @ (1 - miss))
    return joint, single


def pair_dependence_monte_carlo(nm: NodeMeg, a: int, trials: int, rng) -> tuple[float, float, float, float]:
    """Returns (joint, P_i * P_j, ratio, 3-sigma radius) from ``trials`` draws."""
    rng = as_rng(rng)
    xs = nm.sample_states(trials * (2 + a), rng).reshape(trials, 2 + a)
    conn = nm.connection
    ei = conn.pairs(xs[:, [0]], xs[:, 2:]).any(axis=1).astype(float)
    ej = conn.pairs(xs[:, [1]], xs[:, 2:]).any(axis=1).astype(float)
    u = ei * ej
    pu, pi_, pj = u.mean(), ei.mean(), ej.mean()
    if pi_ == 0 or pj == 0:
        return float(pu), 0.0, math.nan, math.nan
    ratio = pu / (pi_ * pj)
    cov = np.cov(np.vstack([u, ei, ej])) / trials
    g = np.array([1 / (pi_ * pj), -ratio / pi_, -ratio / pj])
    radius = 3 * math.sqrt(max(0.0, float(g @ cov @ g)))
    return float(pu), float(pi_ * pj), float(ratio), radius


def verify_pair_dependence(nm: NodeMeg, set_sizes=(1, 2, 3), trials: int = 20_000, rng=None) -> PairDependenceReport:
    """Check P(e_iA e_jA) <= 17 eta P(e_iA) P(e_jA) at stationarity.

    Small chains (at most 64 states, |A| <= 3) are checked exactly, both by
    enumeration and by inclusion-exclusion, as a literal inequality. Every
    size is also estimated by Monte Carlo when ``trials > 0``, passing when
    the ratio is within the limit plus its 3-sigma radius.
    """
    rng = as_rng(rng)
    eta = nm.eta
    limit = PAIR_DEPENDENCE_FACTOR * eta
    rows = []
    for a in set_sizes:
        if a < 1 or a > nm.n - 2:
            raise NodeMegError(f"set size {a} outside [1, n - 2]")
        exact = []
        if nm.state_count <= ENUMERATION_LIMIT and a <= 3:
            exact.append(("enumeration", pair_dependence_enumerate(nm, a)))
        if nm.state_count <= EXACT_LIMIT:
            exact.append(("inclusion-exclusion", pair_dependence_closed_form(nm, a)))
        for method, (joint, single) in exact:
            prod = single * single
            if prod == 0:
                rows.append(PairDependenceRow(a, method, joint, prod, None, limit, 0.0, None))
            else:
                rows.append(PairDependenceRow(a, method, joint, prod, joint / prod, limit, 0.0,
                                       joint <= limit * prod))
        if trials > 0:
            joint, prod, ratio, radius = pair_dependence_monte_carlo(nm, a, trials, rng)
            if math.isnan(ratio):
                rows.append(PairDependenceRow(a, "monte-carlo", joint, prod, None, limit, math.nan, None))
            else:
                rows.append(PairDependenceRow(a, "monte-carlo", joint, prod, ratio, limit, radius,
                                       ratio <= limit + radius))
    return PairDependenceReport(eta, rows)


# --- brute-force analytics (oracles) ----------------------------------------------


def brute_force_p_nm(nm: NodeMeg) -> tuple[float, float]:
    """(P_NM, P_NM2) by summing over all state pairs and triples."""
    C = nm.connection.matrix()
    pi = np.asarray(nm.pi)
    S = pi.size
    p = sum(pi[x] * pi[y] for x in range(S) for y in range(S) if C[x, y])
    p2 = sum(pi[x] * pi[y] * pi[z] for x in range(S) for y in range(S) for z in range(S)
             if C[x, z] and C[y, z])
    return float(p), float(p2)


def point_meeting_model(n: int = 8, weights=(0.9, 0.1)) -> NodeMeg:
    """Two locations, i.i.d. position each step, nodes meet only at location 0."""
    from .markov import rank_one_kernel

    k = rank_one_kernel(weights)
    C = np.zeros((k.state_count, k.state_count), dtype=bool)
    C[0, 0] = True
    return NodeMeg(n, k, MatrixConnection(C), label="point-meeting")


def constant_model(n: int, kernel: TransitionKernel, value: bool) -> NodeMeg:
    return NodeMeg(n, kernel, ConstantConnection(kernel.state_count, value),
                   label=f"constant({int(value)})")


def model_from_json(doc: dict) -> NodeMeg:
    """``{"n", "kernel", "connection": {"matrix": [[..]]} | {"constant": 0/1}, "init"}``."""
    from .markov import kernel_from_json

    kernel = kernel_from_json(doc["kernel"])
    conn_doc = doc["connection"]
    if "matrix" in conn_doc:
        conn = MatrixConnection(conn_doc["matrix"])
    elif "constant" in conn_doc:
        conn = ConstantConnection(kernel.state_count, bool(conn_doc["constant"]))
    else:
        raise NodeMegError(f"unknown connection spec {sorted(conn_doc)}")
    return NodeMeg(int(doc["n"]), kernel, conn, doc.get("init", "stationary"))


__all__ = [
    "Connection", "MatrixConnection", "ConstantConnection", "PointConnection",
    "NodeMeg", "NodeMegProcess", "NodeMegError", "as_meg", "epoch_length", "epoch_length_value",
    "node_meg_bound", "node_meg_bound_value", "verify_pair_dependence", "PairDependenceReport", "PairDependenceRow",
    "pair_dependence_enumerate", "pair_dependence_closed_form", "pair_dependence_monte_carlo", "brute_force_p_nm",
    "point_meeting_model", "constant_model", "model_from_json",
]
