"""Dynamic graph processes, snapshot statistics and stationarity estimators.

A process yields E_0 from ``reset`` and E_1, E_2, ... from successive
``advance`` calls. Epoch-based quantities sample the process every M steps.
"""

from __future__ import annotations

import io
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .seeding import as_rng


class GraphError(ValueError):
    pass


class Snapshot:
    """Undirected simple graph on nodes 0..n-1, stored as a boolean adjacency matrix."""

    __slots__ = ("adj",)

    def __init__(self, adj, check: bool = True):
        a = np.asarray(adj, dtype=bool)
        if check:
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise GraphError(f"adjacency must be square, got shape {a.shape}")
            if a.diagonal().any():
                raise GraphError("self-loops are not allowed")
            if not np.array_equal(a, a.T):
                raise GraphError("adjacency must be symmetric")
        a.setflags(write=False)
        self.adj = a

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Snapshot":
        a = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise GraphError(f"self-loop at {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) outside [0, {n})")
            a[i, j] = a[j, i] = True
        return cls(a, check=False)

    @classmethod
    def complete(cls, n: int) -> "Snapshot":
        return cls(~np.eye(n, dtype=bool), check=False)

    @classmethod
    def empty(cls, n: int) -> "Snapshot":
        return cls(np.zeros((n, n), dtype=bool), check=False)

    @classmethod
    def path(cls, n: int) -> "Snapshot":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def star(cls, n: int, center: int = 0) -> "Snapshot":
        return cls.from_edges(n, [(center, j) for j in range(n) if j != center])

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adj, 1))
        return list(zip(i.tolist(), j.tolist()))

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum()) // 2

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i, j])

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adj[i])

    def neighbors_of_set(self, mask: np.ndarray) -> np.ndarray:
        """Boolean mask of nodes adjacent to at least one node in ``mask``."""
        return self.adj[np.asarray(mask, dtype=bool)].any(axis=0)

    def __eq__(self, other):
        return isinstance(other, Snapshot) and np.array_equal(self.adj, other.adj)

    def __repr__(self):
        return f"<Snapshot n={self.n} edges={self.edge_count}>"


class MegProcess(ABC):
    """A dynamic graph process over a fixed node set.

    ``exchangeable`` marks processes whose law is invariant under node
    relabelling (node-MEGs with a common initial law, edge-MEGs), which lets
    estimators pool all node pairs.
    """

    n: int
    exchangeable: bool = False
    _current: Snapshot | None = None

    @abstractmethod
    def reset(self, rng: np.random.Generator) -> Snapshot:
        """Draw the initial state and return E_0."""

    @abstractmethod
    def advance(self, rng: np.random.Generator) -> Snapshot:
        """Move one step forward and return the new snapshot."""

    @property
    def current(self) -> Snapshot:
        if self._current is None:
            raise GraphError("process has not been reset")
        return self._current

    def advance_steps(self, steps: int, rng: np.random.Generator) -> Snapshot:
        snap = self._current
        for _ in range(steps):
            snap = self.advance(rng)
        if snap is None:
            raise GraphError("process has not been reset")
        return snap


class StaticMeg(MegProcess):
    """The same snapshot at every step."""

    def __init__(self, snapshot: Snapshot):
        self.snapshot = snapshot
        self.n = snapshot.n
        # a constant graph is exchangeable only when it is complete or empty
        m = snapshot.edge_count
        self.exchangeable = m in (0, self.n * (self.n - 1) // 2)

    def reset(self, rng=None) -> Snapshot:
        self._current = self.snapshot
        return self.snapshot

    def advance(self, rng=None) -> Snapshot:
        self._current = self.snapshot
        return self.snapshot


class TraceMeg(MegProcess):
    """Replays a recorded snapshot sequence; ``reset`` yields the first entry."""

    def __init__(self, snapshots: Sequence[Snapshot]):
        if not snapshots:
            raise GraphError("empty trace")
        self.snapshots = list(snapshots)
        self.n = self.snapshots[0].n
        self._t = 0

    def reset(self, rng=None) -> Snapshot:
        self._t = 0
        self._current = self.snapshots[0]
        return self._current

    def advance(self, rng=None) -> Snapshot:
        if self._t + 1 >= len(self.snapshots):
            raise GraphError(f"trace exhausted after {len(self.snapshots)} snapshots")
        self._t += 1
        self._current = self.snapshots[self._t]
        return self._current


# --- snapshot statistics ------------------------------------------------------


def _as_index(nodes, n: int) -> np.ndarray:
    idx = np.unique(np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes, dtype=np.int64))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise GraphError("node index out of range")
    return idx


def degree_into(s: Snapshot, i: int, A) -> int:
    """Number of nodes of A adjacent to i."""
    a = _as_index(A, s.n)
    if i in set(a.tolist()):
        raise GraphError("i must not belong to A")
    return int(s.adj[i, a].sum())


def expansion(s: Snapshot, A, B) -> int:
    """Number of nodes of B adjacent to at least one node of A."""
    a = _as_index(A, s.n)
    b = _as_index(B, s.n)
    if np.intersect1d(a, b).size:
        raise GraphError("A and B must be disjoint")
    if a.size == 0 or b.size == 0:
        return 0
    return int(s.adj[np.ix_(a, b)].any(axis=0).sum())


def _mask(nodes, n: int) -> np.ndarray:
    m = np.zeros(n, dtype=bool)
    m[_as_index(nodes, n)] = True
    return m


def spread_trace(meg: MegProcess, A, M: int, T: int, rng) -> list[int]:
    """Cumulative spread after each of T epochs (see ``spread``)."""
    if T < 1 or M < 1:
        raise GraphError("T and M must be >= 1")
    rng = as_rng(rng)
    inside = _mask(A, meg.n)
    reached = np.zeros(meg.n, dtype=bool)
    out = []
    for _ in range(T):
        snap = meg.advance_steps(M, rng)
        reached |= snap.neighbors_of_set(inside)
        out.append(int((reached & ~inside).sum()))
    return out


def spread(meg: MegProcess, A, M: int, T: int, rng) -> int:
    """Nodes outside A adjacent to A in at least one of the next T epoch snapshots.

    The process must already sit at an epoch boundary; it is advanced T * M
    steps and sampled after every M of them.
    """
    return spread_trace(meg, A, M, T, rng)[-1]


# --- estimators ---------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    value: float
    radius: float
    samples: int
    note: str = ""

    @property
    def lower(self) -> float:
        return self.value - self.radius

    @property
    def upper(self) -> float:
        return self.value + self.radius


@dataclass(frozen=True)
class SizeRatio:
    size: int
    ratio: float | None
    radius: float | None
    p_joint: float
    p_single: float


@dataclass(frozen=True)
class BetaEstimate(Estimate):
    per_size: tuple[SizeRatio, ...] = ()
    indeterminate: int = 0


@dataclass(frozen=True)
class StationarityEstimate:
    M: int
    alpha: Estimate
    beta: BetaEstimate

    @property
    def sample_counts(self) -> dict[str, int]:
        return {"alpha": self.alpha.samples, "beta": self.beta.samples}


_UNCONDITIONAL = (
    "unconditional estimate at approximate stationarity over independent restarts; "
    "conditioning on the full history is not evaluated"
)


def epoch_samples(
    meg: MegProcess,
    M: int,
    *,
    burn_in_epochs: int,
    trials: int,
    epochs_per_trial: int,
    rng,
):
    """Yield snapshots at epoch boundaries after burn-in, over independent restarts."""
    if M < 1 or trials < 1 or epochs_per_trial < 1:
        raise GraphError("M, trials and epochs_per_trial must be >= 1")
    rng = as_rng(rng)
    for _ in range(trials):
        meg.reset(rng)
        if burn_in_epochs:
            meg.advance_steps(burn_in_epochs * M, rng)
        for _ in range(epochs_per_trial):
            yield meg.advance_steps(M, rng)


def estimate_alpha(
    meg: MegProcess,
    M: int,
    burn_in_epochs: int = 3,
    trials: int = 200,
    rng=None,
    *,
    epochs_per_trial: int = 1,
    pooled: bool | None = None,
) -> Estimate:
    """Lower estimate of the stationary edge probability.

    Exchangeable processes pool all pairs: the sample unit is the edge
    density of one snapshot and the radius is 3 standard errors of its mean.
    Otherwise the minimum per-pair frequency is returned with a 3-sigma
    binomial radius.
    """
    if pooled is None:
        pooled = meg.exchangeable
    n = meg.n
    pairs = n * (n - 1) // 2
    snaps = epoch_samples(meg, M, burn_in_epochs=burn_in_epochs, trials=trials,
                          epochs_per_trial=epochs_per_trial, rng=rng)
    if pooled:
        dens = np.array([s.edge_count / pairs for s in snaps])
        value = float(dens.mean())
        if dens.size > 1:
            radius = 3 * float(dens.std(ddof=1)) / math.sqrt(dens.size)
        else:
            radius = 3 * math.sqrt(value * (1 - value) / pairs)
        note = "pooled over all pairs; " + _UNCONDITIONAL
        samples = int(dens.size)
    else:
        counts = np.zeros((n, n))
        samples = 0
        for s in snaps:
            counts += s.adj
            samples += 1
        freq = counts / samples
        iu = np.triu_indices(n, 1)
        k = int(np.argmin(freq[iu]))
        value = float(freq[iu][k])
        radius = 3 * math.sqrt(value * (1 - value) / samples)
        note = "minimum over pairs; " + _UNCONDITIONAL
    if value == 0:
        note = "no edges observed; " + note
    return Estimate(value, radius, samples, note)


def default_set_sizes(n: int) -> list[int]:
    sizes, a = [], 1
    while a <= max(1, n // 4) and a <= n - 2:
        sizes.append(a)
        a *= 2
    return sizes


def estimate_beta(
    meg: MegProcess,
    M: int,
    set_sizes: Sequence[int] | None = None,
    trials: int = 200,
    rng=None,
    *,
    burn_in_epochs: int = 3,
    epochs_per_trial: int = 1,
) -> BetaEstimate:
    """Upper estimate of the incident-edge correlation ratio.

    At every sampled snapshot and for every size a, a uniformly random A with
    |A| = a is drawn and every node pair {i, j} outside A contributes to the
    estimates of P(e_iA e_jA) and P(e_iA). The ratio
    P(e_iA e_jA) / P(e_iA)^2 is reported per size with a delta-method 3-sigma
    radius (snapshot = sample unit), and the maximum over sizes is returned.
    Pooling over pairs assumes exchangeability; for other processes this is
    the pair-averaged ratio.
    """
    rng = as_rng(rng)
    n = meg.n
    sizes = list(set_sizes) if set_sizes is not None else default_set_sizes(n)
    if any(a < 1 or a > n - 2 for a in sizes):
        raise GraphError("set sizes must lie in [1, n - 2]")
    u = {a: [] for a in sizes}
    v = {a: [] for a in sizes}
    for snap in epoch_samples(meg, M, burn_in_epochs=burn_in_epochs, trials=trials,
                              epochs_per_trial=epochs_per_trial, rng=rng):
        for a in sizes:
            A = rng.choice(n, size=a, replace=False)
            outside = np.ones(n, dtype=bool)
            outside[A] = False
            hit = snap.adj[:, A].any(axis=1)[outside]
            m = n - a
            S = float(hit.sum())
            u[a].append(S * (S - 1) / (m * (m - 1)))
            v[a].append(S / m)
    per_size = []
    indeterminate = 0
    best: SizeRatio | None = None
    samples = 0
    for a in sizes:
        U, V = np.array(u[a]), np.array(v[a])
        samples = U.size
        mu, mv = float(U.mean()), float(V.mean())
        if mv == 0:
            per_size.append(SizeRatio(a, None, None, mu, mv))
            indeterminate += 1
            continue
        ratio = mu / mv**2
        if U.size > 1:
            cov = np.cov(np.vstack([U, V])) / U.size
            g = np.array([1 / mv**2, -2 * mu / mv**3])
            radius = 3 * math.sqrt(max(0.0, float(g @ cov @ g)))
        else:
            radius = math.inf
        item = SizeRatio(a, ratio, radius, mu, mv)
        per_size.append(item)
        if best is None or ratio > best.ratio:
            best = item
    note = _UNCONDITIONAL
    if indeterminate:
        note = f"{indeterminate} set size(s) indeterminate (no incident edges observed); " + note
    if best is None:
        return BetaEstimate(math.nan, math.nan, samples, note, tuple(per_size), indeterminate)
    return BetaEstimate(best.ratio, best.radius, samples, note, tuple(per_size), indeterminate)


def estimate_stationarity(meg: MegProcess, M: int, trials: int = 200, rng=None, **kw) -> StationarityEstimate:
    rng = as_rng(rng)
    alpha = estimate_alpha(meg, M, trials=trials, rng=rng)
    beta = estimate_beta(meg, M, kw.get("set_sizes"), trials=trials, rng=rng)
    return StationarityEstimate(M, alpha, beta)


# --- expansion event frequencies --------------------------------------------------

EVENTS = ("degree", "expansion", "spread", "contact")


@dataclass(frozen=True)
class ExpansionConfig:
    set_sizes: tuple[int, ...] = (2, 4, 8)
    samples: int = 10_000
    dynamic_samples: int = 500
    t: float = 1.0
    burn_in_epochs: int = 3
    restart_every: int = 200
    b_size: int | None = None
    events: tuple[str, ...] = EVENTS


@dataclass(frozen=True)
class EventCheck:
    event: str
    set_size: int
    description: str
    observed: float
    required: float
    sigma: float
    samples: int
    passed: bool
    note: str = ""


@dataclass
class ExpansionReport:
    alpha: float
    beta: float
    M: int
    checks: list[EventCheck] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def by_event(self, event: str) -> list[EventCheck]:
        return [c for c in self.checks if c.event == event]


def degree_threshold(a: int, alpha: float) -> float:
    return a * alpha / 2


def degree_event_floor(a: int, alpha: float, beta: float) -> float:
    """Guaranteed probability that a fixed outside node has >= a*alpha/2 neighbours in A."""
    return a * alpha / (2 + 2 * a * alpha * beta)


def expansion_threshold(a: int, b: int, alpha: float, beta: float) -> float:
    return a * b * alpha / (4 + 4 * a * alpha * beta)


def expansion_event_floor(a: int, b: int, alpha: float, beta: float) -> float:
    return a * b * alpha / (4 + 6 * a * b * alpha * beta)


def spread_horizon(a: int, n: int, alpha: float, beta: float, t: float) -> int:
    """Epochs after which A has reached |A| outside nodes with probability >= 1 - e^-t."""
    T = 256 * (1 / (a * n**2 * alpha**2) + beta / (n * alpha) + a * beta**2 / n)
    T += (4 / (a * n * alpha) + 3 * beta) * t
    return math.ceil(T)


def contact_horizon(a: int, alpha: float, beta: float, t: float) -> int:
    """Epochs after which a fixed node has met A with probability >= 1 - e^-t."""
    return math.ceil(2 * (1 / (a * alpha) + beta) * t)


def _check(event, a, description, hits, total, required, note=""):
    freq = hits / total if total else math.nan
    sigma = math.sqrt(max(required * (1 - required), 0.0) / total) if total else math.inf
    passed = bool(total) and freq >= required - 3 * sigma
    return EventCheck(event, a, description, freq, required, sigma, total, passed, note)


def verify_expansion_events(
    meg: MegProcess,
    alpha: float,
    beta: float,
    M: int,
    config: ExpansionConfig | None = None,
    rng=None,
) -> ExpansionReport:
    """Empirical frequencies of the expansion events against their lower bounds.

    Events: "degree" (a fixed outside node sees >= |A| alpha / 2 nodes of A),
    "expansion" (>= |A||B| alpha / (4 + 4|A| alpha beta) nodes of B see A),
    "spread" (A reaches |A| outside nodes within a horizon of epochs) and
    "contact" (a fixed outside node meets A within a horizon). Each check
    passes when the observed frequency is at least the bound minus three
    binomial standard deviations of the bound.
    """
    cfg = config or ExpansionConfig()
    unknown = set(cfg.events) - set(EVENTS)
    if unknown:
        raise GraphError(f"unknown events {sorted(unknown)}")
    rng = as_rng(rng)
    n = meg.n
    report = ExpansionReport(alpha, beta, M)
    sizes = [a for a in cfg.set_sizes if 1 <= a <= n - 1]
    if alpha <= 0:
        report.flags.append("alpha <= 0: density condition is vacuous, bounds are meaningless")
        for a in sizes:
            for ev in cfg.events:
                report.checks.append(EventCheck(ev, a, "n/a", math.nan, math.nan, math.nan, 0,
                                                False, "alpha = 0"))
        return report

    def fresh_start():
        meg.reset(rng)
        meg.advance_steps(cfg.burn_in_epochs * M, rng)

    # single-snapshot events
    static = [ev for ev in ("degree", "expansion") if ev in cfg.events]
    if static and sizes:
        hits = {(ev, a): 0 for ev in static for a in sizes}
        for k in range(cfg.samples):
            if k % cfg.restart_every == 0:
                fresh_start()
            snap = meg.advance_steps(M, rng)
            for a in sizes:
                perm = rng.permutation(n)
                A, rest = perm[:a], perm[a:]
                if "degree" in static:
                    deg = int(snap.adj[rest[0], A].sum())
                    hits[("degree", a)] += deg >= degree_threshold(a, alpha)
                if "expansion" in static:
                    B = rest if cfg.b_size is None else rest[: cfg.b_size]
                    if B.size:
                        exp_ = int(snap.adj[np.ix_(A, B)].any(axis=0).sum())
                        hits[("expansion", a)] += exp_ >= expansion_threshold(a, B.size, alpha, beta)
        for a in sizes:
            if "degree" in static:
                report.checks.append(_check(
                    "degree", a, f"deg_iA >= {degree_threshold(a, alpha):.4g}",
                    hits[("degree", a)], cfg.samples, degree_event_floor(a, alpha, beta)))
            if "expansion" in static:
                b = n - a if cfg.b_size is None else min(cfg.b_size, n - a)
                report.checks.append(_check(
                    "expansion", a, f"deg_AB >= {expansion_threshold(a, b, alpha, beta):.4g} (|B|={b})",
                    hits[("expansion", a)], cfg.samples, expansion_event_floor(a, b, alpha, beta)))

    # multi-epoch events, each sample on a fresh window
    dynamic = [ev for ev in ("spread", "contact") if ev in cfg.events]
    if dynamic and sizes:
        horizon = {}
        for a in sizes:
            if "spread" in dynamic and a <= n / 4:
                horizon[("spread", a)] = spread_horizon(a, n, alpha, beta, cfg.t)
            if "contact" in dynamic:
                horizon[("contact", a)] = contact_horizon(a, alpha, beta, cfg.t)
        window = max(horizon.values()) if horizon else 0
        hits = {key: 0 for key in horizon}
        for _ in range(cfg.dynamic_samples):
            fresh_start()
            sets = {}
            for a in sizes:
                perm = rng.permutation(n)
                inside = np.zeros(n, dtype=bool)
                inside[perm[:a]] = True
                sets[a] = (inside, perm[a])
            reached = {a: np.zeros(n, dtype=bool) for a in sizes}
            status = {key: False for key in horizon}
            for ep in range(1, window + 1):
                snap = meg.advance_steps(M, rng)
                for a in sizes:
                    inside, i = sets[a]
                    reached[a] |= snap.neighbors_of_set(inside)
                    if horizon.get(("spread", a)) == ep:
                        status[("spread", a)] = int((reached[a] & ~inside).sum()) >= a
                    if horizon.get(("contact", a)) == ep:
                        status[("contact", a)] = bool(reached[a][i])
            for key, ok in status.items():
                hits[key] += ok
        bound = 1 - math.exp(-cfg.t)
        for a in sizes:
            if ("spread", a) in horizon:
                report.checks.append(_check(
                    "spread", a, f"spread >= |A| within T={horizon[('spread', a)]} epochs",
                    hits[("spread", a)], cfg.dynamic_samples, bound))
            elif "spread" in dynamic:
                report.flags.append(f"spread event skipped for |A|={a} > n/4")
            if ("contact", a) in horizon:
                report.checks.append(_check(
                    "contact", a, f"e_iA = 1 within T={horizon[('contact', a)]} epochs",
                    hits[("contact", a)], cfg.dynamic_samples, bound))
    return report


# --- trace format ------------------------------------------------------------


def write_trace(snapshots: Iterable[Snapshot], dest) -> None:
    """Write ``n=<N>`` then, per step, ``t=<T>`` followed by ``i j`` edge lines."""
    snaps = list(snapshots)
    if not snaps:
        raise GraphError("nothing to write")
    lines = [f"n={snaps[0].n}"]
    for t, s in enumerate(snaps):
        if s.n != snaps[0].n:
            raise GraphError("snapshots differ in node count")
        lines.append(f"t={t}")
        lines.extend(f"{i} {j}" for i, j in s.edges())
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)


def read_trace(src) -> list[Snapshot]:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text()
    elif isinstance(src, io.TextIOBase) or hasattr(src, "read"):
        text = src.read()
    else:
        raise GraphError("unsupported trace source")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise GraphError("trace must start with n=<N>")
    n = int(lines[0][2:])
    out: list[Snapshot] = []
    edges: list[tuple[int, int]] | None = None
    expected_t = 0
    for ln in lines[1:]:
        if ln.startswith("t="):
            if edges is not None:
                out.append(Snapshot.from_edges(n, edges))
            if int(ln[2:]) != expected_t:
                raise GraphError(f"expected t={expected_t}, found {ln}")
            expected_t += 1
            edges = []
        else:
            if edges is None:
                raise GraphError("edge line before the first t= header")
            i, j = map(int, ln.split())
            edges.append((i, j))
    if edges is not None:
        out.append(Snapshot.from_edges(n, edges))
    return out
