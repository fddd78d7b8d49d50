"""Edge-Markovian evolving graphs: every edge runs its own copy of a hidden chain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dyngraph import MegProcess, Snapshot
from .markov import (MarkovError, TransitionKernel, as_distribution, mixing_time,
                     stationary_distribution, two_state_kernel)


@dataclass(frozen=True, eq=False)
class EdgeChainSpec:
    """Hidden edge chain plus the on/off projection ``chi``.

    ``init`` is None (start every edge in the stationary law), one
    distribution shared by all edges, or an (edges x states) array.
    """

    kernel: TransitionKernel
    chi: tuple[int, ...]
    init: object = None

    def __post_init__(self):
        if len(self.chi) != self.kernel.state_count:
            raise MarkovError("chi must assign 0/1 to every state")
        if any(c not in (0, 1) for c in self.chi):
            raise MarkovError("chi values must be 0 or 1")

    @cached_property
    def chi_array(self) -> np.ndarray:
        a = np.array(self.chi, dtype=bool)
        a.setflags(write=False)
        return a

    @cached_property
    def pi(self) -> np.ndarray:
        return stationary_distribution(self.kernel)

    @property
    def alpha(self) -> float:
        return edge_meg_alpha(self)

    @property
    def degenerate(self) -> bool:
        return self.alpha == 0


def edge_meg_alpha(spec: EdgeChainSpec) -> float:
    """Stationary probability that an edge is on."""
    return float(spec.pi[spec.chi_array].sum())


class EdgeMeg(MegProcess):
    """EM(n, kernel, chi): per-edge states kept in a flat upper-triangular array."""

    def __init__(self, n: int, spec: EdgeChainSpec):
        if n < 2:
            raise MarkovError("need at least two nodes")
        self.n = n
        self.spec = spec
        self.iu, self.ju = np.triu_indices(n, 1)
        self.states: np.ndarray | None = None
        init = spec.init
        self.exchangeable = init is None or np.ndim(init) == 1

    @property
    def pair_count(self) -> int:
        return self.iu.size

    def _snapshot(self) -> Snapshot:
        on = self.spec.chi_array[self.states]
        adj = np.zeros((self.n, self.n), dtype=bool)
        adj[self.iu[on], self.ju[on]] = True
        adj |= adj.T
        self._current = Snapshot(adj, check=False)
        return self._current

    def reset(self, rng: np.random.Generator) -> Snapshot:
        k = self.spec.kernel
        init = self.spec.init
        E = self.pair_count
        if init is None:
            self.states = k.sample(self.spec.pi, E, rng)
        elif np.ndim(init) == 1:
            self.states = k.sample(init, E, rng)
        else:
            table = np.asarray(init, dtype=float)
            if table.shape != (E, k.state_count):
                raise MarkovError(f"per-edge init must have shape {(E, k.state_count)}")
            cum = np.cumsum(table, axis=1)
            u = rng.random(E)[:, None]
            self.states = np.minimum((cum <= u).sum(axis=1), k.state_count - 1)
        return self._snapshot()

    def advance(self, rng: np.random.Generator) -> Snapshot:
        self.states = self.spec.kernel.step(self.states, rng)
        return self._snapshot()


def build_two_state(n: int, p: float, q: float, init=None) -> EdgeMeg:
    """Classic edge-MEG: an absent edge appears w.p. p, a present one dies w.p. q."""
    if not (0 < p <= 1 and 0 < q <= 1):
        raise MarkovError(f"rates must lie in (0, 1], got p={p}, q={q}")
    spec = EdgeChainSpec(two_state_kernel(p, q), (0, 1), init)
    return EdgeMeg(n, spec)


def edge_meg_bound(n: int, spec: EdgeChainSpec, c: float = 1.0, t_mix: float | None = None) -> float:
    """c * T_mix * (1/(n alpha) + 1)^2 * ln(n)^2 (independent edges give beta = 1)."""
    alpha = edge_meg_alpha(spec)
    if alpha <= 0:
        raise MarkovError("alpha = 0: the edge chain never switches an edge on")
    if t_mix is None:
        t_mix = mixing_time(spec.kernel)
    return edge_meg_value(t_mix, alpha, n, c)


def edge_meg_value(t_mix: float, alpha: float, n: int, c: float = 1.0) -> float:
    if alpha <= 0:
        raise MarkovError("alpha must be positive")
    return c * t_mix * (1 / (n * alpha) + 1) ** 2 * math.log(n) ** 2


def sparse_flooding_comparator(n: int, p: float) -> float:
    """ln(n) / ln(1 + n p): the prior flooding-time bound for two-state edge-MEGs."""
    if p <= 0:
        raise MarkovError("p must be positive")
    return math.log(n) / math.log1p(n * p)


def two_state_alpha(p: float, q: float) -> float:
    return p / (p + q)


def spec_from_config(doc: dict) -> EdgeChainSpec:
    """``{"p": .., "q": ..}`` shortcut or ``{"kernel": .., "chi": [..]}``."""
    from .markov import kernel_from_json

    if "p" in doc and "q" in doc and "kernel" not in doc:
        return EdgeChainSpec(two_state_kernel(float(doc["p"]), float(doc["q"])), (0, 1))
    kernel = kernel_from_json(doc["kernel"])
    init = doc.get("init")
    if init is not None and init != "stationary":
        init = as_distribution(init, kernel.state_count)
    else:
        init = None
    return EdgeChainSpec(kernel, tuple(int(c) for c in doc["chi"]), init)
