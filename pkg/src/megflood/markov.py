"""Finite Markov chain machinery.

Kernels are stored as CSR matrices so the same code path serves a 2-state
edge chain and a random-path chain with 10^5 states. Small chains (at most
``EXACT_LIMIT`` states) get exact stationary solves and exact mixing times.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

EXACT_LIMIT = 4096
ROW_TOL = 1e-12


class MarkovError(ValueError):
    pass


class NotErgodicError(MarkovError):
    """The chain is reducible (several closed classes) or periodic."""


class ConvergenceError(MarkovError):
    pass


class MixingNotDetected(MarkovError):
    def __init__(self, message: str, best_tv: float):
        super().__init__(f"{message} (best TV achieved: {best_tv:.6g})")
        self.best_tv = best_tv


def as_distribution(weights, size: int | None = None) -> np.ndarray:
    """Validate a probability vector and return it as a read-only float array."""
    w = np.array(weights, dtype=float).ravel()
    if size is not None and w.size != size:
        raise MarkovError(f"distribution has {w.size} entries, expected {size}")
    if w.size == 0:
        raise MarkovError("empty distribution")
    if np.any(w < 0):
        raise MarkovError("distribution has negative entries")
    if abs(w.sum() - 1.0) > ROW_TOL * max(1, w.size):
        raise MarkovError(f"distribution sums to {w.sum()!r}, not 1")
    w.setflags(write=False)
    return w


def point_mass(size: int, state: int) -> np.ndarray:
    w = np.zeros(size)
    w[state] = 1.0
    return as_distribution(w)


def total_variation(d1, d2) -> float:
    a = np.asarray(d1, dtype=float).ravel()
    b = np.asarray(d2, dtype=float).ravel()
    if a.shape != b.shape:
        raise MarkovError(f"domain size mismatch: {a.size} vs {b.size}")
    return float(min(1.0, 0.5 * np.abs(a - b).sum()))


class TransitionKernel:
    """Row-stochastic transition matrix over states ``0..state_count-1``.

    Accepts a dense array-like or any scipy sparse matrix. The instance is
    immutable; its arrays are flagged read-only so it can be shared between
    workers.
    """

    def __init__(self, matrix, label: str | None = None):
        csr = sparse.csr_matrix(matrix, dtype=float)
        csr.eliminate_zeros()
        csr.sort_indices()
        if csr.shape[0] != csr.shape[1]:
            raise MarkovError(f"kernel must be square, got {csr.shape}")
        if csr.shape[0] < 1:
            raise MarkovError("kernel needs at least one state")
        if csr.nnz and (csr.data.min() < 0 or csr.data.max() > 1 + ROW_TOL):
            raise MarkovError("transition probabilities must lie in [0, 1]")
        sums = np.asarray(csr.sum(axis=1)).ravel()
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise MarkovError(f"row {bad[0]} sums to {sums[bad[0]]!r}")
        for arr in (csr.data, csr.indices, csr.indptr):
            arr.setflags(write=False)
        self._csr = csr
        self.label = label
        self._dense: np.ndarray | None = None

        # Sampling key: row r occupies (r, r + 1]; the last entry of every
        # row is pinned to exactly r + 1 so float drift cannot leak across rows.
        lengths = np.diff(csr.indptr)
        rows = np.repeat(np.arange(csr.shape[0]), lengths)
        cum = np.cumsum(csr.data)
        start = np.concatenate(([0.0], cum))[csr.indptr[:-1]]
        within = cum - np.repeat(start, lengths)
        within[csr.indptr[1:] - 1] = 1.0
        key = rows + within
        key.setflags(write=False)
        self._key = key

    @property
    def state_count(self) -> int:
        return self._csr.shape[0]

    @property
    def csr(self) -> sparse.csr_matrix:
        return self._csr

    def dense(self) -> np.ndarray:
        if self._dense is None:
            d = self._csr.toarray()
            d.setflags(write=False)
            self._dense = d
        return self._dense

    def row(self, state: int) -> np.ndarray:
        return self._csr.getrow(state).toarray().ravel()

    def __repr__(self):
        name = f" {self.label!r}" if self.label else ""
        return f"<TransitionKernel{name} states={self.state_count} nnz={self._csr.nnz}>"

    def step(self, states, rng: np.random.Generator) -> np.ndarray:
        """Advance every entry of ``states`` by one independent transition."""
        s = np.asarray(states, dtype=np.int64)
        u = rng.random(s.shape)
        idx = np.searchsorted(self._key, s + u, side="right")
        lo = self._csr.indptr[s]
        hi = self._csr.indptr[s + 1] - 1
        idx = np.clip(idx, lo, hi)
        return self._csr.indices[idx].astype(np.int64)

    def sample(self, dist, size, rng: np.random.Generator) -> np.ndarray:
        d = as_distribution(dist, self.state_count)
        return np.asarray(rng.choice(self.state_count, size=size, p=d), dtype=np.int64)

    def lazy(self, stay: float) -> "TransitionKernel":
        """Return ``stay * I + (1 - stay) * P`` (same stationary distribution)."""
        if not 0 <= stay < 1:
            raise MarkovError("stay probability must be in [0, 1)")
        eye = sparse.identity(self.state_count, format="csr")
        label = f"lazy({self.label})" if self.label else None
        return TransitionKernel(stay * eye + (1 - stay) * self._csr, label=label)


# --- structure -----------------------------------------------------------


def closed_classes(kernel: TransitionKernel) -> list[np.ndarray]:
    """Closed communicating classes (recurrent classes) of the chain."""
    csr = kernel.csr
    ncomp, labels = csgraph.connected_components(csr, directed=True, connection="strong")
    coo = csr.tocoo()
    leaving = labels[coo.row] != labels[coo.col]
    open_ = np.zeros(ncomp, dtype=bool)
    open_[labels[coo.row[leaving]]] = True
    return [np.flatnonzero(labels == c) for c in range(ncomp) if not open_[c]]


def chain_period(kernel: TransitionKernel) -> int:
    """Period of the (unique) recurrent class; raises if there is more than one."""
    classes = closed_classes(kernel)
    if len(classes) != 1:
        raise NotErgodicError(f"chain has {len(classes)} closed classes")
    members = classes[0]
    sub = kernel.csr[members][:, members]
    level = csgraph.shortest_path(sub, directed=True, unweighted=True, indices=0).astype(np.int64)
    coo = sub.tocoo()
    diffs = np.abs(level[coo.row] + 1 - level[coo.col])
    return int(np.gcd.reduce(diffs)) if diffs.size else 1


def check_ergodic(kernel: TransitionKernel) -> None:
    period = chain_period(kernel)
    if period != 1:
        raise NotErgodicError(f"chain is periodic with period {period}")


def is_ergodic(kernel: TransitionKernel) -> bool:
    try:
        check_ergodic(kernel)
    except NotErgodicError:
        return False
    return True


# --- stationary distribution ---------------------------------------------


def stationary_distribution(
    kernel: TransitionKernel, tol: float = 1e-12, max_iter: int = 200_000
) -> np.ndarray:
    """Unique stationary distribution pi with ``max |pi P - pi| <= tol``.

    Dense linear solve up to ``EXACT_LIMIT`` states, damped power iteration
    beyond. Chains with more than one closed class raise ``NotErgodicError``.
    """
    if tol <= 0:
        raise MarkovError("tol must be positive")
    classes = closed_classes(kernel)
    if len(classes) != 1:
        raise NotErgodicError(
            f"stationary distribution is not unique: {len(classes)} closed classes"
        )
    S = kernel.state_count
    PT = kernel.csr.T.tocsr()
    if S <= EXACT_LIMIT:
        A = kernel.dense().T - np.eye(S)
        A[-1, :] = 1.0
        b = np.zeros(S)
        b[-1] = 1.0
        try:
            pi = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise NotErgodicError(f"singular stationary system: {exc}") from None
        pi = np.clip(pi, 0.0, None)
        pi /= pi.sum()
        # damped sweeps polish the solve residual down to tol
        for _ in range(50):
            if np.abs(PT @ pi - pi).max() <= tol:
                break
            pi = 0.5 * (pi + PT @ pi)
            pi /= pi.sum()
    else:
        pi = np.zeros(S)
        pi[classes[0]] = 1.0 / classes[0].size
        for _ in range(max_iter):
            nxt = PT @ pi
            if np.abs(nxt - pi).max() <= tol:
                pi = nxt
                break
            # averaging with the identity keeps pi but removes periodic oscillation
            pi = 0.5 * (pi + nxt)
        else:
            raise ConvergenceError(
                f"power iteration did not reach tol={tol} in {max_iter} iterations"
            )
        pi /= pi.sum()
    resid = np.abs(PT @ pi - pi).max()
    if resid > tol:
        raise ConvergenceError(f"stationary residual {resid:.3g} exceeds tol={tol}")
    pi.setflags(write=False)
    return pi


# --- mixing time ---------------------------------------------------------


def _worst_tv(power: np.ndarray, pi: np.ndarray) -> float:
    return float(0.5 * np.abs(power - pi[None, :]).sum(axis=1).max())


@dataclass(frozen=True)
class MixingEstimate:
    steps: int
    exact: bool
    method: str
    tv: float
    eps: float


def mixing_profile(kernel: TransitionKernel, steps: int) -> np.ndarray:
    """``d(t) = max_x TV(P^t(x, .), pi)`` for t = 0..steps (exact mode only)."""
    if kernel.state_count > EXACT_LIMIT:
        raise MarkovError("mixing_profile needs an exact-size kernel")
    pi = stationary_distribution(kernel)
    P = kernel.dense()
    cur = np.eye(kernel.state_count)
    out = [_worst_tv(cur, pi)]
    for _ in range(steps):
        cur = cur @ P
        out.append(_worst_tv(cur, pi))
    return np.array(out)


def _exact_mixing(kernel: TransitionKernel, eps: float, max_steps: int) -> MixingEstimate:
    check_ergodic(kernel)
    pi = stationary_distribution(kernel)
    P = kernel.dense()
    powers = [P]
    tvs = [_worst_tv(P, pi)]
    t_hi = 1
    while tvs[-1] > eps:
        if 2 * t_hi > max_steps:
            raise MixingNotDetected(f"TV above eps={eps} after {t_hi} steps", min(tvs))
        sq = powers[-1] @ powers[-1]
        powers.append(sq)
        tvs.append(_worst_tv(sq, pi))
        t_hi *= 2
    if t_hi == 1:
        return MixingEstimate(1, True, "exact", tvs[0], eps)
    # d(t) is nonincreasing: binary-compose the largest t with d(t) > eps
    cur, t_cur = powers[-2], t_hi // 2
    for i in range(len(powers) - 3, -1, -1):
        cand = cur @ powers[i]
        if _worst_tv(cand, pi) > eps:
            cur, t_cur = cand, t_cur + 2**i
    final = _worst_tv(cur @ P, pi)
    return MixingEstimate(t_cur + 1, True, "exact", final, eps)


def estimate_mixing_time(
    chain,
    eps: float = 0.25,
    *,
    rng: np.random.Generator,
    starts: Sequence[int] | None = None,
    project: Callable[[np.ndarray], np.ndarray] | None = None,
    target: np.ndarray | None = None,
    walkers: int = 20_000,
    max_steps: int = 100_000,
) -> MixingEstimate:
    """Empirical mixing time from sampled trajectories.

    For every start state, ``walkers`` independent copies are advanced in
    lockstep and the empirical law of ``project(state)`` is compared with
    ``target`` (the projected stationary law). The estimate is the first t at
    which the worst start is within ``eps``. Projection makes this a lower
    bound on the true mixing time; sampling noise adds roughly
    ``sqrt(categories / walkers)`` to every TV value.
    """
    if not 0 < eps < 1:
        raise MarkovError("eps must be in (0, 1)")
    if project is None:
        def project(s):
            return s
    if target is None:
        target = stationary_distribution(chain)
    target = np.asarray(target, dtype=float)
    k = target.size
    if starts is None:
        starts = rng.choice(chain.state_count, size=min(16, chain.state_count), replace=False)
    states = np.repeat(np.asarray(starts, dtype=np.int64), walkers)
    groups = np.repeat(np.arange(len(starts)), walkers)
    best = 1.0
    for t in range(1, max_steps + 1):
        states = chain.step(states, rng)
        counts = np.zeros((len(starts), k))
        np.add.at(counts, (groups, project(states)), 1.0)
        tv = float(0.5 * np.abs(counts / walkers - target[None, :]).sum(axis=1).max())
        best = min(best, tv)
        if tv <= eps:
            method = f"sampled: {len(starts)} starts x {walkers} walkers, projected TV over {k} cells"
            return MixingEstimate(t, False, method, tv, eps)
    raise MixingNotDetected(f"empirical TV above eps={eps} after {max_steps} steps", best)


def mixing_time(
    kernel: TransitionKernel,
    eps: float = 0.25,
    *,
    max_steps: int = 2**20,
    rng: np.random.Generator | None = None,
) -> int:
    """Smallest t with ``max_x TV(P^t(x, .), pi) <= eps``.

    Exact via repeated squaring up to ``EXACT_LIMIT`` states; beyond that an
    empirical estimate (see ``estimate_mixing_time``) seeded by ``rng``.
    """
    return mixing_report(kernel, eps, max_steps=max_steps, rng=rng).steps


def mixing_report(
    kernel: TransitionKernel,
    eps: float = 0.25,
    *,
    max_steps: int = 2**20,
    rng: np.random.Generator | None = None,
) -> MixingEstimate:
    if not 0 < eps < 1:
        raise MarkovError("eps must be in (0, 1)")
    if kernel.state_count <= EXACT_LIMIT:
        return _exact_mixing(kernel, eps, max_steps)
    if rng is None:
        rng = np.random.default_rng(0)
    return estimate_mixing_time(kernel, eps, rng=rng, max_steps=min(max_steps, 100_000))


# --- sampling -------------------------------------------------------------


def sample_trajectory(kernel: TransitionKernel, init, steps: int, rng: np.random.Generator) -> np.ndarray:
    if steps < 0:
        raise MarkovError("steps must be >= 0")
    out = np.empty(steps + 1, dtype=np.int64)
    out[0] = kernel.sample(init, None, rng)
    cur = out[:1]
    for t in range(1, steps + 1):
        cur = kernel.step(cur, rng)
        out[t] = cur[0]
    return out


# --- built-ins and JSON --------------------------------------------------


def two_state_kernel(p: float, q: float) -> TransitionKernel:
    """Off (state 0) -> on with probability p, on (state 1) -> off with probability q."""
    if not (0 <= p <= 1 and 0 <= q <= 1):
        raise MarkovError("rates must lie in [0, 1]")
    return TransitionKernel([[1 - p, p], [q, 1 - q]], label=f"two_state(p={p}, q={q})")


def cycle_kernel(k: int) -> TransitionKernel:
    """Deterministic rotation ``x -> x + 1 mod k``."""
    P = np.zeros((k, k))
    P[np.arange(k), (np.arange(k) + 1) % k] = 1.0
    return TransitionKernel(P, label=f"cycle({k})")


def complete_walk_kernel(k: int) -> TransitionKernel:
    """Uniform jump to one of the other k - 1 states."""
    if k < 2:
        raise MarkovError("complete walk needs k >= 2")
    P = (np.ones((k, k)) - np.eye(k)) / (k - 1)
    return TransitionKernel(P, label=f"complete_walk({k})")


def rank_one_kernel(weights) -> TransitionKernel:
    d = as_distribution(weights)
    return TransitionKernel(np.tile(d, (d.size, 1)), label="rank_one")


BUILTIN_KERNELS: dict[str, Callable[..., TransitionKernel]] = {
    "two_state": two_state_kernel,
    "cycle": cycle_kernel,
    "complete_walk": complete_walk_kernel,
    "rank_one": rank_one_kernel,
}


def kernel_to_json(kernel: TransitionKernel) -> dict:
    return {"states": kernel.state_count, "rows": kernel.dense().tolist()}


def kernel_from_json(doc) -> TransitionKernel:
    """Inverse of ``kernel_to_json``; also accepts ``"two_state"`` style ids or
    ``{"builtin": name, ...params}``."""
    if isinstance(doc, str):
        doc = {"builtin": doc}
    if "builtin" in doc:
        params = {k: v for k, v in doc.items() if k != "builtin"}
        try:
            factory = BUILTIN_KERNELS[doc["builtin"]]
        except KeyError:
            raise MarkovError(f"unknown built-in kernel {doc['builtin']!r}") from None
        try:
            return factory(**params)
        except TypeError as exc:
            raise MarkovError(f"bad parameters for {doc['builtin']!r}: {exc}") from None
    rows = np.asarray(doc["rows"], dtype=float)
    if rows.shape != (doc["states"], doc["states"]):
        raise MarkovError(f"rows shape {rows.shape} does not match states={doc['states']}")
    return TransitionKernel(rows)
