"""Flooding over dynamic graphs and the general flooding-time bound."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dyngraph import GraphError, MegProcess
from .parallel import parallel_map
from .seeding import as_rng, stream

DEFAULT_STEP_CAP = 10**6
RUN_COLUMNS = ("model_id", "n", "seed", "source", "flood_time", "spreading_time",
               "saturation_time", "timeout_flag")


@dataclass(frozen=True)
class FloodRun:
    n: int
    source: int
    informed_sizes: tuple[int, ...]
    flood_time: int | None
    spreading_time: int | None
    step_cap: int

    @property
    def timed_out(self) -> bool:
        return self.flood_time is None

    @property
    def saturation_time(self) -> int | None:
        if self.flood_time is None or self.spreading_time is None:
            return None
        return self.flood_time - self.spreading_time


def flood(meg: MegProcess, source: int, step_cap: int = DEFAULT_STEP_CAP, rng=None,
          *, reset: bool = True) -> FloodRun:
    """Run I_0 = {s}, I_t = I_{t-1} + N(I_{t-1}, E_t) until everyone is informed.

    E_t is the snapshot produced by the t-th ``advance`` after ``reset``.
    Hitting ``step_cap`` is reported through ``flood_time = None``.
    """
    n = meg.n
    if not 0 <= source < n:
        raise GraphError(f"source {source} outside [0, {n})")
    if step_cap < 1:
        raise GraphError("step_cap must be >= 1")
    rng = as_rng(rng)
    if reset:
        meg.reset(rng)
    informed = np.zeros(n, dtype=bool)
    informed[source] = True
    sizes = [1]
    half = n / 2
    spreading = 0 if 1 >= half else None
    flood_time = 0 if n == 1 else None
    t = 0
    while flood_time is None and t < step_cap:
        t += 1
        snap = meg.advance(rng)
        informed |= snap.neighbors_of_set(informed)
        k = int(informed.sum())
        sizes.append(k)
        if spreading is None and k >= half:
            spreading = t
        if k == n:
            flood_time = t
    return FloodRun(n, source, tuple(sizes), flood_time, spreading, step_cap)


def flood_all_sources(meg: MegProcess, step_cap: int = DEFAULT_STEP_CAP, rng=None) -> np.ndarray:
    """Flooding time from every source on one shared realization (-1 = timeout).

    The maximum of the result is one sample of max_s F(G, s).
    """
    rng = as_rng(rng)
    n = meg.n
    meg.reset(rng)
    informed = np.eye(n, dtype=bool)
    times = np.full(n, -1, dtype=np.int64)
    if n == 1:
        times[:] = 0
        return times
    for t in range(1, step_cap + 1):
        adj = meg.advance(rng).adj.astype(np.uint8)
        informed |= (informed.astype(np.uint8) @ adj) > 0
        done = informed.all(axis=1) & (times < 0)
        times[done] = t
        if (times >= 0).all():
            break
    return times


# --- batches and statistics -----------------------------------------------------


def _resolve_sources(sources, n: int) -> list[int]:
    if isinstance(sources, str):
        if sources != "all":
            raise GraphError(f"unknown source spec {sources!r}")
        return list(range(n))
    out = [int(s) for s in sources]
    if not out:
        raise GraphError("empty source list")
    return out


def _flood_trial(meg, task):
    seed, keys, source, step_cap = task
    return flood(meg, source, step_cap, stream(seed, *keys))


def run_floods(meg: MegProcess, sources="all", trials: int = 100,
               step_cap: int = DEFAULT_STEP_CAP, seed: int = 0, keys: Sequence = (),
               workers: int = 1) -> list[FloodRun]:
    """``trials`` independent runs; trial k uses source ``sources[k % len]`` and
    the random stream ``(seed, *keys, k)``, so results do not depend on
    ``workers``."""
    if trials < 1:
        raise GraphError("trials must be >= 1")
    srcs = _resolve_sources(sources, meg.n)
    tasks = [(seed, (*keys, k), srcs[k % len(srcs)], step_cap) for k in range(trials)]
    return parallel_map(_flood_trial, tasks, shared=meg, workers=workers)


def _quantile(values: np.ndarray, q: float) -> float:
    return float(np.quantile(values, q, method="inverted_cdf"))


@dataclass(frozen=True)
class Summary:
    count: int
    timeouts: int
    mean: float
    median: float
    q90: float
    q_whp: float

    @property
    def timeout_rate(self) -> float:
        return self.timeouts / self.count if self.count else math.nan

    @classmethod
    def of(cls, times: Sequence[int | None], n: int) -> "Summary":
        arr = np.array([math.inf if t is None else t for t in times], dtype=float)
        finite = arr[np.isfinite(arr)]
        whp = 1 - 1 / n if n > 1 else 0.5
        return cls(
            count=int(arr.size),
            timeouts=int(arr.size - finite.size),
            mean=float(finite.mean()) if finite.size else math.inf,
            median=_quantile(arr, 0.5),
            q90=_quantile(arr, 0.9),
            q_whp=_quantile(arr, whp),
        )


@dataclass
class FloodStats:
    """Flooding-time statistics. Quantiles treat timeouts as +inf; ``mean``
    averages completed runs only."""

    n: int
    overall: Summary
    per_source: dict[int, Summary]
    mean_spreading: float
    mean_saturation: float
    max_over_sources: Summary | None = None
    flags: list[str] = field(default_factory=list)

    @property
    def all_timed_out(self) -> bool:
        return self.overall.timeouts == self.overall.count


def summarize(runs: Sequence[FloodRun], max_over_sources: Sequence[int | None] | None = None) -> FloodStats:
    if not runs:
        raise GraphError("no runs to summarize")
    n = runs[0].n
    by_src = defaultdict(list)
    for r in runs:
        by_src[r.source].append(r.flood_time)
    spread = [r.spreading_time for r in runs if r.spreading_time is not None and not r.timed_out]
    sat = [r.saturation_time for r in runs if r.saturation_time is not None]
    stats = FloodStats(
        n=n,
        overall=Summary.of([r.flood_time for r in runs], n),
        per_source={s: Summary.of(v, n) for s, v in sorted(by_src.items())},
        mean_spreading=float(np.mean(spread)) if spread else math.nan,
        mean_saturation=float(np.mean(sat)) if sat else math.nan,
        max_over_sources=Summary.of(max_over_sources, n) if max_over_sources else None,
    )
    if stats.all_timed_out:
        stats.flags.append("all runs timed out")
    return stats


def _max_trial(meg, task):
    seed, keys, step_cap = task
    times = flood_all_sources(meg, step_cap, stream(seed, *keys))
    return None if (times < 0).any() else int(times.max())


def max_source_samples(meg: MegProcess, trials: int, step_cap: int = DEFAULT_STEP_CAP,
                       seed: int = 0, keys: Sequence = (), workers: int = 1) -> list[int | None]:
    """Independent samples of max_s F(G, s); None marks a realization that timed out."""
    tasks = [(seed, (*keys, "max", k), step_cap) for k in range(trials)]
    return parallel_map(_max_trial, tasks, shared=meg, workers=workers)


def flooding_time_stats(meg: MegProcess, sources="all", trials: int = 100,
                        step_cap: int = DEFAULT_STEP_CAP, seed: int = 0, *,
                        keys: Sequence = (), max_source_trials: int = 0,
                        workers: int = 1) -> FloodStats:
    runs = run_floods(meg, sources, trials, step_cap, seed, keys, workers)
    maxes = None
    if max_source_trials:
        maxes = max_source_samples(meg, max_source_trials, step_cap, seed, keys, workers)
    return summarize(runs, maxes)


# --- bounds -----------------------------------------------------------------------


class BoundError(ValueError):
    pass


@dataclass(frozen=True)
class BoundParams:
    M: float
    alpha: float
    beta: float
    n: int
    c: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise BoundError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.beta < 0:
            raise BoundError("beta must be >= 0")
        if self.n < 2:
            raise BoundError("n must be >= 2")
        if self.M <= 0:
            raise BoundError("M must be positive")


def stationarity_bound(params: BoundParams) -> float:
    """c * M * (1/(n alpha) + beta)^2 * ln(n)^2, in steps."""
    p = params
    return p.c * p.M * (1 / (p.n * p.alpha) + p.beta) ** 2 * math.log(p.n) ** 2


def stationarity_phase_bounds(params: BoundParams) -> dict[str, float]:
    """Per-phase shape: spreading ~ M x^2 ln^2 n, saturation ~ M x ln n,
    with x = 1/(n alpha) + beta."""
    p = params
    x = 1 / (p.n * p.alpha) + p.beta
    ln = math.log(p.n)
    spreading = p.c * p.M * x**2 * ln**2
    saturation = p.c * p.M * x * ln
    return {"spreading": spreading, "saturation": saturation, "phased": spreading + saturation}


def default_step_cap(params: BoundParams | None) -> int:
    if params is None:
        return DEFAULT_STEP_CAP
    return max(1, math.ceil(100 * stationarity_bound(params)))


# --- phases -----------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseRow:
    n: int
    runs: int
    median_spreading: float
    median_saturation: float
    mean_spreading: float
    mean_saturation: float

    @property
    def ratio(self) -> float:
        if self.median_saturation == 0:
            return math.inf
        return self.median_spreading / self.median_saturation


@dataclass
class PhaseReport:
    rows: list[PhaseRow]

    @property
    def ratio_trend(self) -> list[float]:
        return [r.ratio for r in self.rows]

    @property
    def saturation_lags(self) -> bool | None:
        """True when spreading/saturation grows with n, i.e. saturation carries
        one log factor fewer. None with fewer than two sizes."""
        trend = [x for x in self.ratio_trend if math.isfinite(x)]
        if len(trend) < 2:
            return None
        return all(b >= a for a, b in zip(trend, trend[1:]))


def phase_report(runs: Sequence[FloodRun]) -> PhaseReport:
    if not runs:
        raise GraphError("no runs")
    groups = defaultdict(list)
    for r in runs:
        if not r.timed_out:
            groups[r.n].append(r)
    rows = []
    for n in sorted(groups):
        sp = np.array([r.spreading_time for r in groups[n]], dtype=float)
        sa = np.array([r.saturation_time for r in groups[n]], dtype=float)
        rows.append(PhaseRow(n, len(groups[n]), float(np.median(sp)), float(np.median(sa)),
                             float(sp.mean()), float(sa.mean())))
    return PhaseReport(rows)


# --- CSV -------------------------------------------------------------------------------


def run_rows(runs: Sequence[FloodRun], model_id: str, seed: int) -> list[dict]:
    return [
        {
            "model_id": model_id,
            "n": r.n,
            "seed": seed,
            "source": r.source,
            "flood_time": "" if r.flood_time is None else r.flood_time,
            "spreading_time": "" if r.spreading_time is None else r.spreading_time,
            "saturation_time": "" if r.saturation_time is None else r.saturation_time,
            "timeout_flag": int(r.timed_out),
        }
        for r in runs
    ]


def write_runs_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RUN_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
