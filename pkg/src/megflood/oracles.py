"""Exhaustively evaluable probability inequalities used as test oracles.

Each instance type computes both sides of one inequality exactly on a
small finite model:

* ``PaleyZygmundInstance``: finite-support X >= 0,
  ``P(X >= theta E[X]) >= factor * E[X]^2 / E[X^2]`` with factor
  ``1 - theta^2`` (``form="sharp"``) or the classical ``(1 - theta)^2``.
  The sharp form does not hold in general; small counterexamples exist at
  theta = 1/2, and the oracle reports them as failures.
* ``DominationInstance``: binary Y_1..Y_n whose conditional success
  probability given the history is at least p; the sum is stochastically
  larger than Binomial(n, p).
* ``ChernoffInstance``: independent Bernoulli(p_i),
  ``P(X < (1 - delta) mu) < exp(-delta^2 mu / 2)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .markov import total_variation


class OracleInputError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    relation: str
    passed: bool


@dataclass
class OracleReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> dict[str, tuple[int, int]]:
        out: dict[str, tuple[int, int]] = {}
        for c in self.checks:
            ok, total = out.get(c.name, (0, 0))
            out[c.name] = (ok + c.passed, total + 1)
        return out


# floating slack for ">=" comparisons of exactly computed quantities
_SLACK = 1e-12


@dataclass(frozen=True)
class PaleyZygmundInstance:
    values: tuple[float, ...]
    probs: tuple[float, ...]
    theta: float = 0.5
    form: str = "sharp"

    def factor(self) -> float:
        if self.form == "sharp":
            return 1 - self.theta**2
        if self.form == "classical":
            return (1 - self.theta) ** 2
        raise OracleInputError(f"unknown form {self.form!r}")

    def evaluate(self) -> Check:
        x = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if np.any(x < 0):
            raise OracleInputError("Paley-Zygmund needs a nonnegative random variable")
        if not 0 < self.theta < 1:
            raise OracleInputError("theta must be in (0, 1)")
        mean = float(p @ x)
        second = float(p @ x**2)
        lhs = float(p[x >= self.theta * mean].sum())
        rhs = self.factor() * mean**2 / second if second > 0 else 0.0
        return Check(f"paley_zygmund[{self.form}]", lhs, rhs, ">=", lhs >= rhs - _SLACK)


@dataclass(frozen=True)
class DominationInstance:
    """Adaptive binary sequence given by a success probability per history.

    ``cond[h]`` is P(Y_i = 1 | Y_1..Y_{i-1} = h) for every binary history h of
    length i - 1 (keyed by tuple). All entries must be >= ``p``.
    """

    n: int
    p: float
    cond: dict

    def sum_distribution(self) -> np.ndarray:
        dist = np.zeros(self.n + 1)
        for ys in itertools.product((0, 1), repeat=self.n):
            prob = 1.0
            for i, y in enumerate(ys):
                c = self.cond[ys[:i]]
                prob *= c if y else 1 - c
            dist[sum(ys)] += prob
        return dist

    def evaluate(self) -> list[Check]:
        if min(self.cond.values()) < self.p - _SLACK:
            raise OracleInputError("a conditional success probability is below p")
        cdf = np.cumsum(self.sum_distribution())
        binom = stats.binom.cdf(np.arange(self.n + 1), self.n, self.p)
        return [
            Check(f"binomial_domination[k={k}]", float(cdf[k]), float(binom[k]), "<=",
                  bool(cdf[k] <= binom[k] + _SLACK))
            for k in range(self.n + 1)
        ]


@dataclass(frozen=True)
class ChernoffInstance:
    probs: tuple[float, ...]
    delta: float

    def evaluate(self) -> Check:
        p = np.asarray(self.probs, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise OracleInputError("success probabilities must be in [0, 1]")
        if self.delta <= 0:
            raise OracleInputError("delta must be positive")
        dist = np.array([1.0])
        for pi in p:
            dist = np.convolve(dist, [1 - pi, pi])
        mu = float(p.sum())
        cut = (1 - self.delta) * mu
        ks = np.arange(dist.size)
        lhs = float(dist[ks < cut].sum())
        rhs = math.exp(-self.delta**2 * mu / 2)
        # both sides can round to 1.0 when mu is tiny
        return Check("chernoff", lhs, rhs, "<", lhs < rhs or lhs <= rhs + _SLACK)


def inequality_oracles(instances) -> OracleReport:
    """Evaluate every instance and collect the per-inequality checks."""
    report = OracleReport()
    for inst in instances:
        result = inst.evaluate()
        if isinstance(result, Check):
            report.checks.append(result)
        else:
            report.checks.extend(result)
    return report


# --- random instance generators --------------------------------------------


def random_paley_zygmund(rng: np.random.Generator, max_support: int = 6, *,
                         theta: float | None = None, form: str = "sharp") -> PaleyZygmundInstance:
    k = int(rng.integers(1, max_support + 1))
    values = rng.choice([0.0, 0.0, 1.0], size=k) * rng.exponential(2.0, size=k)
    if not values.any():
        values[0] = rng.uniform(0.1, 5)
    probs = rng.dirichlet(np.ones(k))
    probs /= probs.sum()
    th = float(rng.uniform(0.01, 0.99)) if theta is None else theta
    return PaleyZygmundInstance(tuple(values), tuple(probs), th, form)


def random_domination(rng: np.random.Generator, max_n: int = 7) -> DominationInstance:
    n = int(rng.integers(1, max_n + 1))
    p = float(rng.uniform(0, 1))
    cond = {}
    for length in range(n):
        for h in itertools.product((0, 1), repeat=length):
            cond[h] = float(rng.uniform(p, 1))
    return DominationInstance(n, p, cond)


def random_chernoff(rng: np.random.Generator, max_n: int = 12) -> ChernoffInstance:
    n = int(rng.integers(1, max_n + 1))
    return ChernoffInstance(tuple(rng.uniform(0, 1, size=n)), float(rng.uniform(0.01, 1.5)))


# --- product distributions -----------------------------------------------


def product_distribution(factors) -> np.ndarray:
    """Joint law of independent coordinates, flattened in C order."""
    out = np.array([1.0])
    for f in factors:
        out = np.multiply.outer(out, np.asarray(f, dtype=float)).ravel()
    return out


def product_tv_check(psi, zeta) -> Check:
    """TV of two product laws (enumerated) against the sum of factor TVs."""
    if len(psi) != len(zeta):
        raise OracleInputError("factor lists differ in length")
    lhs = total_variation(product_distribution(psi), product_distribution(zeta))
    rhs = sum(total_variation(a, b) for a, b in zip(psi, zeta))
    return Check("product_tv", lhs, rhs, "<=", lhs <= rhs + 1e-12)
