"""Data reduction to a scalar statistic per feature, and the reduced densities."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from . import special
from .errors import DomainError, SampleTooSmall, ZeroVariance
from .optimize import log_grid, scan_minimize, symmetric_grid

MLE_SCAN_POINTS = 64
THETA_MARGIN = 6.0
THETA_MAX_FLOOR = 10.0


@dataclass(frozen=True)
class FeatureSample:
    """Raw measurements of one feature in the two groups."""

    feature_id: str
    group_x: tuple[float, ...]
    group_y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "group_x", tuple(float(v) for v in self.group_x))
        object.__setattr__(self, "group_y", tuple(float(v) for v in self.group_y))
        if not all(math.isfinite(v) for v in self.group_x + self.group_y):
            raise ValueError(f"feature {self.feature_id!r}: measurements must be finite")

    @property
    def m(self) -> int:
        return len(self.group_x)

    @property
    def n(self) -> int:
        return len(self.group_y)


@dataclass(frozen=True)
class ReducedStatistic:
    feature_id: str
    value: float
    df: int
    scale: float  # multiplies theta to give the noncentrality


class FamilyKind(str, enum.Enum):
    SIGNED_T = "signed_t"
    FOLDED_T = "folded_t"


@dataclass(frozen=True)
class StatFamily:
    kind: FamilyKind
    theta0: float = 0.0
    theta_domain: tuple[float, float] = field(default=(0.0, math.inf))

    def __post_init__(self):
        lo, hi = self.theta_domain
        if not lo <= self.theta0 <= hi:
            raise ValueError("theta0 must lie in theta_domain")

    def check(self, theta: float) -> None:
        lo, hi = self.theta_domain
        if not lo <= theta <= hi:
            raise DomainError(f"theta={theta!r} outside {self.kind.value} domain [{lo}, {hi}]")

    @property
    def folded(self) -> bool:
        return self.kind is FamilyKind.FOLDED_T


FOLDED_T = StatFamily(FamilyKind.FOLDED_T, 0.0, (0.0, math.inf))
SIGNED_T = StatFamily(FamilyKind.SIGNED_T, 0.0, (-math.inf, math.inf))


def family_by_name(name: str) -> StatFamily:
    return {"folded_t": FOLDED_T, "signed_t": SIGNED_T}[name]


def two_sample_t(sample: FeatureSample) -> ReducedStatistic:
    """Pooled-variance two-sample t statistic, group_x minus group_y."""
    m, n = sample.m, sample.n
    if m < 2 or n < 2:
        raise SampleTooSmall(f"feature {sample.feature_id!r}: need at least 2 values per group, got {m} and {n}")
    x = np.asarray(sample.group_x)
    y = np.asarray(sample.group_y)
    df = m + n - 2
    ss = np.sum((x - x.mean()) ** 2) + np.sum((y - y.mean()) ** 2)
    pooled_var = ss / df
    magnitude = max(np.max(np.abs(x)), np.max(np.abs(y)), 1.0)
    if pooled_var <= (8 * np.finfo(float).eps * magnitude) ** 2:
        raise ZeroVariance(f"feature {sample.feature_id!r}: pooled variance is zero")
    inv = 1.0 / m + 1.0 / n
    value = (x.mean() - y.mean()) / (math.sqrt(pooled_var) * math.sqrt(inv))
    return ReducedStatistic(sample.feature_id, float(value), df, 1.0 / math.sqrt(inv))


def abs_two_sample_t(sample: FeatureSample) -> ReducedStatistic:
    stat = two_sample_t(sample)
    return ReducedStatistic(stat.feature_id, abs(stat.value), stat.df, stat.scale)


def reduce(family: StatFamily, sample: FeatureSample) -> ReducedStatistic:
    """The reduction matching ``family``."""
    return abs_two_sample_t(sample) if family.folded else two_sample_t(sample)


def log_density_array(family: StatFamily, theta, values, df, scale) -> np.ndarray:
    """Vectorised ``log_density``; broadcasts theta against the statistics."""
    theta = np.asarray(theta, dtype=float)
    nc = np.asarray(scale, dtype=float) * theta
    if family.folded:
        return special.folded_nct_logpdf(values, df, nc)
    return special.nct_logpdf(values, df, nc)


def log_density(family: StatFamily, theta: float, stat: ReducedStatistic) -> float:
    """Natural log of the density of the reduced statistic at parameter ``theta``."""
    family.check(theta)
    if family.folded and stat.value < 0:
        raise DomainError("folded_t statistics must be nonnegative")
    return float(log_density_array(family, theta, stat.value, stat.df, stat.scale))


def default_theta_max(stats: Sequence[ReducedStatistic]) -> float:
    """Upper end of theta searches: max_j (|T_j| + 6) / scale_j, at least 10."""
    bound = max(((abs(s.value) + THETA_MARGIN) / s.scale for s in stats), default=0.0)
    return max(bound, THETA_MAX_FLOOR)


def theta_scan_grid(family: StatFamily, theta_max: float, n: int) -> np.ndarray:
    if family.folded:
        return log_grid(theta_max, n, lower=family.theta0)
    return symmetric_grid(theta_max, n + 1 if n % 2 == 0 else n)


def feature_mle(family: StatFamily, stat: ReducedStatistic, theta_max: float | None = None,
                tol: float = 1e-6) -> float:
    """Maximum-likelihood theta for one statistic by scan plus golden section."""
    if theta_max is None:
        theta_max = default_theta_max([stat])
    grid = theta_scan_grid(family, theta_max, MLE_SCAN_POINTS)
    values = -log_density_array(family, grid, stat.value, stat.df, stat.scale)

    def objective(theta):
        return -float(log_density_array(family, theta, stat.value, stat.df, stat.scale))

    return scan_minimize(objective, grid, values, tol=tol, n_refine=2).x


@dataclass(frozen=True)
class BinomialPair:
    x1: int
    x2: int
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("binomial sizes must be positive")
        if not (0 <= self.x1 <= self.n1 and 0 <= self.x2 <= self.n2):
            raise ValueError("binomial counts out of range")

    @property
    def s(self) -> int:
        return self.x1 + self.x2


def _log_choose(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def binomial_conditional_loglik(theta: float, data: BinomialPair) -> float:
    """Log conditional probability of x1 given s = x1 + x2, as a function of
    the log odds ratio ``theta``.

    theta * x1 - log K(theta) + log[C(n1, x1) C(n2, x2)], with
    K(theta) = sum_j C(n1, j) C(n2, s - j) e^{j theta} over
    max(0, s - n2) <= j <= min(n1, s). The binomial-coefficient term is
    constant in theta; keeping it makes the result a normalised log pmf
    (noncentral hypergeometric).
    """
    s = data.s
    j = np.arange(max(0, s - data.n2), min(data.n1, s) + 1, dtype=float)
    log_k = logsumexp(_log_choose(data.n1, j) + _log_choose(data.n2, s - j) + j * theta)
    return float(theta * data.x1 + _log_choose(data.n1, data.x1) + _log_choose(data.n2, data.x2) - log_k)
