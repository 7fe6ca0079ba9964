"""Two-component mixture coding: null density plus one family member.

The joint maximum-likelihood estimate of (theta_alt, pi0) is found on the
profile likelihood in theta. For fixed theta the log-likelihood is concave
in pi0, so the inner problem is solved exactly by a safeguarded Newton
iteration on its derivative; the outer problem reuses the scan plus
golden-section optimiser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from .errors import EmptyAfterExclusion
from .optimize import scan_minimize
from .statistics import (
    ReducedStatistic,
    StatFamily,
    default_theta_max,
    log_density_array,
    theta_scan_grid,
)

SCAN_POINTS = 256
NON_IDENTIFIABLE = "non_identifiable"
LN2 = math.log(2.0)


@dataclass(frozen=True)
class MixtureFit:
    theta_alt: float
    pi0: float
    loglik: float
    excluded: int | None = None
    flags: frozenset[str] = field(default_factory=frozenset)
    raw_theta: float | None = None  # optimiser output before the identifiability guard


@dataclass(frozen=True)
class LfdrResult:
    feature_id: str
    lfdr: float
    mixture_delta: float  # bits


def _arrays(stats):
    value = np.array([s.value for s in stats], dtype=float)
    df = np.array([s.df for s in stats], dtype=float)
    scale = np.array([s.scale for s in stats], dtype=float)
    return value, df, scale


def _mix(ell0, ell_alt, pi0):
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(pi0) + ell0, np.log1p(-pi0) + ell_alt)


def mixture_loglik(family: StatFamily, theta: float, pi0: float,
                   stats: Sequence[ReducedStatistic]) -> float:
    """sum_j log[pi0 g_theta0(T_j) + (1 - pi0) g_theta(T_j)]."""
    family.check(theta)
    if not 0.0 <= pi0 <= 1.0:
        raise ValueError(f"pi0={pi0!r} is not a probability")
    value, df, scale = _arrays(stats)
    ell0 = log_density_array(family, family.theta0, value, df, scale)
    ell = log_density_array(family, theta, value, df, scale)
    return float(np.sum(_mix(ell0, ell, pi0)))


def profile_pi0(ell0: np.ndarray, ell_alt: np.ndarray, iters: int = 60) -> np.ndarray:
    """Maximising pi0 for each row of ``ell_alt`` (rows: theta values).

    ``ell0`` has shape (N,), ``ell_alt`` shape (K, N). Solves
    sum_j (u_j - v_j) / (pi0 u_j + (1 - pi0) v_j) = 0 with u, v the two
    densities rescaled by their common maximum.
    """
    ell_alt = np.atleast_2d(ell_alt)
    top = np.maximum(ell0[None, :], ell_alt)
    u = np.exp(ell0[None, :] - top)
    v = np.exp(ell_alt - top)
    diff = u - v

    def slope(p):
        return np.sum(diff / (p[:, None] * u + (1.0 - p[:, None]) * v), axis=1)

    k = ell_alt.shape[0]
    zeros, ones = np.zeros(k), np.ones(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        at0 = slope(zeros)
        at1 = slope(ones)
    out = np.full(k, 0.5)
    out[~(at0 > 0)] = 0.0
    out[at1 >= 0] = 1.0
    open_ = (at0 > 0) & (at1 < 0)
    if not np.any(open_):
        return out
    d, uu, vv = diff[open_], u[open_], v[open_]
    lo = np.zeros(d.shape[0])
    hi = np.ones(d.shape[0])
    p = np.full(d.shape[0], 0.5)
    for _ in range(iters):
        denom = p[:, None] * uu + (1.0 - p[:, None]) * vv
        g = np.sum(d / denom, axis=1)
        h = -np.sum((d / denom) ** 2, axis=1)
        lo = np.where(g > 0, p, lo)
        hi = np.where(g > 0, hi, p)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p - g / h
        inside = (step > lo) & (step < hi) & np.isfinite(step)
        new = np.where(inside, step, 0.5 * (lo + hi))
        done = np.all(np.abs(new - p) <= 1e-13)
        p = new
        if done:
            break
    out[open_] = p
    return out


def fit_mixture(family: StatFamily, stats: Sequence[ReducedStatistic],
                exclude: int | None = None, theta_max: float | None = None,
                tol: float = 1e-6) -> MixtureFit:
    """Joint MLE of (theta_alt, pi0), pooled or leaving out feature ``exclude``."""
    kept = [s for j, s in enumerate(stats) if j != exclude]
    if len(kept) < 2:
        raise EmptyAfterExclusion("a mixture fit needs at least two statistics")
    if theta_max is None:
        theta_max = default_theta_max(stats)
    kept.sort(key=lambda s: (s.value, s.df, s.scale))
    value, df, scale = _arrays(kept)
    ell0 = log_density_array(family, family.theta0, value, df, scale)
    grid = theta_scan_grid(family, theta_max, SCAN_POINTS)
    ell_grid = log_density_array(family, grid[:, None], value, df, scale)
    return _fit_from_grid(family, grid, ell_grid, ell0, value, df, scale, exclude, tol)


def _fit_from_grid(family, grid, ell_grid, ell0, value, df, scale, exclude, tol):
    pis = profile_pi0(ell0, ell_grid)
    prof = -np.sum(_mix(ell0[None, :], ell_grid, pis[:, None]), axis=1)

    def neg_profile(theta):
        ell = log_density_array(family, theta, value, df, scale)
        p = profile_pi0(ell0, ell[None, :])[0]
        return -float(np.sum(_mix(ell0, ell, p)))

    res = scan_minimize(neg_profile, grid, prof, tol=tol, n_refine=3)
    theta = family.theta0 if res.flat else res.x
    ell = log_density_array(family, theta, value, df, scale)
    pi0 = float(profile_pi0(ell0, ell[None, :])[0])
    n = value.size
    flags = set()
    raw = theta
    if res.flat or pi0 > 1.0 - 1.0 / (2.0 * n):
        flags.add(NON_IDENTIFIABLE)
        theta = family.theta0
        ell = ell0
    loglik = float(np.sum(_mix(ell0, ell, pi0)))
    return MixtureFit(float(theta), pi0, loglik, exclude, frozenset(flags), float(raw))


def fit_mixture_loo(family: StatFamily, stats: Sequence[ReducedStatistic],
                    theta_max: float | None = None, tol: float = 1e-6) -> list[MixtureFit]:
    """Leave-one-out fits for every feature, sharing one scan of the densities."""
    n = len(stats)
    if n < 3:
        raise EmptyAfterExclusion("leave-one-out mixture fits need at least three statistics")
    if theta_max is None:
        theta_max = default_theta_max(stats)
    order = sorted(range(n), key=lambda j: (stats[j].value, stats[j].df, stats[j].scale))
    value, df, scale = _arrays([stats[j] for j in order])
    ell0 = log_density_array(family, family.theta0, value, df, scale)
    grid = theta_scan_grid(family, theta_max, SCAN_POINTS)
    ell_grid = log_density_array(family, grid[:, None], value, df, scale)
    fits: list[MixtureFit | None] = [None] * n
    cache: dict[tuple, MixtureFit] = {}
    for pos, j in enumerate(order):
        key = (value[pos], df[pos], scale[pos])
        if key not in cache:
            keep = np.arange(n) != pos
            cache[key] = _fit_from_grid(family, grid, ell_grid[:, keep], ell0[keep],
                                        value[keep], df[keep], scale[keep], j, tol)
        fit = cache[key]
        fits[j] = MixtureFit(fit.theta_alt, fit.pi0, fit.loglik, j, fit.flags, fit.raw_theta)
    return fits


def lfdr(family: StatFamily, fit: MixtureFit, stat: ReducedStatistic) -> LfdrResult:
    """Posterior null probability of one statistic under the fitted mixture."""
    ell0 = float(log_density_array(family, family.theta0, stat.value, stat.df, stat.scale))
    ell = float(log_density_array(family, fit.theta_alt, stat.value, stat.df, stat.scale))
    if fit.pi0 >= 1.0:
        return LfdrResult(stat.feature_id, 1.0, math.inf)
    if fit.pi0 <= 0.0:
        return LfdrResult(stat.feature_id, 0.0, -math.inf)
    log_odds = math.log(fit.pi0) + ell0 - math.log1p(-fit.pi0) - ell
    return LfdrResult(stat.feature_id, float(expit(log_odds)), log_odds / LN2)
