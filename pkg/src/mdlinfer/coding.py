"""Universal codes for the reduced statistics of N features.

Two ways of choosing the alternative-hypothesis coding density from the
family: the exact code picks, for each feature, the parameter minimising the
summed min-regret over all *other* features; the approximate code uses the
single parameter minimising it over all features.

The objective sum_j max(log g_theta(T_j), log g_theta0(T_j)) is smooth
except at the points where a feature's alternative density crosses its null
density, and each crossing is a downward kink that can split a basin in two
with nearly equal optima. A plain golden-section search can stall in the
wrong half, so the search here is piecewise exact: on each candidate bracket
from the coarse scan every log-density is replaced by a validated Chebyshev
interpolant, the crossings are located as polynomial roots, and between
consecutive crossings (fixed active set) the smooth objective is maximised
through the roots of its derivative.

Everything is computed in nats and converted to the reporting base at the
end. Features are processed in a canonical order (sorted by statistic), so
permuting the input permutes the output and nothing else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyAfterExclusion
from numpy.polynomial import chebyshev as cheb

from .optimize import pick_best, scan_candidates
from .statistics import (
    ReducedStatistic,
    StatFamily,
    default_theta_max,
    feature_mle,
    log_density,
    log_density_array,
    theta_scan_grid,
)

OBJECTIVE_SCAN_POINTS = 256
NONUNIQUE = "nonunique"
# Chebyshev degree of the per-bracket interpolants, the worst interpolation
# error (nats) accepted before a bracket is split, and the split depth limit.
INTERP_DEGREE = 24
INTERP_ATOL = 1e-9
MAX_SPLITS = 6
DEGENERATE = "degenerate_alternative"


def _to_base(nats, base: float):
    return nats if base == math.e else nats / math.log(base)


@dataclass(frozen=True)
class CodingInput:
    family: StatFamily
    stats: tuple[ReducedStatistic, ...]
    mles: tuple[float, ...]
    theta_max: float

    def __post_init__(self):
        if len(self.stats) != len(self.mles):
            raise ValueError("stats and mles must be aligned")


def prepare(family: StatFamily, stats: Sequence[ReducedStatistic],
            theta_max: float | None = None, tol: float = 1e-6) -> CodingInput:
    """Attach per-feature MLEs, searched over a theta range shared by all features."""
    stats = tuple(stats)
    if theta_max is None:
        theta_max = default_theta_max(stats)
    mles = tuple(feature_mle(family, s, theta_max=theta_max, tol=tol) for s in stats)
    return CodingInput(family, stats, mles, float(theta_max))


@dataclass(frozen=True)
class FeatureCode:
    """Codelengths of one feature's statistic; all lengths in the reporting base."""

    feature_id: str
    L0: float
    L_alt: float
    theta_alt: float
    regret_alt: float
    regret_null: float
    delta: float


@dataclass(frozen=True)
class ApproxCode:
    theta: float
    codes: tuple[FeatureCode, ...]
    flags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ExactCode:
    thetas: tuple[float, ...]
    codes: tuple[FeatureCode, ...]
    flags: tuple[frozenset[str], ...]


def regret(family: StatFamily, theta_code: float, stat: ReducedStatistic, mle: float,
           base: float = 2.0) -> float:
    """Excess codelength of g_{theta_code} over the best member for this statistic."""
    family.check(theta_code)
    nats = log_density(family, mle, stat) - log_density(family, theta_code, stat)
    return _to_base(nats, base)


def regret_sum_objective(family: StatFamily, theta: float, stats: Sequence[ReducedStatistic],
                         mles: Sequence[float], exclude: int | None = None,
                         base: float = 2.0) -> float:
    """sum_j min(regret(theta, j), regret(theta0, j)), skipping ``exclude``."""
    family.check(theta)
    keep = [j for j in range(len(stats)) if j != exclude]
    if not keep:
        return 0.0
    pack = _Pack(family, [stats[j] for j in keep], [mles[j] for j in keep])
    return _to_base(pack.objective(theta), base)


class _Pack:
    """Statistics as arrays, with their MLE and null log-densities cached."""

    def __init__(self, family, stats, mles):
        self.family = family
        self.value = np.array([s.value for s in stats], dtype=float)
        self.df = np.array([s.df for s in stats], dtype=float)
        self.scale = np.array([s.scale for s in stats], dtype=float)
        self.ell_hat = self.logg(np.asarray(mles, dtype=float))
        self.ell0 = self.logg(family.theta0)

    def logg(self, theta, idx=slice(None)):
        return log_density_array(self.family, theta, self.value[idx], self.df[idx], self.scale[idx])

    def capped(self, theta, idx=slice(None)):
        """max(log g_theta, log g_theta0) per feature."""
        return np.maximum(self.logg(theta, idx), self.ell0[idx])

    def objective(self, theta, idx=slice(None)) -> float:
        return float(np.sum(self.ell_hat[idx]) - np.sum(self.capped(theta, idx)))

    def codes(self, feature_ids, thetas, base):
        thetas = np.broadcast_to(np.asarray(thetas, dtype=float), self.value.shape)
        ell_alt = self.logg(thetas)
        out = []
        for j, fid in enumerate(feature_ids):
            L0 = _to_base(-self.ell0[j], base)
            L_alt = _to_base(-ell_alt[j], base)
            out.append(FeatureCode(
                feature_id=fid,
                L0=float(L0),
                L_alt=float(L_alt),
                theta_alt=float(thetas[j]),
                regret_alt=float(_to_base(self.ell_hat[j] - ell_alt[j], base)),
                regret_null=float(_to_base(self.ell_hat[j] - self.ell0[j], base)),
                delta=float(L_alt - L0),
            ))
        return out


def _canonical(inp: CodingInput):
    order = sorted(range(len(inp.stats)),
                   key=lambda j: (inp.stats[j].value, inp.stats[j].df, inp.stats[j].scale))
    stats = [inp.stats[j] for j in order]
    mles = [inp.mles[j] for j in order]
    return order, stats, mles


def _scan(inp: CodingInput, pack: _Pack):
    grid = theta_scan_grid(inp.family, inp.theta_max, OBJECTIVE_SCAN_POINTS)
    capped = np.maximum(pack.logg(grid[:, None]), pack.ell0[None, :])
    return grid, capped


class _Piece:
    """Chebyshev interpolants of every log-density on one theta interval.

    Splits the interval at the crossings of log g_theta and log g_theta0 and
    records, per sub-interval, which features are on the alternative side.
    """

    def __init__(self, pack: _Pack, a: float, b: float, coef: np.ndarray):
        self.a, self.b = a, b
        self.coef = coef  # (degree + 1, N)
        ell0 = pack.ell0
        gap = coef.copy()
        gap[0] -= ell0
        cuts = []
        for j in range(gap.shape[1]):
            r = cheb.chebroots(gap[:, j])
            r = r[np.abs(r.imag) <= 1e-9].real
            cuts.extend(r[(r > -1.0) & (r < 1.0)])
        self.edges = np.unique(np.concatenate(([-1.0], np.asarray(cuts, dtype=float), [1.0])))
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        self.active = cheb.chebval(mids, gap).T > 0.0  # (intervals, N)
        self.poly = self.active.astype(float) @ coef.T  # (intervals, degree + 1)
        self.rest = (~self.active).astype(float) @ ell0

    def theta(self, x):
        return 0.5 * (self.a + self.b) + 0.5 * (self.b - self.a) * np.asarray(x)

    def maximise(self, ell0: np.ndarray, drop: int | None) -> list[tuple[float, float]]:
        """(theta, capped sum) at the best point of each sub-interval."""
        out = []
        for q in range(len(self.edges) - 1):
            poly, rest = self.poly[q], self.rest[q]
            if drop is not None:
                if self.active[q, drop]:
                    poly = poly - self.coef[:, drop]
                else:
                    rest = rest - ell0[drop]
            lo, hi = self.edges[q], self.edges[q + 1]
            stationary = cheb.chebroots(cheb.chebder(poly))
            stationary = stationary[np.abs(stationary.imag) <= 1e-9].real
            xs = np.concatenate(([lo], stationary[(stationary > lo) & (stationary < hi)], [hi]))
            vals = cheb.chebval(xs, poly) + rest
            top = vals.max()
            best = np.flatnonzero(vals >= top - 1e-12 * (1.0 + abs(top)))[0]
            out.append((float(self.theta(xs[best])), float(vals[best])))
        return out


def _build_pieces(pack: _Pack, a: float, b: float, depth: int = 0) -> list[_Piece]:
    n = INTERP_DEGREE + 1
    nodes = np.cos(np.pi * (np.arange(n) + 0.5) / n)[::-1]
    checks = 0.5 * (nodes[:-1] + nodes[1:])
    half, centre = 0.5 * (b - a), 0.5 * (a + b)
    ell = pack.logg((centre + half * nodes)[:, None])
    coef = cheb.chebfit(nodes, ell, INTERP_DEGREE)
    err = np.max(np.abs(cheb.chebval(checks, coef).T - pack.logg((centre + half * checks)[:, None])))
    if not err <= INTERP_ATOL and depth < MAX_SPLITS:
        return _build_pieces(pack, a, centre, depth + 1) + _build_pieces(pack, centre, b, depth + 1)
    return [_Piece(pack, a, b, coef)]


def _minimise(inp, pack, grid, grid_values, drop, tol, pieces, extra=()):
    """Minimise the summed min-regret, leaving out canonical position ``drop``."""
    picks = scan_candidates(grid, grid_values, n_refine=3, extra=extra)
    if picks is None:
        return inp.family.theta0, frozenset({DEGENERATE})
    hat = float(np.sum(pack.ell_hat)) - (0.0 if drop is None else float(pack.ell_hat[drop]))
    n = grid.size
    results = []
    for k in picks:
        lo, hi = max(k - 1, 0), min(k + 1, n - 1)
        results.append((float(grid[k]), float(grid_values[k])))
        for cell in range(lo, hi):
            if cell not in pieces:
                pieces[cell] = _build_pieces(pack, float(grid[cell]), float(grid[cell + 1]))
            for piece in pieces[cell]:
                results.extend((th, hat - val) for th, val in piece.maximise(pack.ell0, drop))
    res = pick_best(results, tol)
    return res.x, frozenset({NONUNIQUE}) if res.nonunique else frozenset()


def approx_code(inp: CodingInput, base: float = 2.0, tol: float = 1e-6) -> ApproxCode:
    """Single coding parameter minimising the summed min-regret over all features.

    Equivalently the maximiser of sum_j max(log g_theta(T_j), log g_theta0(T_j)),
    the constrained MLE of the alternative parameter.
    """
    order, stats, mles = _canonical(inp)
    pack = _Pack(inp.family, stats, mles)
    grid, capped = _scan(inp, pack)
    grid_values = np.sum(pack.ell_hat) - capped.sum(axis=1)
    theta, flags = _minimise(inp, pack, grid, grid_values, None, tol, {})
    codes = pack.codes([s.feature_id for s in stats], theta, base)
    by_input = [None] * len(order)
    for pos, j in enumerate(order):
        by_input[j] = codes[pos]
    return ApproxCode(float(theta), tuple(by_input), flags)


def exact_code(inp: CodingInput, base: float = 2.0, tol: float = 1e-6,
               warm_start: float | None = None) -> ExactCode:
    """Leave-one-out coding parameter for every feature.

    Each search runs the full coarse scan; ``warm_start`` (default: the
    approximate-code parameter) is added as an extra refinement candidate.
    """
    n = len(inp.stats)
    if n < 2:
        raise EmptyAfterExclusion("the exact code needs at least two features")
    order, stats, mles = _canonical(inp)
    pack = _Pack(inp.family, stats, mles)
    grid, capped = _scan(inp, pack)
    total = np.sum(pack.ell_hat) - capped.sum(axis=1)
    if warm_start is None:
        warm_start = approx_code(inp, base=base, tol=tol).theta

    thetas = np.empty(n)
    flags: list[frozenset[str]] = [frozenset()] * n
    seen: dict[tuple, tuple[float, frozenset[str]]] = {}
    pieces: dict[int, list[_Piece]] = {}
    for pos in range(n):
        s = stats[pos]
        key = (s.value, s.df, s.scale)
        if key not in seen:
            loo = total - (pack.ell_hat[pos] - capped[:, pos])
            seen[key] = _minimise(inp, pack, grid, loo, pos, tol, pieces, extra=(warm_start,))
        thetas[pos], flags[pos] = seen[key]

    codes = pack.codes([s.feature_id for s in stats], thetas, base)
    out_codes = [None] * n
    out_thetas = [0.0] * n
    out_flags = [frozenset()] * n
    for pos, j in enumerate(order):
        out_codes[j] = codes[pos]
        out_thetas[j] = float(thetas[pos])
        out_flags[j] = flags[pos]
    return ExactCode(tuple(out_thetas), tuple(out_codes), tuple(out_flags))
