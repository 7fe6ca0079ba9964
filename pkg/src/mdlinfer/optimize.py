"""Derivative-free 1-D minimisation: coarse scan, then golden-section polish."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import OptimizerFailure

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Objective values this close (relative) count as a tie between basins.
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ScanResult:
    x: float
    fun: float
    nonunique: bool = False
    flat: bool = False


def golden_section(f: Callable[[float], float], lo: float, hi: float,
                   tol: float = 1e-6, max_iter: int = 200,
                   f_lo: float | None = None, f_hi: float | None = None) -> tuple[float, float]:
    """Minimise ``f`` on ``[lo, hi]`` until the bracket is narrower than ``tol``.

    Returns the best of the interior point and the two original endpoints,
    so a minimum sitting on a boundary is returned exactly. Endpoint values
    already known to the caller can be passed in.
    """
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    x_mid, f_mid = (c, fc) if fc <= fd else (d, fd)
    best = (f(lo) if f_lo is None else f_lo, lo)
    for fx, x in ((f_mid, x_mid), (f(hi) if f_hi is None else f_hi, hi)):
        if fx < best[0]:
            best = (fx, x)
    return best[1], best[0]


def log_grid(upper: float, n: int, lower: float = 0.0, smallest: float = 1e-3) -> np.ndarray:
    """``lower`` followed by ``n - 1`` log-spaced points up to ``upper``."""
    span = np.logspace(math.log10(smallest), math.log10(upper - lower), n - 1)
    return np.concatenate(([lower], lower + span))


def symmetric_grid(upper: float, n: int, smallest: float = 1e-3) -> np.ndarray:
    """Log-spaced points mirrored about zero, zero included."""
    half = np.logspace(math.log10(smallest), math.log10(upper), (n - 1) // 2)
    return np.concatenate((-half[::-1], [0.0], half))


def scan_candidates(grid: np.ndarray, fv: np.ndarray, n_refine: int = 3,
                    extra: Sequence[float] = ()) -> list[int] | None:
    """Grid indices whose neighbouring cells deserve refinement.

    The lowest ``n_refine`` local minima of the scan are kept; one other than
    the best is only kept when the rise to its higher neighbour exceeds its
    gap to the best scan value, i.e. when a dip inside its cells could
    plausibly undercut the best point. The cell holding each ``extra``
    warm-start point is added. Returns ``None`` when the scan is flat.
    """
    finite = np.isfinite(fv)
    if not finite.any():
        raise OptimizerFailure("objective is not finite anywhere on the scan grid")
    fv = np.where(finite, fv, np.inf)
    lowest = fv.min()
    if np.all(np.abs(fv - lowest) <= TIE_RTOL * (1.0 + abs(lowest))):
        return None
    n = grid.size
    left = np.r_[np.inf, fv[:-1]]
    right = np.r_[fv[1:], np.inf]
    minima = np.flatnonzero((fv <= left) & (fv <= right) & finite)
    # plateaus produce runs of "minima"; keep the first of each run
    minima = minima[np.r_[True, np.diff(minima) > 1]]
    picks: list[int] = []
    for k in minima[np.argsort(fv[minima], kind="stable")][:n_refine]:
        rise = max(fv[max(k - 1, 0)], fv[min(k + 1, n - 1)]) - fv[k]
        if fv[k] - lowest <= rise or not picks:
            picks.append(int(k))
    for x in extra:
        cell = int(np.clip(np.searchsorted(grid, x), 1, n - 1))
        k = cell if fv[cell] <= fv[cell - 1] else cell - 1
        if k not in picks:
            picks.append(k)
    return picks


def pick_best(results: Iterable[tuple[float, float]], tol: float) -> ScanResult:
    """Lowest (x, f) pair; ties within ``TIE_RTOL`` go to the smallest x."""
    ranked = sorted(results, key=lambda r: (r[1], r[0]))
    best_f = ranked[0][1]
    tied = [r for r in ranked if r[1] - best_f <= TIE_RTOL * (1.0 + abs(best_f))]
    x_best = min(r[0] for r in tied)
    nonunique = any(abs(r[0] - x_best) > 10.0 * tol for r in tied)
    fx_best = next(r[1] for r in tied if r[0] == x_best)
    return ScanResult(x_best, fx_best, nonunique=nonunique)


def scan_minimize(f: Callable[[float], float], grid: Sequence[float],
                  values: Iterable[float] | None = None, *, tol: float = 1e-6,
                  n_refine: int = 3, extra: Sequence[float] = ()) -> ScanResult:
    """Minimise ``f`` over the span of ``grid``.

    Every grid point is evaluated (or taken from ``values``); the cells chosen
    by ``scan_candidates`` are polished by golden section over the two grid
    cells around each pick. Among results tied within ``TIE_RTOL`` the
    smallest abscissa wins and ``nonunique`` is set. ``flat`` is set when the
    whole scan is constant, in which case the first grid point is returned.
    """
    grid = np.asarray(grid, dtype=float)
    fv = np.array([f(x) for x in grid] if values is None else list(values), dtype=float)
    picks = scan_candidates(grid, fv, n_refine, extra)
    if picks is None:
        return ScanResult(float(grid[0]), float(fv[0]), flat=True)
    n = grid.size
    results = []
    for k in picks:
        i_lo, i_hi = max(k - 1, 0), min(k + 1, n - 1)
        x, fx = golden_section(f, float(grid[i_lo]), float(grid[i_hi]), tol=tol,
                               f_lo=float(fv[i_lo]), f_hi=float(fv[i_hi]))
        if fv[k] < fx:
            x, fx = float(grid[k]), float(fv[k])
        results.append((x, fx))
    return pick_best(results, tol)
