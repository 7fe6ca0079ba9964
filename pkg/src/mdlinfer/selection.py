"""Two-part MDL model selection on top of the per-feature codes.

The parameter codelength comes from a two-point distribution on
{null, alternative} whose null mass is the fraction of features (all of
them, or all others) whose information for discrimination is >= 0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import expit

from .coding import FeatureCode
from .errors import EmptyAfterExclusion

LN2 = math.log(2.0)


class Scheme(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


class Smoothing(str, enum.Enum):
    OFF = "off"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class SelectionResult:
    feature_id: str
    p_null: float
    total_delta: float  # bits
    posterior_null: float
    selected: str  # "null" | "alternative"


def null_proportion(deltas: Sequence[float], exclude: int | None = None,
                    smoothing: Smoothing | str = Smoothing.OFF) -> float:
    """Fraction of the included deltas that are >= 0.

    With Laplace smoothing the count gets +1/2 and the total +1.
    """
    kept = [d for j, d in enumerate(deltas) if j != exclude]
    if not kept:
        raise EmptyAfterExclusion("no deltas left to count")
    count = sum(1 for d in kept if d >= 0)
    if Smoothing(smoothing) is Smoothing.LAPLACE:
        return (count + 0.5) / (len(kept) + 1.0)
    return count / len(kept)


def select(code: FeatureCode, p_null: float) -> SelectionResult:
    """Total information for discrimination and the posterior null probability.

    ``code`` must carry codelengths in bits.
    """
    if not 0.0 <= p_null <= 1.0:
        raise ValueError(f"p_null={p_null!r} is not a probability")
    if p_null == 1.0:
        total = math.inf
    elif p_null == 0.0:
        total = -math.inf
    else:
        total = code.delta + math.log2(p_null) - math.log2(1.0 - p_null)
    posterior = float(expit(total * LN2))
    return SelectionResult(
        feature_id=code.feature_id,
        p_null=p_null,
        total_delta=total,
        posterior_null=posterior,
        selected="null" if total >= 0 else "alternative",
    )


def run_selection(codes: Sequence[FeatureCode], scheme: Scheme | str,
                  smoothing: Smoothing | str = Smoothing.OFF) -> list[SelectionResult]:
    """Select per feature; the exact scheme counts only the other features."""
    deltas = [c.delta for c in codes]
    if Scheme(scheme) is Scheme.APPROX:
        p = null_proportion(deltas, smoothing=smoothing)
        return [select(c, p) for c in codes]
    return [select(c, null_proportion(deltas, exclude=i, smoothing=smoothing))
            for i, c in enumerate(codes)]
