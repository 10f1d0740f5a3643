"""Forecast error metrics and derived growth features.

All percentages are carried unrounded; rounding to two decimals happens
only when reports are rendered.
"""

from __future__ import annotations

from typing import Iterable

from .errors import ValidationError
from .fiscal import FiscalQuarter, quarter_add
from .series import QuarterlySeries


def ape(actual: float, forecast: float) -> float:
    """Absolute percentage error |actual - forecast| / |actual| * 100."""
    if actual == 0.0:
        raise ValidationError("APE undefined for actual = 0")
    return abs(actual - forecast) / abs(actual) * 100.0


def mape(pairs: Iterable[tuple[float, float]]) -> float:
    """Mean APE over (actual, forecast) pairs."""
    apes = [ape(a, f) for a, f in pairs]
    if not apes:
        raise ValidationError("MAPE undefined for an empty set of pairs")
    return sum(apes) / len(apes)


def relative_improvement(x: float, y: float) -> float:
    """(x - y) / x * 100: how much the candidate error y improves on baseline x.

    Positive means the candidate improved on the baseline.  Callers render
    the x = 0 case as "n/a" rather than letting the ratio blow up.
    """
    if x == 0.0:
        raise ValidationError("relative improvement undefined for zero baseline error")
    return (x - y) / x * 100.0


def yoy_growth(series: QuarterlySeries, fq: FiscalQuarter) -> float:
    """Year-over-year growth (v(fq) - v(fq-4)) / v(fq-4).

    Unit-free: scaling the series by any positive constant leaves the
    result unchanged, so indicator series need no common currency.
    """
    prev_q = quarter_add(fq, -4)
    if fq not in series or prev_q not in series:
        raise ValidationError(f"series {series.id!r} does not cover {fq} and {prev_q}")
    prev = series.value_at(prev_q)
    if prev == 0.0:
        raise ValidationError(f"series {series.id!r}: zero value at {prev_q} in YoY denominator")
    return (series.value_at(fq) - prev) / prev
