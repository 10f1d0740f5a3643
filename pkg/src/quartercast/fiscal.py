"""Fiscal-quarter arithmetic.

Quarters are abstract (no mapping to calendar months): a fiscal year has
four quarters and that is all the engine ever needs to know.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import CalendarUnderflowError, ValidationError

_QUARTER_RE = re.compile(r"^(?:FY)?(\d{1,6})[Qq]([1-4])$")


@dataclass(frozen=True, order=True)
class FiscalQuarter:
    """One fiscal quarter, totally ordered by (year, quarter)."""

    year: int
    quarter: int

    def __post_init__(self):
        if self.year < 1:
            raise ValidationError(f"fiscal year must be >= 1, got {self.year}")
        if self.quarter not in (1, 2, 3, 4):
            raise ValidationError(f"quarter must be in 1..4, got {self.quarter}")

    @property
    def index(self) -> int:
        """Position on the global quarter axis; consecutive quarters differ by 1."""
        return self.year * 4 + self.quarter - 1

    def __str__(self) -> str:
        return f"{self.year}Q{self.quarter}"


def quarter_add(fq: FiscalQuarter, k: int) -> FiscalQuarter:
    """Advance ``fq`` by ``k`` quarters (``k`` may be negative)."""
    idx = fq.index + k
    year, rem = divmod(idx, 4)
    if year < 1:
        raise CalendarUnderflowError(f"{fq} advanced by {k} falls before fiscal year 1")
    return FiscalQuarter(year, rem + 1)


def quarter_diff(a: FiscalQuarter, b: FiscalQuarter) -> int:
    """Number of quarters from ``b`` to ``a`` (positive when a is later)."""
    return a.index - b.index


def parse_quarter(text: str) -> FiscalQuarter:
    """Parse labels like ``2015Q3`` or ``FY2015Q3``."""
    m = _QUARTER_RE.match(text.strip())
    if m is None:
        raise ValidationError(f"cannot parse fiscal quarter from {text!r}")
    return FiscalQuarter(int(m.group(1)), int(m.group(2)))


def quarter_range(start: FiscalQuarter, end: FiscalQuarter) -> list[FiscalQuarter]:
    """All quarters from ``start`` through ``end`` inclusive."""
    if end < start:
        raise ValidationError(f"range end {end} precedes start {start}")
    return [quarter_add(start, k) for k in range(quarter_diff(end, start) + 1)]
