"""Aggregation of scored questionnaires for the analytics views."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ReportError
from ..indicators import ScoredRecord

#: The six monetary items summed by the aggregate view: (key, field code).
MONETARY_ITEMS = (
    ("gross_income", "Q11.1"),
    ("facilities_value", "Q12.1"),
    ("machinery_value", "Q12.2"),
    ("animals_value", "Q12.3"),
    ("irrigation_value", "Q12.4"),
    ("total_estimated_value", "Q13.3"),
)


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary (linear-interpolation quantiles)."""

    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    @classmethod
    def of(cls, values) -> "BoxStats":
        arr = np.asarray(values, dtype=np.float64)
        if arr.size == 0:
            raise ReportError("cannot summarize an empty sample")
        lo, q1, med, q3, hi = np.percentile(arr, [0, 25, 50, 75, 100])
        return cls(float(lo), float(q1), float(med), float(q3), float(hi))


@dataclass(frozen=True)
class AggregateReport:
    """Means, monetary sums, and box statistics over a record subset."""

    count: int
    mean_indicators: tuple[float, ...]   # 21 values
    mean_subindexes: tuple[float, ...]   # 7 values
    mean_si: float
    monetary_sums: dict[str, float]      # keyed as in MONETARY_ITEMS
    box_subindexes: tuple[BoxStats, ...]
    box_si: BoxStats


def aggregate(records: list[ScoredRecord]) -> AggregateReport:
    """Unweighted means plus monetary sums over a non-empty subset."""
    if not records:
        raise ReportError("cannot aggregate an empty record set")
    ind = np.array([r.indicators.values for r in records], dtype=np.float64)
    sub = np.array([r.subindexes.values for r in records], dtype=np.float64)
    si = np.array([r.score.si for r in records], dtype=np.float64)
    sums = {}
    for key, code in MONETARY_ITEMS:
        total = 0.0
        for r in records:
            v = r.questionnaire.values.get(code)
            if v is not None:
                total += float(v)
        sums[key] = total
    return AggregateReport(
        count=len(records),
        mean_indicators=tuple(float(v) for v in ind.mean(axis=0)),
        mean_subindexes=tuple(float(v) for v in sub.mean(axis=0)),
        mean_si=float(si.mean()),
        monetary_sums=sums,
        box_subindexes=tuple(BoxStats.of(sub[:, j]) for j in range(sub.shape[1])),
        box_si=BoxStats.of(si),
    )
