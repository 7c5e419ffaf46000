"""Batch aggregation: empirical CDFs, nearest-rank percentiles, and
per-policy summaries of average satisfaction across scenario batches."""

from __future__ import annotations

import math
from dataclasses import dataclass


def build_cdf(values: list[float]) -> list[tuple[float, float]]:
    """Empirical CDF as (value, cumulative probability) steps, one step per
    distinct sample value."""
    if not values:
        raise ValueError("cannot build a CDF from an empty sample")
    ordered = sorted(values)
    n = len(ordered)
    points = []
    for i, v in enumerate(ordered, start=1):
        if i == n or ordered[i] != v:
            points.append((v, i / n))
    return points


def quantile(values: list[float], p: float) -> float:
    """Nearest-rank quantile with the upper convention: index
    floor(n * p / 100), clamped to the sample.  No interpolation, so small
    batches stay exactly reproducible."""
    if not values:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0 <= p <= 100:
        raise ValueError("percentile must be in [0, 100]")
    ordered = sorted(values)
    idx = min(int(math.floor(len(ordered) * p / 100.0)), len(ordered) - 1)
    return ordered[idx]


def fraction_at_threshold(values: list[float], threshold: float) -> float:
    if not values:
        raise ValueError("empty sample")
    return sum(1 for v in values if v >= threshold) / len(values)


@dataclass(frozen=True)
class BatchSummary:
    label: str
    values: tuple[float, ...]
    cdf: tuple[tuple[float, float], ...]
    percentiles: dict[int, float]
    mean: float
    fraction_at_threshold: float
    threshold: float

    @property
    def median(self) -> float:
        return self.percentiles[50]


def summarize(label: str, values: list[float],
              threshold: float = 0.95) -> BatchSummary:
    return BatchSummary(
        label=label,
        values=tuple(values),
        cdf=tuple(build_cdf(values)),
        percentiles={p: quantile(values, p) for p in (5, 25, 50, 95)},
        mean=sum(values) / len(values),
        fraction_at_threshold=fraction_at_threshold(values, threshold),
        threshold=threshold,
    )


def percentile_gain(a: BatchSummary, b: BatchSummary, p: float) -> float:
    """Relative gain of batch a over batch b at percentile p."""
    qa = quantile(list(a.values), p)
    qb = quantile(list(b.values), p)
    if qb == 0:
        raise ValueError("undefined gain: reference quantile is zero")
    return (qa - qb) / qb
