"""Error metrics comparing fitted weekly curves to observations.

RMS error, signed peak-timing error in weeks, signed cumulative
final-size error, Mood's median test across model populations, and the
Tukey five-number summary used for boxplots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .epi import peak_of
from .errors import UndefinedTestError


@dataclass(frozen=True)
class ErrorSummary:
    rms: float
    peak_timing_error: int
    final_size_error: float

    def __post_init__(self):
        if self.rms < 0.0:
            raise ValueError("rms must be >= 0")


def _check_lengths(model, obs):
    m = np.asarray(model, dtype=float)
    o = np.asarray(obs, dtype=float)
    if m.ndim != 1 or m.shape != o.shape:
        raise ValueError(f"series lengths differ: {m.shape} vs {o.shape}")
    if m.size == 0:
        raise ValueError("series must be non-empty")
    return m, o


def rms_error(model, obs) -> float:
    """Root-mean-square difference between two equal-length weekly series."""
    m, o = _check_lengths(model, obs)
    d = m - o
    return float(np.sqrt(np.mean(d * d)))


def peak_timing_error(model, obs) -> int:
    """Model peak week minus observed peak week (earliest index on ties)."""
    m, o = _check_lengths(model, obs)
    return peak_of(m)[0] - peak_of(o)[0]


def final_size_error(model, obs) -> float:
    """Cumulative weekly incidence of the model minus that observed."""
    m, o = _check_lengths(model, obs)
    return float(m.sum() - o.sum())


def error_summary(model, obs) -> ErrorSummary:
    return ErrorSummary(
        rms=rms_error(model, obs),
        peak_timing_error=peak_timing_error(model, obs),
        final_size_error=final_size_error(model, obs),
    )


def moods_median_test(sample_a, sample_b) -> tuple[float, float]:
    """Mood's median test: (chi-square statistic, p-value).

    Counts values strictly above versus not-above the pooled median in a
    2x2 table and refers the Pearson chi-square (1 dof, no continuity
    correction) to the chi-square tail.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.ndim != 1 or b.ndim != 1:
        raise ValueError("samples must be 1-d")
    pooled = np.concatenate([a, b])
    if pooled.size < 4:
        raise ValueError("need a combined sample of at least 4")
    if np.all(pooled == pooled[0]):
        raise UndefinedTestError("all values equal; the pooled median is degenerate")
    med = float(np.median(pooled))
    above = np.array([float(np.sum(a > med)), float(np.sum(b > med))])
    below = np.array([a.size - above[0], b.size - above[1]])
    table = np.array([above, below])
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    total = table.sum()
    if np.any(row == 0.0) or np.any(col == 0.0):
        raise UndefinedTestError("degenerate contingency table (empty row or column)")
    expected = np.outer(row, col) / total
    stat = float(((table - expected) ** 2 / expected).sum())
    p = float(gammaincc(0.5, stat / 2.0))
    return stat, p


@dataclass(frozen=True)
class BoxplotSummary:
    """Tukey summary: quartiles, adjacent-value whiskers, outliers."""

    q1: float
    median: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple


def boxplot_summary(values) -> BoxplotSummary:
    """Five-number summary with 1.5*IQR whiskers.

    Quartiles use linear interpolation between order statistics; whiskers
    sit on the most extreme points within 1.5*IQR of the quartiles and
    everything beyond is reported as an outlier.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("need a non-empty 1-d sample")
    q1, med, q3 = (float(q) for q in np.percentile(v, [25.0, 50.0, 75.0]))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = np.sort(v[(v < lo_fence) | (v > hi_fence)])
    return BoxplotSummary(
        q1=q1,
        median=med,
        q3=q3,
        whisker_lo=float(inside.min()),
        whisker_hi=float(inside.max()),
        outliers=tuple(float(x) for x in outliers),
    )
