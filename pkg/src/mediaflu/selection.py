"""Model selection: AICc, Akaike weights, season averages, lead times.

Model probabilities are normalized Akaike weights: with AICc values a_i,
model i gets exp((min(a) - a_i)/2) scaled so the set sums to one.  The
parameter count handed to the criterion is the number of fitted model
parameters; the least-squares error variance adds one more inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .epi import MEDIA_KINDS, SEEIIR
from .errors import (
    ComparisonMismatchError,
    DegenerateFitError,
    EmptyInputError,
    SampleTooSmallError,
    TruncatedWindowError,
)
from .fit import FitResult, multi_start_fit
from .observe import WeeklySeries, apply_window, make_window


@dataclass(frozen=True)
class ModelScore:
    """AICc and normalized weight of one model within a comparison set."""

    model_id: str
    rss: float
    n: int
    k: int
    aicc: float
    weight: float


def aicc(rss: float, n: int, k: int) -> float:
    """AIC with the small-sample correction for a least-squares fit.

    AIC = n ln(rss/n) + 2(k+1); the +1 counts the error-variance
    parameter alongside the k fitted model parameters.  The correction
    2(k+1)(k+2)/(n-k-2) diverges as n approaches k+2, where this returns
    +inf (such a model can never be preferred).
    """
    if not math.isfinite(rss) or rss < 0.0:
        raise ValueError(f"rss must be finite and >= 0, got {rss}")
    if rss == 0.0:
        raise DegenerateFitError("rss of 0 cannot be scored (perfect fit)")
    if n <= k + 1:
        raise SampleTooSmallError(f"need n > k+1 observations, got n={n}, k={k}")
    aic = n * math.log(rss / n) + 2.0 * (k + 1)
    if n == k + 2:
        return math.inf
    return aic + 2.0 * (k + 1) * (k + 2) / (n - k - 2)


def akaike_weights(aic_values) -> np.ndarray:
    """Normalized relative likelihoods exp((AIC_min - AIC_i)/2).

    Values of +inf (or nan) get weight zero; at least one value must be
    finite.  The best model's pre-normalization likelihood is 1.
    """
    arr = np.asarray(aic_values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise EmptyInputError("need a 1-d, non-empty AIC array")
    if np.any(np.isneginf(arr)):
        raise ValueError("AIC of -inf is not comparable")
    arr = np.where(np.isnan(arr), math.inf, arr)
    finite = np.isfinite(arr)
    if not finite.any():
        raise ValueError("all AIC values are non-finite")
    rel = np.exp((arr[finite].min() - arr) / 2.0)
    return rel / rel.sum()


def season_probabilities(fits: Mapping[str, FitResult]) -> dict[str, ModelScore]:
    """Score a season's fits against each other.

    All fits must come from the same window (same n).  Keys of the input
    mapping are preserved; values become ModelScore with AICc and weight.
    """
    if not fits:
        raise EmptyInputError("no fits to compare")
    items = list(fits.items())
    n = items[0][1].n
    for name, f in items:
        if f.n != n:
            raise ComparisonMismatchError(
                f"fit {name!r} has n={f.n}, expected {n}; fits must share a window"
            )
    aiccs = [aicc(f.rss, f.n, f.k) for _, f in items]
    weights = akaike_weights(aiccs)
    return {
        name: ModelScore(
            model_id=f"{f.variant}:{f.media_kind}",
            rss=f.rss,
            n=f.n,
            k=f.k,
            aicc=aiccs[i],
            weight=float(weights[i]),
        )
        for i, (name, f) in enumerate(items)
    }


@dataclass(frozen=True)
class AverageWeight:
    """Mean selection probability of one model across seasons."""

    model_id: str
    mean: float
    ci_lo: float | None
    ci_hi: float | None
    n_seasons: int


def average_probability(
    weights: np.ndarray,
    season_labels: Sequence[str],
    model_ids: Sequence[str],
    exclusions: Iterable[str] = (),
    n_boot: int = 10000,
    seed: int = 42,
    ci_level: float = 0.95,
) -> list[AverageWeight]:
    """Per-model mean weight over seasons with percentile-bootstrap CIs.

    weights is a seasons-by-models matrix.  Excluded season labels are
    dropped before averaging.  With fewer than two included seasons the
    CI is unavailable (None) but the mean is still returned.  Intervals
    are clipped to [0, 1].
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be a seasons-by-models matrix")
    if w.shape[0] != len(season_labels) or w.shape[1] != len(model_ids):
        raise ValueError("weights shape must match the label lists")
    excluded = set(exclusions)
    keep = np.array([lbl not in excluded for lbl in season_labels], dtype=bool)
    kept = w[keep]
    n_seasons = kept.shape[0]
    if n_seasons == 0:
        raise EmptyInputError("no seasons left after exclusions")
    means = kept.mean(axis=0)

    ci_lo = ci_hi = None
    if n_seasons >= 2:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n_seasons, size=(n_boot, n_seasons))
        boot = kept[idx].mean(axis=1)
        alpha = 100.0 * (1.0 - ci_level) / 2.0
        ci_lo = np.clip(np.percentile(boot, alpha, axis=0), 0.0, 1.0)
        ci_hi = np.clip(np.percentile(boot, 100.0 - alpha, axis=0), 0.0, 1.0)

    out = []
    for j, mid in enumerate(model_ids):
        out.append(
            AverageWeight(
                model_id=str(mid),
                mean=float(means[j]),
                ci_lo=None if ci_lo is None else float(ci_lo[j]),
                ci_hi=None if ci_hi is None else float(ci_hi[j]),
                n_seasons=n_seasons,
            )
        )
    return out


@dataclass(frozen=True)
class LeadTimeResult:
    """Mean model probabilities per lead time.

    rows holds (lead_weeks, media_kind, mean_weight, n_seasons) in
    deterministic order; omitted records (season, lead, reason) for
    seasons whose shifted window did not fit.
    """

    rows: tuple
    omitted: tuple


def lead_time_analysis(
    series_by_season: Mapping[str, WeeklySeries],
    leads: Iterable[int],
    media_kinds: Sequence[str] = MEDIA_KINDS,
    variant: str = SEEIIR,
    window_length: int = 16,
    n_starts: int = 20,
    seed: int = 42,
    exclusions: Iterable[str] = (),
    dt: float = 0.1,
    threads: int = 1,
) -> LeadTimeResult:
    """Refit all models on windows starting L weeks before each peak.

    For each lead L the window covers [peak-L, peak-L+window_length); the
    default analysis corresponds to L=4.  Seasons too short for a given L
    are skipped for that L and recorded.  Mean weights are taken over the
    seasons that remain.
    """
    excluded = set(exclusions)
    seasons = sorted(k for k in series_by_season if k not in excluded)
    if not seasons:
        raise EmptyInputError("no seasons to analyze")
    rows = []
    omitted = []
    for lead in sorted(set(int(x) for x in leads)):
        if lead < 0:
            raise ValueError("lead times are nonnegative week counts")
        sums = {kind: 0.0 for kind in media_kinds}
        used = 0
        for season in seasons:
            series = series_by_season[season]
            try:
                window = make_window(series, start_offset=-lead, length=window_length)
            except TruncatedWindowError as exc:
                omitted.append((season, lead, str(exc)))
                continue
            data = apply_window(series, window)
            fits = {
                kind: multi_start_fit(
                    data, variant, kind, n_starts=n_starts, seed=seed,
                    dt=dt, threads=threads,
                )
                for kind in media_kinds
            }
            scores = season_probabilities(fits)
            for kind in media_kinds:
                sums[kind] += scores[kind].weight
            used += 1
        if used:
            for kind in media_kinds:
                rows.append((lead, kind, sums[kind] / used, used))
    return LeadTimeResult(rows=tuple(rows), omitted=tuple(omitted))
