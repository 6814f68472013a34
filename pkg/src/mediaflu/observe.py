"""Observation model: weekly incidence, fit windows, initial conditions.

Surveillance data arrives as weekly percentages.  This module maps model
trajectories onto that scale (new infectious onsets per week, as percent
of the population), positions the fit window relative to the observed
peak, and rebuilds a compartment state from the first observation in a
window.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .epi import SEEIIR, SEIR, CompartmentState, EpiParams, Trajectory, peak_of
from .errors import (
    CoverageError,
    InfeasibleInitializationError,
    ModelVariantError,
    TruncatedWindowError,
)

KIND_LAB_PCT = "lab_confirmed_pct"
KIND_ILI_PCT = "ili_pct"
KIND_RETWEET = "retweet_proportion"
SERIES_KINDS = (KIND_LAB_PCT, KIND_ILI_PCT, KIND_RETWEET)

DEFAULT_WINDOW_OFFSET = -4
DEFAULT_WINDOW_LENGTH = 16


@dataclass(frozen=True)
class WeeklySeries:
    """One season of weekly observations.

    values are finite and nonnegative (percent of visits, or a retweet
    proportion).  has_gaps flags non-contiguous week indices found while
    loading; fitting is still permitted, window construction re-validates.
    """

    season: str
    week_labels: tuple
    values: np.ndarray
    kind: str
    has_gaps: bool = False

    def __post_init__(self):
        if self.kind not in SERIES_KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        labels = tuple(str(w) for w in self.week_labels)
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(labels) != vals.size:
            raise ValueError("week_labels and values must be 1-d and equally long")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if np.any(vals < 0.0):
            raise ValueError("values must be >= 0")
        vals.setflags(write=False)
        object.__setattr__(self, "week_labels", labels)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    def peak_index(self) -> int:
        return peak_of(self.values)[0]


@dataclass(frozen=True)
class FitWindow:
    """Half-open index range [peak+start_offset, peak+start_offset+length)."""

    peak_index: int
    start_offset: int = DEFAULT_WINDOW_OFFSET
    length: int = DEFAULT_WINDOW_LENGTH

    def __post_init__(self):
        if self.start_offset > 0:
            raise ValueError("start_offset must be <= 0")
        if self.length < 2:
            raise ValueError("window length must be >= 2")

    @property
    def start(self) -> int:
        return self.peak_index + self.start_offset

    @property
    def stop(self) -> int:
        return self.start + self.length


def weekly_incidence(traj: Trajectory, n_weeks: int, scale: float = 1.0) -> np.ndarray:
    """Weekly onset percentages from a trajectory starting at t=0.

    Week w covers days [7w, 7(w+1)); its value is
    scale * 100 * (onsets at 7(w+1) minus onsets at 7w).  The step size
    must divide 7 days evenly.
    """
    if scale <= 0.0:
        raise ValueError("scale must be > 0")
    if n_weeks < 1:
        raise ValueError("n_weeks must be >= 1")
    per_week = 7.0 / traj.dt
    steps_per_week = int(round(per_week))
    if abs(per_week - steps_per_week) > 1e-9 or steps_per_week < 1:
        raise ValueError(f"dt={traj.dt} does not divide 7 days evenly")
    needed = steps_per_week * n_weeks
    if len(traj) - 1 < needed:
        raise CoverageError(
            f"trajectory covers {(len(traj) - 1) * traj.dt:.6g} days, "
            f"need {7 * n_weeks}"
        )
    marks = traj.cumulative_onsets[0 : needed + 1 : steps_per_week]
    return scale * 100.0 * np.diff(marks)


def make_window(
    series: WeeklySeries,
    start_offset: int = DEFAULT_WINDOW_OFFSET,
    length: int = DEFAULT_WINDOW_LENGTH,
) -> FitWindow:
    """Position a fit window around the observed peak week.

    Raises TruncatedWindowError, carrying the largest feasible window,
    when the requested one runs off either end of the series.
    """
    peak = series.peak_index()
    window = FitWindow(peak_index=peak, start_offset=start_offset, length=length)
    if window.start < 0 or window.stop > len(series):
        fs = max(window.start, 0)
        fe = min(window.stop, len(series))
        feasible = None
        if fe - fs >= 2:
            feasible = FitWindow(peak_index=peak, start_offset=fs - peak, length=fe - fs)
        raise TruncatedWindowError(
            f"window [{window.start}, {window.stop}) exceeds series of "
            f"length {len(series)} (peak at {peak})",
            feasible=feasible,
        )
    return window


def apply_window(series: WeeklySeries, window: FitWindow) -> WeeklySeries:
    """Slice a series down to its fit window."""
    if window.start < 0 or window.stop > len(series):
        raise TruncatedWindowError("window does not fit the series")
    return replace(
        series,
        week_labels=series.week_labels[window.start : window.stop],
        values=series.values[window.start : window.stop].copy(),
    )


def initial_state(first_obs_pct: float, params: EpiParams, variant: str = SEEIIR) -> CompartmentState:
    """Compartment state implied by the first observation of a window.

    The observed percentage becomes total prevalence; the exposed pool is
    set to (gamma/sigma) times that (inflow balances outflow at the
    exposed/infectious boundary), split equally across staged
    compartments, with nobody recovered yet.  A zero observation yields
    the disease-free state.
    """
    obs = float(first_obs_pct)
    if not 0.0 <= obs < 100.0:
        raise ValueError(f"first observation must be in [0, 100), got {obs}")
    i_total = obs / 100.0
    e_total = (params.gamma / params.sigma) * i_total
    s = 1.0 - i_total - e_total
    if s <= 0.0 and i_total > 0.0:
        raise InfeasibleInitializationError(
            f"susceptible proportion {s:.6g} <= 0 for first observation {obs}%"
        )
    if variant == SEEIIR:
        return CompartmentState.seeiir(s, e_total / 2, e_total / 2, i_total / 2, i_total / 2, 0.0)
    if variant == SEIR:
        return CompartmentState.seir(s, e_total, i_total, 0.0)
    raise ModelVariantError(f"unknown variant {variant!r}")
