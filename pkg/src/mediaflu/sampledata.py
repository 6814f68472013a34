"""Deterministic synthetic corpora bundled for tests and demos.

Seventeen seasons labelled 1998/99 through 2014/15, generated from the
linear-media model.  Each season is built so the default fit window
(peak-4 through peak+11) lands exactly on a segment produced by the
fitting pipeline's own observation model: the window's first value seeds
the initial state and the peak sits four weeks in.  Eight lead-in weeks
ramp geometrically into the window and six trailing weeks continue the
model's decay.  Observation noise is multiplicative and tiny (1e-5), far
below the scale at which competing media functions can imitate the
linear one, so model selection on this corpus is informative.

The 2009/10 season plays the pandemic analog (larger outbreak) and is
what the exclusion flag is for.  Retweet proportions are generated for
2009/10 onward with a linear link to ILI in most seasons and one
deliberately uncorrelated season.  Matching CSV files ship under
mediaflu/data/.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .epi import MEDIA_LINEAR, SEEIIR, EpiParams, MediaFunction, integrate, peak_of
from .ingest import DataTable, Row, write_csv
from .observe import KIND_ILI_PCT, KIND_RETWEET, initial_state, weekly_incidence

CORPUS_SEED = 19981415
SEASONS = tuple(f"{y}/{str(y + 1)[-2:]}" for y in range(1998, 2015))
PANDEMIC_SEASON = "2009/10"
RETWEET_SEASONS = tuple(f"{y}/{str(y + 1)[-2:]}" for y in range(2009, 2015))
UNCORRELATED_SEASON = "2010/11"

LEAD_WEEKS = 8
WINDOW_WEEKS = 16
TAIL_WEEKS = 6
N_WEEKS = LEAD_WEEKS + WINDOW_WEEKS + TAIL_WEEKS
PEAK_IN_WINDOW = 4
NOISE_LEVEL = 1e-5


def season_observations(
    r0: float,
    inv_sigma: float,
    inv_gamma: float,
    p_linear: float,
    first_obs_pct: float,
    n_weeks: int,
    variant: str = SEEIIR,
    dt: float = 0.1,
) -> np.ndarray:
    """Noise-free weekly percentages from the linear-media model.

    Generated through the same observation pipeline the fit uses: the
    first value seeds the initial state and anchors week zero.
    """
    params = EpiParams.from_natural(
        r0, inv_sigma, inv_gamma, MediaFunction(MEDIA_LINEAR, p_linear)
    )
    init = initial_state(first_obs_pct, params, variant)
    traj = integrate(params, init, 7.0 * n_weeks, dt)
    series = weekly_incidence(traj, n_weeks)
    series[0] = first_obs_pct
    return series


def _window_start_value(r0, inv_sigma, inv_gamma, p_linear) -> float | None:
    """First-observation value that puts the weekly peak at window index 4.

    Larger starting values pull the peak earlier; scan a seeded-free
    deterministic grid and take the middle of the matching run.
    """
    matches = []
    for v0 in np.geomspace(0.003, 2.5, 140):
        series = season_observations(
            r0, inv_sigma, inv_gamma, p_linear, v0, WINDOW_WEEKS + TAIL_WEEKS
        )
        if peak_of(series)[0] == PEAK_IN_WINDOW:
            matches.append(v0)
        elif matches:
            break
    if not matches:
        return None
    return float(matches[len(matches) // 2])


def _season_values(r0, inv_sigma, inv_gamma, p_linear, rng) -> np.ndarray | None:
    v0 = _window_start_value(r0, inv_sigma, inv_gamma, p_linear)
    if v0 is None:
        return None
    body = season_observations(
        r0, inv_sigma, inv_gamma, p_linear, v0, WINDOW_WEEKS + TAIL_WEEKS
    )
    growth = body[1] / body[0]
    if not np.isfinite(growth) or growth < 1.15:
        growth = 1.3
    lead = v0 / growth ** np.arange(LEAD_WEEKS, 0, -1)
    values = np.concatenate([lead, body])
    noise = 1.0 + NOISE_LEVEL * rng.standard_normal(values.size)
    values = values * noise
    peak = peak_of(values)[0]
    if peak != LEAD_WEEKS + PEAK_IN_WINDOW or np.any(values <= 0.0):
        return None
    return values


def synthetic_ili_corpus(seed: int = CORPUS_SEED) -> DataTable:
    """The bundled 17-season linear-media corpus (ILI percentages)."""
    rng = np.random.default_rng(seed)
    rows = []
    for season in SEASONS:
        pandemic = season == PANDEMIC_SEASON
        for _ in range(50):
            if pandemic:
                r0 = rng.uniform(1.7, 1.8)
                inv_sigma = rng.uniform(1.3, 2.0)
                inv_gamma = rng.uniform(1.8, 2.6)
                p_lin = rng.uniform(0.9, 0.97)
            else:
                r0 = rng.uniform(1.3, 1.6)
                inv_sigma = rng.uniform(1.2, 2.4)
                inv_gamma = rng.uniform(1.6, 3.0)
                p_lin = rng.uniform(0.8, 0.95)
            values = _season_values(r0, inv_sigma, inv_gamma, p_lin, rng)
            if values is not None:
                break
        else:
            raise RuntimeError(f"could not draw a feasible season for {season}")
        for week, value in enumerate(values, start=1):
            rows.append(Row(season=season, week=week, value=float(value), kind=KIND_ILI_PCT))
    return DataTable(rows=tuple(rows), source=f"synthetic:{seed}")


def synthetic_retweet_corpus(
    ili: DataTable, seed: int = CORPUS_SEED + 1
) -> DataTable:
    """Retweet proportions linked linearly to ILI for the Twitter-era seasons."""
    rng = np.random.default_rng(seed)
    by_season: dict[str, list[Row]] = {}
    for row in ili.rows:
        by_season.setdefault(row.season, []).append(row)
    rows = []
    for season in RETWEET_SEASONS:
        source = sorted(by_season.get(season, []), key=lambda r: r.week)
        if not source:
            continue
        x = np.array([r.value for r in source])
        if season == UNCORRELATED_SEASON:
            y = 0.006 + 0.002 * rng.standard_normal(x.size)
        else:
            slope = rng.uniform(0.003, 0.006)
            y = 0.003 + slope * x + 0.0006 * rng.standard_normal(x.size)
        y = np.maximum(y, 1e-5)
        for r, val in zip(source, y):
            rows.append(Row(season=season, week=r.week, value=float(val), kind=KIND_RETWEET))
    return DataTable(rows=tuple(rows), source=f"synthetic:{seed}")


def write_sample_data(out_dir) -> tuple[Path, Path]:
    """Write the bundled corpora as CSV files; returns the two paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ili = synthetic_ili_corpus()
    retweets = synthetic_retweet_corpus(ili)
    ili_path = out / "synthetic_ili.csv"
    rt_path = out / "synthetic_retweets.csv"
    write_csv(ili, ili_path)
    write_csv(retweets, rt_path)
    return ili_path, rt_path


def bundled_path(name: str = "synthetic_ili.csv") -> Path:
    """Filesystem path of a CSV shipped inside the package."""
    return Path(str(resources.files("mediaflu").joinpath("data").joinpath(name)))
