"""Command-line interface: simulate, fit, select, correlate, leadtime.

Every command is deterministic given its inputs and --seed: repeated runs
produce byte-identical CSV, JSON and SVG artifacts.  Exit codes: 0 on
success, 2 for usage errors, 3 for infeasible data or windows, 4 for
internal numerical failure.  MEDIAFLU_THREADS caps fit parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import fit as fitmod
from . import ingest, mediastats, selection, svgplot
from .epi import (
    DEFAULT_DT,
    MEDIA_KINDS,
    MEDIA_NONE,
    SEEIIR,
    VARIANTS,
    EpiParams,
    MediaFunction,
    NO_MEDIA,
    final_size,
    integrate,
)
from .errors import (
    CoverageError,
    CsvParseError,
    DuplicateKeyError,
    EmptyInputError,
    FitFailureError,
    InfeasibleInitializationError,
    InsufficientOverlapError,
    IntegrationBlowupError,
    ParameterDomainError,
    SchemaError,
    TruncatedWindowError,
)
from .observe import (
    DEFAULT_WINDOW_LENGTH,
    DEFAULT_WINDOW_OFFSET,
    KIND_ILI_PCT,
    KIND_LAB_PCT,
    KIND_RETWEET,
    apply_window,
    initial_state,
    make_window,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

SCHEMA_VERSION = "1"

#: Chart colors per model, observed data in blue.
MODEL_COLORS = {
    "observed": "#1f77b4",
    "none": "#d62728",
    "linear": "#2ca02c",
    "exponential": "#17becf",
    "inverse_quadratic": "#e377c2",
    "inverse_linear": "#bcbd22",
}

_DATA_ERRORS = (
    TruncatedWindowError,
    CoverageError,
    InsufficientOverlapError,
    InfeasibleInitializationError,
    SchemaError,
    CsvParseError,
    DuplicateKeyError,
    EmptyInputError,
    FileNotFoundError,
)
_NUMERIC_ERRORS = (IntegrationBlowupError, FitFailureError, FloatingPointError)


def thread_count() -> int:
    raw = os.environ.get("MEDIAFLU_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _season_slug(season: str) -> str:
    return season.replace("/", "-").replace(" ", "_")


def _comma_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _parse_models(text: str) -> list[str]:
    wanted = _comma_list(text)
    for name in wanted:
        if name not in MEDIA_KINDS:
            raise argparse.ArgumentTypeError(
                f"unknown model {name!r}; choose from {', '.join(MEDIA_KINDS)}"
            )
    # canonical report order regardless of how the list was written
    return [k for k in MEDIA_KINDS if k in wanted]


def _add_common(parser):
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")


def _add_fitting(parser):
    parser.add_argument("--data", required=True, help="weekly incidence CSV (season,week,value)")
    parser.add_argument("--variant", choices=VARIANTS, default=SEEIIR)
    parser.add_argument(
        "--models",
        type=_parse_models,
        default=list(MEDIA_KINDS),
        help="comma list of media functions to compare (default all five)",
    )
    parser.add_argument("--window-offset", type=int, default=DEFAULT_WINDOW_OFFSET)
    parser.add_argument("--window-length", type=int, default=DEFAULT_WINDOW_LENGTH)
    parser.add_argument("--starts", type=int, default=20, help="multi-start count")
    parser.add_argument(
        "--exclude", type=_comma_list, default=[], help="comma list of seasons to exclude"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mediaflu",
        description="Media-aware influenza transmission models: simulation, fitting, selection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the model with and without media effects")
    _add_common(sim)
    sim.add_argument("--r0", type=float, required=True)
    sim.add_argument("--inv-sigma", type=float, default=2.0, help="mean latent period, days")
    sim.add_argument("--inv-gamma", type=float, default=2.0, help="mean infectious period, days")
    sim.add_argument("--media", choices=MEDIA_KINDS, default="linear")
    sim.add_argument("--media-param", type=float, default=0.05)
    sim.add_argument("--i0-pct", type=float, default=0.01, help="initial prevalence, percent")
    sim.add_argument("--days", type=float, default=300.0)
    sim.add_argument("--dt", type=float, default=DEFAULT_DT)
    sim.add_argument("--variant", choices=VARIANTS, default=SEEIIR)
    sim.set_defaults(func=cmd_simulate)

    fit_p = sub.add_parser("fit", help="fit all models to each season and score them")
    _add_common(fit_p)
    _add_fitting(fit_p)
    fit_p.set_defaults(func=cmd_fit)

    sel = sub.add_parser("select", help="average model probabilities across seasons")
    _add_common(sel)
    _add_fitting(sel)
    sel.set_defaults(func=cmd_select)

    cor = sub.add_parser("correlate", help="retweet vs ILI regression per season")
    _add_common(cor)
    cor.add_argument("--data", required=True, help="weekly ILI CSV")
    cor.add_argument("--retweets", required=True, help="weekly retweet-proportion CSV")
    cor.add_argument(
        "--exclude", type=_comma_list, default=[], help="comma list of seasons to exclude"
    )
    cor.set_defaults(func=cmd_correlate)

    lead = sub.add_parser("leadtime", help="model probabilities vs weeks before the peak")
    _add_common(lead)
    _add_fitting(lead)
    lead.add_argument("--lead-min", type=int, default=2)
    lead.add_argument("--lead-max", type=int, default=12)
    lead.set_defaults(func=cmd_leadtime)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParameterDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_seasons(path, kind, exclude):
    table = ingest.parse_csv(path, kind)
    seasons = ingest.split_seasons(table)
    return {name: s for name, s in seasons.items() if name not in set(exclude)}


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    if args.days <= 0 or args.dt <= 0:
        raise ParameterDomainError("--days and --dt must be > 0")
    media = MediaFunction(args.media, args.media_param)
    with_media = EpiParams.from_natural(args.r0, args.inv_sigma, args.inv_gamma, media)
    without = EpiParams.from_natural(args.r0, args.inv_sigma, args.inv_gamma, NO_MEDIA)
    init = initial_state(args.i0_pct, with_media, args.variant)

    out = _out_dir(args)
    daily = max(1, int(round(1.0 / args.dt)))
    runs = {}
    for name, params in (("media", with_media), ("nomedia", without)):
        traj = integrate(params, init, args.days, args.dt)
        rows = ["t,S,E,I,R"]
        idx = range(0, len(traj), daily)
        for i in idx:
            t = traj.dt * i
            rows.append(
                f"{t:.6g},{traj.s[i]:.10g},{traj.e_total[i]:.10g},"
                f"{traj.i_total[i]:.10g},{traj.r[i]:.10g}"
            )
        (out / f"simulate_{name}.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
        runs[name] = traj

    times = tuple(float(t) for t in runs["media"].times[::daily])
    svg = svgplot.chart(
        [
            svgplot.Dataset("I (media)", times, tuple(runs["media"].i_total[::daily]), "line", "#2ca02c"),
            svgplot.Dataset("I (no media)", times, tuple(runs["nomedia"].i_total[::daily]), "line", "#d62728"),
            svgplot.Dataset("E (media)", times, tuple(runs["media"].e_total[::daily]), "line", "#98df8a"),
            svgplot.Dataset("E (no media)", times, tuple(runs["nomedia"].e_total[::daily]), "line", "#ff9896"),
        ],
        title="Effect of the media function on the outbreak",
        x_label="day",
        y_label="population proportion",
    )
    (out / "simulate.svg").write_text(svg, encoding="utf-8")

    fs_media = final_size(runs["media"]).value
    fs_plain = final_size(runs["nomedia"]).value
    print(f"final size with media: {fs_media:.6f}, without: {fs_plain:.6f}")
    return EXIT_OK


# --------------------------------------------------------------------- fit


def _fit_season(data, args, threads):
    fits = {}
    for kind in args.models:
        fits[kind] = fitmod.multi_start_fit(
            data,
            args.variant,
            kind,
            n_starts=args.starts,
            seed=args.seed,
            threads=threads,
        )
    return fits, selection.season_probabilities(fits)


def _model_report(kind, fits, scores):
    f = fits[kind]
    s = scores[kind]
    return {
        "model": kind,
        "R0": float(f.theta[0]),
        "inv_sigma_days": float(f.theta[1]),
        "inv_gamma_days": float(f.theta[2]),
        "p": None if kind == MEDIA_NONE else float(f.theta[3]),
        "rss": f.rss,
        "aicc": s.aicc,
        "weight": s.weight,
    }


def cmd_fit(args) -> int:
    seasons = _load_seasons(args.data, KIND_LAB_PCT, args.exclude)
    if not seasons:
        raise EmptyInputError("no seasons in input after exclusions")
    threads = thread_count()
    out = _out_dir(args)
    report_seasons = []
    for season in sorted(seasons):
        series = seasons[season]
        window = make_window(series, args.window_offset, args.window_length)
        data = apply_window(series, window)
        fits, scores = _fit_season(data, args, threads)

        report_seasons.append(
            {
                "season": season,
                "n": len(data),
                "window_start": window.start,
                "models": [_model_report(k, fits, scores) for k in args.models],
            }
        )

        slug = _season_slug(season)
        fitted = {
            kind: fitmod.fitted_weekly_series(
                fits[kind].theta, data, args.variant, kind
            )
            for kind in args.models
        }
        lines = ["week,observed," + ",".join(args.models)]
        for i, label in enumerate(data.week_labels):
            cells = [label, f"{data.values[i]:.10g}"]
            cells += [f"{fitted[k][i]:.10g}" for k in args.models]
            lines.append(",".join(cells))
        (out / f"fit_{slug}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

        weeks = tuple(range(window.start, window.stop))
        datasets = [
            svgplot.Dataset("observed", weeks, tuple(data.values), "markers", MODEL_COLORS["observed"])
        ]
        for kind in args.models:
            datasets.append(
                svgplot.Dataset(kind, weeks, tuple(fitted[kind]), "line", MODEL_COLORS[kind])
            )
        svg = svgplot.chart(
            datasets,
            title=f"Model fits, season {season}",
            x_label="week",
            y_label="weekly incidence (%)",
        )
        (out / f"fit_{slug}.svg").write_text(svg, encoding="utf-8")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "variant": args.variant,
        "seed": args.seed,
        "window": {"offset": args.window_offset, "length": args.window_length},
        "starts": args.starts,
        "seasons": report_seasons,
    }
    _write_json(out / "fit.json", payload)
    print(f"fit {len(report_seasons)} season(s), {len(args.models)} models each")
    return EXIT_OK


# ------------------------------------------------------------------ select


def cmd_select(args) -> int:
    seasons = _load_seasons(args.data, KIND_LAB_PCT, args.exclude)
    if not seasons:
        raise EmptyInputError("no seasons in input after exclusions")
    threads = thread_count()
    out = _out_dir(args)

    labels = sorted(seasons)
    weights = np.zeros((len(labels), len(args.models)))
    per_season = {}
    for i, season in enumerate(labels):
        series = seasons[season]
        window = make_window(series, args.window_offset, args.window_length)
        data = apply_window(series, window)
        _, scores = _fit_season(data, args, threads)
        for j, kind in enumerate(args.models):
            weights[i, j] = scores[kind].weight
        per_season[season] = {kind: scores[kind].weight for kind in args.models}

    averages = selection.average_probability(
        weights, labels, args.models, exclusions=(), seed=args.seed
    )
    if len(labels) < 2:
        print("warning: fewer than 2 seasons, confidence intervals omitted", file=sys.stderr)

    lines = ["model,mean_weight,ci_lo,ci_hi"]
    for avg in averages:
        lo = "" if avg.ci_lo is None else f"{avg.ci_lo:.6f}"
        hi = "" if avg.ci_hi is None else f"{avg.ci_hi:.6f}"
        lines.append(f"{avg.model_id},{avg.mean:.6f},{lo},{hi}")
    (out / "select.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "select",
        "variant": args.variant,
        "seed": args.seed,
        "excluded": sorted(args.exclude),
        "seasons": per_season,
        "average": [
            {
                "model": avg.model_id,
                "mean": avg.mean,
                "ci_lo": avg.ci_lo,
                "ci_hi": avg.ci_hi,
                "n_seasons": avg.n_seasons,
            }
            for avg in averages
        ],
    }
    _write_json(out / "select.json", payload)
    best = max(averages, key=lambda a: a.mean)
    print(f"highest average probability: {best.model_id} ({best.mean:.4f})")
    return EXIT_OK


# --------------------------------------------------------------- correlate


def cmd_correlate(args) -> int:
    ili = _load_seasons(args.data, KIND_ILI_PCT, args.exclude)
    retweets = _load_seasons(args.retweets, KIND_RETWEET, args.exclude)
    out = _out_dir(args)

    common = sorted(set(ili) & set(retweets))
    if not common:
        raise InsufficientOverlapError("no seasons shared by the two inputs")

    results = []
    skipped = []
    for season in common:
        try:
            paired = ingest.join_engagement(ili[season], retweets[season])
        except InsufficientOverlapError as exc:
            skipped.append({"season": season, "reason": str(exc)})
            print(f"warning: skipping {season}: {exc}", file=sys.stderr)
            continue
        if len(paired) < 5:
            skipped.append({"season": season, "reason": "fewer than 5 paired weeks"})
            print(f"warning: skipping {season}: fewer than 5 paired weeks", file=sys.stderr)
            continue
        r, p_value = mediastats.pearson(paired.ili, paired.retweets)
        lin = mediastats.ols_fit(paired.ili, paired.retweets, 1)
        quad = mediastats.ols_fit(paired.ili, paired.retweets, 2)
        p_lin, p_quad = mediastats.lin_vs_quad(paired.ili, paired.retweets)
        significant = p_value < 0.01
        results.append(
            {
                "season": season,
                "n": len(paired),
                "r": r,
                "p_value": p_value,
                "p_lin": p_lin,
                "p_quad": p_quad,
                "trend_drawn": significant,
            }
        )

        slug = _season_slug(season)
        lines = ["week,ili,retweets,residual_linear,residual_quadratic"]
        for i in range(len(paired)):
            lines.append(
                f"{i},{paired.ili[i]:.10g},{paired.retweets[i]:.10g},"
                f"{lin.residuals[i]:.10g},{quad.residuals[i]:.10g}"
            )
        (out / f"residuals_{slug}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

        datasets = [
            svgplot.Dataset(
                "weekly pairs", tuple(paired.ili), tuple(paired.retweets), "markers", "#1f77b4"
            )
        ]
        if significant:
            xs = np.linspace(paired.ili.min(), paired.ili.max(), 50)
            datasets.append(
                svgplot.Dataset(
                    "linear trend", tuple(xs), tuple(lin.predict(xs)), "line", "#d62728"
                )
            )
        svg = svgplot.chart(
            datasets,
            title=f"Retweets vs ILI, season {season}",
            x_label="ILI (% of visits)",
            y_label="retweet proportion",
        )
        (out / f"correlate_{slug}.svg").write_text(svg, encoding="utf-8")

    lines = ["season,p_lin,p_quad"]
    for row in results:
        lines.append(f"{row['season']},{row['p_lin']:.4f},{row['p_quad']:.4f}")
    (out / "correlate_weights.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "correlate",
        "seasons": results,
        "skipped": skipped,
    }
    _write_json(out / "correlate.json", payload)
    print(f"correlated {len(results)} season(s), skipped {len(skipped)}")
    return EXIT_OK


# ---------------------------------------------------------------- leadtime


def cmd_leadtime(args) -> int:
    seasons = _load_seasons(args.data, KIND_LAB_PCT, args.exclude)
    if not seasons:
        raise EmptyInputError("no seasons in input after exclusions")
    if args.lead_min < 0 or args.lead_max < args.lead_min:
        raise ParameterDomainError("need 0 <= lead-min <= lead-max")
    threads = thread_count()
    out = _out_dir(args)

    result = selection.lead_time_analysis(
        seasons,
        range(args.lead_min, args.lead_max + 1),
        media_kinds=tuple(args.models),
        variant=args.variant,
        window_length=args.window_length,
        n_starts=args.starts,
        seed=args.seed,
        threads=threads,
    )
    for season, lead, reason in result.omitted:
        print(f"warning: {season} omitted at lead {lead}: {reason}", file=sys.stderr)

    lines = ["lead_weeks,model,mean_weight"]
    for lead, kind, weight, _ in result.rows:
        lines.append(f"{lead},{kind},{weight:.6f}")
    (out / "leadtime.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    curves = {}
    for lead, kind, weight, _ in result.rows:
        curves.setdefault(kind, ([], []))
        curves[kind][0].append(lead)
        curves[kind][1].append(weight)
    datasets = []
    for kind in (MEDIA_NONE, "linear"):
        if kind in curves:
            xs, ys = curves[kind]
            datasets.append(
                svgplot.Dataset(kind, tuple(xs), tuple(ys), "line", MODEL_COLORS[kind])
            )
    svg = svgplot.chart(
        datasets,
        title="Model probability vs lead time",
        x_label="weeks before peak at window start",
        y_label="mean model probability",
    )
    (out / "leadtime.svg").write_text(svg, encoding="utf-8")
    print(f"lead-time rows: {len(result.rows)}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
