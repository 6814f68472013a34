"""CSV ingestion of weekly surveillance and engagement data.

The normative file schema: UTF-8, comma-delimited, '.' decimal point,
header row exactly `season,week,value`.  Blank lines and lines starting
with '#' are skipped.  The week column is an integer index that orders
observations within a season; labels stay opaque strings elsewhere.
A mapping guide for CDC FluView exports lives in the README.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    CsvParseError,
    DuplicateKeyError,
    InsufficientOverlapError,
    SchemaError,
)
from .mediastats import PairedSeries
from .observe import SERIES_KINDS, WeeklySeries

HEADER = ("season", "week", "value")


class Row(NamedTuple):
    season: str
    week: int
    value: float
    kind: str


@dataclass(frozen=True)
class DataTable:
    """Validated rows of (season, week, value, kind)."""

    rows: tuple
    source: str = ""

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            key = (row.season, row.week, row.kind)
            if key in seen:
                raise DuplicateKeyError(f"duplicate key {key}")
            seen.add(key)
            if not (row.value == row.value and abs(row.value) != float("inf")):
                raise ValueError(f"non-finite value in {key}")
            if row.value < 0.0:
                raise ValueError(f"negative value in {key}")

    def __len__(self) -> int:
        return len(self.rows)

    def seasons(self) -> list[str]:
        out = []
        for row in self.rows:
            if row.season not in out:
                out.append(row.season)
        return sorted(out)


def parse_csv(path, kind: str) -> DataTable:
    """Read a season/week/value file into a DataTable.

    Errors cite the 1-based line number of the offending row.
    """
    if kind not in SERIES_KINDS:
        raise ValueError(f"unknown series kind {kind!r}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return _parse_stream(fh, kind, source=str(path))


def parse_csv_text(text: str, kind: str) -> DataTable:
    """parse_csv for in-memory content (used by tests and sample data)."""
    if kind not in SERIES_KINDS:
        raise ValueError(f"unknown series kind {kind!r}")
    return _parse_stream(io.StringIO(text), kind, source="<string>")


def _parse_stream(fh, kind: str, source: str) -> DataTable:
    rows = []
    seen = set()
    header_done = False
    for lineno, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = next(csv.reader([line]))
        if not header_done:
            if tuple(f.strip() for f in fields) != HEADER:
                raise SchemaError(
                    f"expected header 'season,week,value', got {line!r}", line=lineno
                )
            header_done = True
            continue
        if len(fields) != 3:
            raise CsvParseError(f"expected 3 fields, got {len(fields)}", line=lineno)
        season = fields[0].strip()
        if not season:
            raise CsvParseError("empty season label", line=lineno)
        try:
            week = int(fields[1])
        except ValueError:
            raise CsvParseError(f"week {fields[1]!r} is not an integer", line=lineno) from None
        try:
            value = float(fields[2])
        except ValueError:
            raise CsvParseError(f"value {fields[2]!r} is not a number", line=lineno) from None
        if value != value or value in (float("inf"), float("-inf")):
            raise CsvParseError(f"value {fields[2]!r} is not finite", line=lineno)
        if value < 0.0:
            raise CsvParseError(f"value {value} is negative", line=lineno)
        key = (season, week)
        if key in seen:
            raise DuplicateKeyError(f"line {lineno}: duplicate key {key}")
        seen.add(key)
        rows.append(Row(season=season, week=week, value=value, kind=kind))
    if not header_done:
        raise SchemaError("file has no header row")
    return DataTable(rows=tuple(rows), source=source)


def write_csv(table: DataTable, path) -> None:
    """Serialize a table back to the input schema (round-trip safe)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HEADER)
        for row in table.rows:
            writer.writerow([row.season, row.week, repr(row.value)])


def table_to_text(table: DataTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(HEADER)
    for row in table.rows:
        writer.writerow([row.season, row.week, repr(row.value)])
    return buf.getvalue()


def split_seasons(table: DataTable) -> dict[str, WeeklySeries]:
    """One WeeklySeries per season, weeks sorted ascending.

    Non-contiguous week indices set has_gaps on the affected series;
    fitting remains permitted and window construction re-validates.
    """
    by_season: dict[str, list[Row]] = {}
    for row in table.rows:
        by_season.setdefault(row.season, []).append(row)
    out = {}
    for season in sorted(by_season):
        rows = sorted(by_season[season], key=lambda r: r.week)
        weeks = [r.week for r in rows]
        gaps = any(b - a != 1 for a, b in zip(weeks, weeks[1:]))
        out[season] = WeeklySeries(
            season=season,
            week_labels=tuple(str(w) for w in weeks),
            values=[r.value for r in rows],
            kind=rows[0].kind,
            has_gaps=gaps,
        )
    return out


def join_engagement(ili: WeeklySeries, retweets: WeeklySeries) -> PairedSeries:
    """Inner join of an ILI series and a retweet series on (season, week).

    Requires at least 3 overlapping weeks.
    """
    if ili.season != retweets.season:
        raise InsufficientOverlapError(
            f"seasons differ: {ili.season!r} vs {retweets.season!r}"
        )
    rt_index = {lbl: i for i, lbl in enumerate(retweets.week_labels)}
    xs, ys = [], []
    for i, lbl in enumerate(ili.week_labels):
        j = rt_index.get(lbl)
        if j is not None:
            xs.append(ili.values[i])
            ys.append(retweets.values[j])
    if len(xs) < 3:
        raise InsufficientOverlapError(
            f"only {len(xs)} overlapping weeks between the series; need >= 3"
        )
    return PairedSeries(season=ili.season, ili=xs, retweets=ys)
