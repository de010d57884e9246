"""Reading historical series, decade averaging and writing plot data.

Input CSV layout::

    # nation: USA
    # variable: gdp
    # unit: US$ per capita
    # deflation: US$ 1991
    year,value
    1946,11961.5
    ...

Metadata lines are optional. Plot data are tab separated with a ``year``
column followed by one column per label; numbers carry 17 significant
digits so that values survive a round trip exactly.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .calibration import TimeSeries, synthetic_recovery
from .dynamics import SampledPath
from .model_core import (
    CapitalParams,
    ModelConstants,
    RecoveryParams,
    capital_path,
    life_expectancy,
)

VARIABLES = ("gdp", "capital", "life_expectancy", "working_time")
WORKING_TIME_UNITS = ("hours/week", "fraction")
_META_KEYS = ("nation", "variable", "unit", "deflation")


class DataFormatError(ValueError):
    """Raised for malformed input files; the message names file and row."""


@dataclass(frozen=True)
class NationSeries:
    nation: str
    variable: str
    unit: str
    series: TimeSeries
    deflation_basis: str = ""

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown variable {self.variable!r}; expected one of {VARIABLES}")
        if self.variable == "life_expectancy" and self.unit != "years":
            raise ValueError(f"life_expectancy must be in years, got unit {self.unit!r}")
        if self.variable == "working_time" and self.unit not in WORKING_TIME_UNITS:
            raise ValueError(
                f"working_time unit must be one of {WORKING_TIME_UNITS}, got {self.unit!r}")


def _default_unit(variable):
    return {"life_expectancy": "years", "working_time": "hours/week"}.get(variable, "")


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def load_csv(path) -> NationSeries:
    """Parse a ``year,value`` file strictly; any accepted file yields a valid series."""
    path = os.fspath(path)
    meta = {}
    years, values = [], []
    seen = {}
    header_seen = False
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                body = stripped[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    key = key.strip().lower()
                    if key in _META_KEYS:
                        meta[key] = value.strip()
                continue
            cells = next(csv.reader([stripped]))
            cells = [cell.strip() for cell in cells]
            if not header_seen:
                if [cell.lower() for cell in cells] != ["year", "value"]:
                    raise DataFormatError(
                        f"{path}:{lineno}: malformed header {stripped!r}, expected 'year,value'")
                header_seen = True
                continue
            if len(cells) != 2:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 2 cells, got {len(cells)}")
            try:
                year, value = float(cells[0]), float(cells[1])
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: non-numeric cell in row {stripped!r}") from None
            if not (math.isfinite(year) and math.isfinite(value)):
                raise DataFormatError(f"{path}:{lineno}: non-finite cell in row {stripped!r}")
            if year in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate year {cells[0]} (first at line {seen[year]})")
            if years and year < years[-1]:
                raise DataFormatError(
                    f"{path}:{lineno}: year {cells[0]} is out of order after {years[-1]:g}")
            seen[year] = lineno
            years.append(year)
            values.append(value)
    if not header_seen:
        raise DataFormatError(f"{path}: missing 'year,value' header")

    variable = meta.get("variable", "gdp")
    try:
        return NationSeries(
            nation=meta.get("nation", os.path.splitext(os.path.basename(path))[0]),
            variable=variable,
            unit=meta.get("unit", _default_unit(variable)),
            series=TimeSeries(np.array(years), np.array(values)),
            deflation_basis=meta.get("deflation", ""),
        )
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_csv(data: NationSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# nation: {data.nation}\n")
        fh.write(f"# variable: {data.variable}\n")
        if data.unit:
            fh.write(f"# unit: {data.unit}\n")
        if data.deflation_basis:
            fh.write(f"# deflation: {data.deflation_basis}\n")
        fh.write("year,value\n")
        for year, value in zip(data.series.years, data.series.values):
            fh.write(f"{fmt17(year)},{fmt17(value)}\n")


def decade_average(series: TimeSeries, offset: float = 4.5) -> TimeSeries:
    """Mean value per calendar decade, labelled ``decade_start + offset``.

    The default ``offset=4.5`` places 1950-1959 at 1954.5. Decades without
    observations are left out.
    """
    if len(series) == 0:
        raise ValueError("cannot average an empty series")
    starts = np.floor(series.years / 10.0) * 10.0
    buckets = np.unique(starts)
    means = np.array([series.values[starts == b].mean() for b in buckets])
    return TimeSeries(buckets + offset, means)


def _as_columns(item):
    if isinstance(item, SampledPath):
        return item.years, item.values
    if isinstance(item, TimeSeries):
        return item.years, item.values
    if isinstance(item, NationSeries):
        return item.series.years, item.series.values
    years, values = item
    return np.asarray(years, dtype=float), np.asarray(values, dtype=float)


def export_plot_data(paths, path) -> None:
    """Write labelled series as tab-separated columns aligned on the union of years.

    ``paths`` is a sequence of ``(label, series)`` where a series is a
    :class:`TimeSeries`, :class:`SampledPath` or ``(years, values)`` pair.
    Years missing from a series leave an empty cell.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("nothing to export")
    columns = []
    all_years = set()
    for label, item in paths:
        years, values = _as_columns(item)
        columns.append((label, dict(zip(years.tolist(), values.tolist()))))
        all_years.update(years.tolist())
    with open(path, "w", newline="\n") as fh:
        fh.write("\t".join(["year"] + [label for label, _ in columns]) + "\n")
        for year in sorted(all_years):
            cells = [fmt17(year)]
            for _, mapping in columns:
                cells.append(fmt17(mapping[year]) if year in mapping else "")
            fh.write("\t".join(cells) + "\n")


def load_plot_data(path) -> dict[str, TimeSeries]:
    """Read a file written by :func:`export_plot_data`; blank cells are skipped."""
    with open(path) as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0].startswith("year"):
        raise DataFormatError(f"{path}: missing 'year' header")
    labels = lines[0].split("\t")[1:]
    cols = {label: ([], []) for label in labels}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != len(labels) + 1:
            raise DataFormatError(f"{path}:{lineno}: expected {len(labels) + 1} cells")
        year = float(cells[0])
        for label, cell in zip(labels, cells[1:]):
            if cell:
                cols[label][0].append(year)
                cols[label][1].append(float(cell))
    return {label: TimeSeries(np.array(y), np.array(v)) for label, (y, v) in cols.items()}


def write_fixtures(directory, c: ModelConstants = ModelConstants(),
                   r: RecoveryParams = RecoveryParams(),
                   cp: CapitalParams = CapitalParams(),
                   years=None) -> list[str]:
    """Write noiseless CSV fixtures generated from the closed forms.

    Produces ``synthetic_gdp.csv``, ``synthetic_capital.csv`` and
    ``synthetic_life_expectancy.csv`` (decadal) in ``directory`` and
    returns their paths. ``years`` defaults to 1946-1985 annually.
    """
    years = np.arange(1946.0, 1986.0) if years is None else np.asarray(years, dtype=float)
    decades = np.arange(1800.0, 2100.0, 10.0)
    label = f"synthetic beta={r.beta:g} tau={r.tau:g}"
    items = [
        ("synthetic_gdp.csv", NationSeries(label, "gdp", "US$ per capita",
                                           synthetic_recovery(years, c, r), "US$ 1991")),
        ("synthetic_capital.csv", NationSeries(
            label, "capital", "US$ per capita",
            TimeSeries(years, capital_path(years, c, r, cp)), "US$ 1991")),
        ("synthetic_life_expectancy.csv", NationSeries(
            "synthetic", "life_expectancy", "years",
            TimeSeries(decades, life_expectancy(decades, c)))),
    ]
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, data in items:
        target = os.path.join(directory, name)
        write_csv(data, target)
        written.append(target)
    return written
