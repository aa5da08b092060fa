"""Loading annual country panels from CSV and preparing them for estimation.

CSV layout: first column ``year``, one named column per series, decimal point,
no thousands separators, UTF-8. Country configurations live in a YAML file with
one block per country under a top-level ``countries`` mapping::

    countries:
      BE:
        file: BE.csv
        polm_kind: interest_rate      # or money_supply
        polm_column: rate_3m
        price_column: cpi
        output_column: ya_index
        sample_span: [1965, 1995]     # optional, defaults to the whole file
        shock_sign: 1                 # optional, derived from polm_kind
        log_transform: [PRICE, YA]    # optional, derived from polm_kind
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import BinaryIO, Iterable, Mapping, Sequence

import numpy as np
import yaml

from .errors import (
    ConfigError,
    GapInYears,
    MissingColumn,
    NoOverlap,
    NonPositiveValue,
    SelfOnly,
    TooFewObservations,
)
from .roles import POLM, PRICE, YA, canonical_role

MIN_OBSERVATIONS = 10

POLM_KINDS = ("interest_rate", "money_supply")


class MissingValue(GapInYears):
    """Empty or non-numeric cell inside the sample span."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AnnualPanel:
    country_id: str
    years: tuple[int, ...]
    series: Mapping[str, np.ndarray]

    def __post_init__(self):
        years = tuple(int(y) for y in self.years)
        if not years:
            raise TooFewObservations(f"{self.country_id}: empty panel")
        steps = np.diff(years)
        if np.any(steps != 1):
            raise GapInYears(f"{self.country_id}: years are not contiguous and increasing")
        series = {}
        for role, values in self.series.items():
            arr = _frozen(values)
            if arr.shape != (len(years),):
                raise ValueError(
                    f"{self.country_id}: series {role} has shape {arr.shape}, expected ({len(years)},)"
                )
            if not np.all(np.isfinite(arr)):
                raise MissingValue(f"{self.country_id}: series {role} contains missing values")
            series[role] = arr
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "series", MappingProxyType(series))

    def __len__(self) -> int:
        return len(self.years)

    def __getitem__(self, role: str) -> np.ndarray:
        return self.series[role]

    @property
    def span(self) -> tuple[int, int]:
        return self.years[0], self.years[-1]

    def restrict(self, first: int, last: int) -> "AnnualPanel":
        lo, hi = first - self.years[0], last - self.years[0] + 1
        if lo < 0 or hi > len(self.years) or lo >= hi:
            raise ValueError(f"{self.country_id}: span {first}-{last} outside {self.span}")
        return AnnualPanel(
            self.country_id,
            self.years[lo:hi],
            {role: values[lo:hi] for role, values in self.series.items()},
        )

    def with_series(self, **updates) -> "AnnualPanel":
        series = dict(self.series)
        series.update(updates)
        return AnnualPanel(self.country_id, self.years, series)


@dataclass(frozen=True)
class CountryConfig:
    country_id: str
    polm_kind: str = "interest_rate"
    polm_column: str = "polm"
    price_column: str = "price"
    output_column: str = "ya"
    sample_span: tuple[int, int] | None = None
    shock_sign: int | None = None
    log_transform_roles: frozenset[str] | None = None
    file: str | None = None

    def __post_init__(self):
        if self.polm_kind not in POLM_KINDS:
            raise ConfigError(f"{self.country_id}: polm_kind must be one of {POLM_KINDS}")
        if self.shock_sign is None:
            # a restrictive impulse is a rate rise or a money-supply cut
            object.__setattr__(self, "shock_sign", 1 if self.polm_kind == "interest_rate" else -1)
        if self.shock_sign not in (1, -1):
            raise ConfigError(f"{self.country_id}: shock_sign must be +1 or -1")
        if self.log_transform_roles is None:
            roles = {PRICE, YA} if self.polm_kind == "interest_rate" else {PRICE, YA, POLM}
        else:
            roles = {canonical_role(r) for r in self.log_transform_roles}
        object.__setattr__(self, "log_transform_roles", frozenset(roles))
        if self.sample_span is not None:
            first, last = (int(v) for v in self.sample_span)
            if first > last:
                raise ConfigError(f"{self.country_id}: sample_span {first}-{last} is reversed")
            object.__setattr__(self, "sample_span", (first, last))

    @property
    def columns(self) -> dict[str, str]:
        return {POLM: self.polm_column, PRICE: self.price_column, YA: self.output_column}

    def to_dict(self) -> dict:
        out = {
            "polm_kind": self.polm_kind,
            "polm_column": self.polm_column,
            "price_column": self.price_column,
            "output_column": self.output_column,
            "shock_sign": self.shock_sign,
            "log_transform": sorted(self.log_transform_roles),
        }
        if self.sample_span is not None:
            out["sample_span"] = list(self.sample_span)
        if self.file is not None:
            out["file"] = self.file
        return out

    @classmethod
    def from_dict(cls, country_id: str, block: Mapping) -> "CountryConfig":
        known = {
            "polm_kind", "polm_column", "price_column", "output_column",
            "sample_span", "shock_sign", "log_transform", "file",
        }
        unknown = set(block) - known
        if unknown:
            raise ConfigError(f"{country_id}: unknown config keys {sorted(unknown)}")
        kwargs = {k: block[k] for k in known & set(block) if k != "log_transform"}
        if "log_transform" in block:
            kwargs["log_transform_roles"] = frozenset(block["log_transform"] or ())
        if kwargs.get("sample_span") is not None:
            kwargs["sample_span"] = tuple(kwargs["sample_span"])
        try:
            return cls(country_id=str(country_id), **kwargs)
        except ValueError as exc:
            raise ConfigError(f"{country_id}: {exc}") from exc


def load_country_configs(source: str | Path | Mapping) -> list[CountryConfig]:
    """Read the ``countries`` block of a YAML config (path or parsed mapping), in file order."""
    if isinstance(source, Mapping):
        doc = source
    else:
        with open(source, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    countries = doc.get("countries")
    if not isinstance(countries, Mapping) or not countries:
        raise ConfigError("config has no 'countries' block")
    return [CountryConfig.from_dict(cid, block or {}) for cid, block in countries.items()]


def _read_text(csv_source) -> str:
    if isinstance(csv_source, (str, Path)):
        return Path(csv_source).read_text(encoding="utf-8-sig")
    if isinstance(csv_source, bytes):
        return csv_source.decode("utf-8-sig")
    data = csv_source.read()
    return data.decode("utf-8-sig") if isinstance(data, bytes) else data


def load_panel(csv_source: BinaryIO | bytes | str | Path, config: CountryConfig) -> AnnualPanel:
    """Read one country's CSV and return a panel with roles POLM, PRICE and YA.

    ``csv_source`` may be a binary stream, raw bytes or a file path.
    """
    rows = list(csv.reader(io.StringIO(_read_text(csv_source))))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise MissingColumn(f"{config.country_id}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if not header or header[0].lower() != "year":
        raise MissingColumn(f"{config.country_id}: first column must be 'year'")
    index = {}
    for role, column in config.columns.items():
        if column not in header:
            raise MissingColumn(f"{config.country_id}: column {column!r} not in {header[1:]}")
        index[role] = header.index(column)

    body = rows[1:]
    try:
        years = [int(r[0]) for r in body]
    except ValueError as exc:
        raise GapInYears(f"{config.country_id}: unparseable year ({exc})") from exc
    if not years:
        raise TooFewObservations(f"{config.country_id}: no data rows")
    if any(b - a != 1 for a, b in zip(years, years[1:])):
        raise GapInYears(f"{config.country_id}: years {years[0]}..{years[-1]} are not contiguous")

    first, last = config.sample_span or (years[0], years[-1])
    if first < years[0] or last > years[-1]:
        raise ConfigError(
            f"{config.country_id}: sample_span {first}-{last} outside file span {years[0]}-{years[-1]}"
        )
    selected = [r for r, y in zip(body, years) if first <= y <= last]
    if len(selected) < MIN_OBSERVATIONS:
        raise TooFewObservations(
            f"{config.country_id}: {len(selected)} usable rows, need {MIN_OBSERVATIONS}"
        )

    series = {}
    for role, col in index.items():
        values = []
        for r in selected:
            cell = r[col].strip() if col < len(r) else ""
            try:
                values.append(float(cell))
            except ValueError:
                raise MissingValue(
                    f"{config.country_id}: bad value {cell!r} for {role} in {r[0]}"
                ) from None
        series[role] = values
    return AnnualPanel(config.country_id, tuple(range(first, last + 1)), series)


def write_panel(panel: AnnualPanel, target, columns: Mapping[str, str] | None = None) -> None:
    """Write a panel in the ingestion CSV format; floats are written with ``repr`` precision.

    ``columns`` maps role to column name (default: the role names themselves).
    ``target`` is a path or a text stream.
    """
    columns = dict(columns or {role: role for role in panel.series})
    roles = list(columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["year"] + [columns[r] for r in roles])
    for i, year in enumerate(panel.years):
        writer.writerow([year] + [repr(float(panel.series[r][i])) for r in roles])
    if isinstance(target, (str, Path)):
        Path(target).write_text(buf.getvalue(), encoding="utf-8")
    else:
        target.write(buf.getvalue())


def build_euro_aggregate(
    panels: Iterable[AnnualPanel],
    target_country: str,
    mode: str = "exclude_self",
) -> np.ndarray:
    """Unweighted mean of member YA series over the target panel's years.

    Members are averaged year by year over those that cover that year, so a
    late-starting member only enters the years it has. Every target year must be
    covered by at least one member.
    """
    if mode not in ("exclude_self", "include_self"):
        raise ValueError(f"unknown aggregation mode {mode!r}")
    panels = list(panels)
    try:
        target = next(p for p in panels if p.country_id == target_country)
    except StopIteration:
        raise NoOverlap(f"target {target_country!r} not among the panels") from None
    members = [p for p in panels if mode == "include_self" or p.country_id != target_country]
    if not members:
        raise SelfOnly(f"{target_country}: no other country to aggregate")

    first, last = target.span
    n = len(target)
    # deviations from the first covering member keep the mean of identical series exact
    reference = np.zeros(n)
    total = np.zeros(n)
    count = np.zeros(n)
    for p in members:
        lo, hi = max(first, p.span[0]), min(last, p.span[1])
        if lo > hi:
            continue
        src = slice(lo - p.span[0], hi - p.span[0] + 1)
        dst = slice(lo - first, hi - first + 1)
        values = p[YA][src]
        fresh = count[dst] == 0
        reference[dst] = np.where(fresh, values, reference[dst])
        total[dst] += values - reference[dst]
        count[dst] += 1
    if not count.any():
        raise NoOverlap(f"{target_country}: no member overlaps {first}-{last}")
    if not count.all():
        missing = [first + i for i in np.flatnonzero(count == 0)]
        raise NoOverlap(f"{target_country}: no member covers years {missing}")
    return reference + total / count


def apply_transforms(panel: AnnualPanel, config: CountryConfig) -> AnnualPanel:
    """Replace the configured roles by their natural logs; nothing is ever differenced."""
    updates = {}
    for role in sorted(config.log_transform_roles):
        if role not in panel.series:
            continue
        values = panel[role]
        if np.any(values <= 0):
            raise NonPositiveValue(f"{panel.country_id}: cannot log non-positive {role} values")
        updates[role] = np.log(values)
    return panel.with_series(**updates) if updates else panel


def panel_from_arrays(
    country_id: str,
    first_year: int,
    columns: Mapping[str, Sequence[float]],
) -> AnnualPanel:
    n = {len(v) for v in columns.values()}
    if len(n) != 1:
        raise ValueError("all series must have the same length")
    return AnnualPanel(country_id, tuple(range(first_year, first_year + n.pop())), dict(columns))


def exp_index(values: np.ndarray, base: float = 100.0) -> np.ndarray:
    """Map log-unit model values to a positive index (inverse of the log transform up to ``ln base``)."""
    return base * np.exp(np.asarray(values, dtype=float))


__all__ = [
    "AnnualPanel",
    "CountryConfig",
    "MissingValue",
    "MIN_OBSERVATIONS",
    "apply_transforms",
    "build_euro_aggregate",
    "exp_index",
    "load_country_configs",
    "load_panel",
    "panel_from_arrays",
    "write_panel",
]

