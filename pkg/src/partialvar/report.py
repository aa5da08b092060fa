"""Cross-country assembly: rankings, classifications and summary documents."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .dynamics import MultiplierMetrics
from .errors import MissingMetric
from .fevd import FEVDReport

RANK_KEYS = ("multiplier", "speed", "partvep_at_q")


@dataclass(frozen=True)
class CountryResult:
    country_id: str
    metrics: MultiplierMetrics
    partvep: Mapping[int, float]
    moduli: tuple[float, ...]
    classification: tuple[str, str]
    atypical: bool = False
    lag_order: int | None = None
    stable: bool = True

    def to_dict(self) -> dict:
        return {
            "country": self.country_id,
            "lag_order": self.lag_order,
            "stable": self.stable,
            "moduli": list(self.moduli),
            "metrics": self.metrics.to_dict(),
            "partvep": {str(q): v for q, v in sorted(self.partvep.items())},
            "size_class": self.classification[0],
            "speed_class": self.classification[1],
            "atypical": self.atypical,
        }


def _parse_key(key: str, q: int | None) -> tuple[str, int | None]:
    if key.startswith("partvep_at_") and key != "partvep_at_q":
        return "partvep_at_q", int(key.rsplit("_", 1)[1])
    if key not in RANK_KEYS:
        raise ValueError(f"rank key must be one of {RANK_KEYS} or partvep_at_<q>")
    if key == "partvep_at_q" and q is None:
        q = 20
    return key, q


def _metric(result: CountryResult, key: str, q: int | None) -> float | None:
    if key == "multiplier":
        return result.metrics.max_abs_cumulative if result.metrics else None
    if key == "speed":
        return result.metrics.years_to_90 if result.metrics else None
    return result.partvep.get(q)


def rank_countries(results: Sequence[CountryResult], key: str, q: int | None = None) -> list[str]:
    """Country ids ordered by the key: multiplier and PARTVEP descending, speed ascending.

    Ties fall back to alphabetical order of the country id.
    """
    key, q = _parse_key(key, q)
    values = {}
    for r in results:
        v = _metric(r, key, q)
        if v is None:
            raise MissingMetric(f"{r.country_id}: no value for rank key {key}" + (f" at q={q}" if q else ""))
        values[r.country_id] = v
    if key == "speed":
        return sorted(values, key=lambda c: (values[c], c))
    return sorted(values, key=lambda c: (-values[c], c))


@dataclass(frozen=True)
class SummaryReport:
    results: tuple[CountryResult, ...]
    fevd: FEVDReport | None
    rankings: Mapping[str, list[str]]
    atypical: tuple[str, ...]
    failures: Mapping[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "countries": [r.to_dict() for r in self.results],
            "fevd": self.fevd.to_dict() if self.fevd else None,
            "rankings": dict(self.rankings),
            "atypical": list(self.atypical),
            "failures": dict(self.failures),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            ["country", "lag_order", "stable", "max_abs_cumulative", "years_to_90", "sign",
             "size_class", "speed_class", "atypical"]
        )
        for r in self.results:
            writer.writerow([
                r.country_id, r.lag_order, int(r.stable), repr(r.metrics.max_abs_cumulative),
                r.metrics.years_to_90, r.metrics.sign_of_effect, r.classification[0],
                r.classification[1], int(r.atypical),
            ])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = ["Per-country multipliers", ""]
        header = ("country", "p", "max|cum|", "yrs90", "size", "speed", "atypical")
        rows = [
            (
                r.country_id,
                str(r.lag_order),
                f"{r.metrics.max_abs_cumulative:.4f}",
                str(r.metrics.years_to_90),
                r.classification[0],
                r.classification[1],
                "yes" if r.atypical else "",
            )
            for r in self.results
        ]
        widths = [max(len(x[i]) for x in (header, *rows)) for i in range(len(header))]
        for row in (header, *rows):
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if self.fevd is not None:
            lines += ["", "Share of sector-output forecast-error variance due to policy shocks (%)", ""]
            lines += self.fevd.to_text().rstrip("\n").split("\n")
        lines += ["", "Rankings"]
        for key, order in self.rankings.items():
            lines.append(f"  {key}: {' > '.join(order)}")
        lines.append("")
        lines.append("Atypical responses: " + (", ".join(self.atypical) if self.atypical else "none"))
        if self.failures:
            lines += ["", "Failures"]
            lines += [f"  {c}: {msg}" for c, msg in sorted(self.failures.items())]
        return "\n".join(lines) + "\n"


def summary_report(
    results: Sequence[CountryResult],
    fevd: FEVDReport | None = None,
    rank_q: int = 20,
    failures: Mapping[str, str] | None = None,
) -> SummaryReport:
    results = tuple(results)
    if not results:
        raise ValueError("summary_report needs at least one result")
    rankings = {
        "multiplier": rank_countries(results, "multiplier"),
        "speed": rank_countries(results, "speed"),
    }
    if all(rank_q in r.partvep for r in results):
        rankings[f"partvep_at_{rank_q}"] = rank_countries(results, "partvep_at_q", rank_q)
    atypical = tuple(r.country_id for r in results if r.atypical)
    return SummaryReport(results, fevd, rankings, atypical, dict(failures or {}))
