"""Forecast-error variance decomposition and the policy share of sector output."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import HorizonMissing
from .roles import POLM, YA

REPORT_HORIZONS = (1, 2, 5, 10, 15, 20)


@dataclass(frozen=True)
class FEVDTable:
    """``shares[q - 1, i, j]``: share of variable i's q-step error variance due to shock j."""

    variables: tuple[str, ...]
    shocks: tuple[str, ...]
    vep: np.ndarray
    contributions: np.ndarray

    @property
    def horizons(self) -> tuple[int, ...]:
        return tuple(range(1, self.vep.shape[0] + 1))

    @property
    def shares(self) -> np.ndarray:
        return self.contributions / self.vep[:, :, None]

    def _q(self, q: int) -> int:
        if q not in self.horizons:
            raise HorizonMissing(f"horizon {q} not in 1..{len(self.horizons)}")
        return q - 1

    def share(self, target: str, shock: str, q: int) -> float:
        i, j = self.variables.index(target), self.shocks.index(shock)
        k = self._q(q)
        return float(self.contributions[k, i, j] / self.vep[k, i])

    def to_dict(self) -> dict:
        shares = self.shares
        return {
            "horizons": list(self.horizons),
            "shares": {
                target: {
                    shock: shares[:, i, j].tolist() for j, shock in enumerate(self.shocks)
                }
                for i, target in enumerate(self.variables)
            },
        }


def fevd(
    phi: np.ndarray,
    b0: np.ndarray,
    q_max: int,
    variables: Sequence[str] | None = None,
) -> FEVDTable:
    """Orthogonalised FEVD from MA matrices and an impact matrix in the same coordinates.

    With ``F_k = Phi_k B0``, the q-step error variance of variable i is
    ``sum_{k<q} sum_j F_k[i, j]^2`` and shock j contributes ``sum_{k<q} F_k[i, j]^2``.
    """
    phi = np.asarray(phi, dtype=float)
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    if phi.shape[0] < q_max:
        raise HorizonMissing(f"need Phi_0..Phi_{q_max - 1}, got {phi.shape[0]} matrices")
    m = phi.shape[1]
    labels = tuple(variables) if variables is not None else tuple(str(i) for i in range(m))
    F = phi[:q_max] @ np.asarray(b0, dtype=float)
    contributions = np.cumsum(F**2, axis=0)
    vep = contributions.sum(axis=2)
    return FEVDTable(labels, labels, vep, contributions)


def partvep(table: FEVDTable, q: int, target: str = YA, shock: str = POLM) -> float:
    """Share of ``target``'s q-step forecast-error variance due to the ``shock`` innovations."""
    return table.share(target, shock, q)


@dataclass(frozen=True)
class FEVDReport:
    horizons: tuple[int, ...]
    rows: tuple[tuple[str, tuple[float, ...]], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["country"] + [f"q{q}" for q in self.horizons])
        for country, values in self.rows:
            writer.writerow([country] + [f"{100 * v:.1f}" for v in values])
        return buf.getvalue()

    def to_text(self) -> str:
        header = ["country"] + [f"q={q}" for q in self.horizons]
        body = [[c] + [f"{100 * v:.1f}" for v in values] for c, values in self.rows]
        widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
        lines = []
        for r in [header] + body:
            cells = [r[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(r[1:], widths[1:])]
            lines.append("  ".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "horizons": list(self.horizons),
            "partvep": {country: list(values) for country, values in self.rows},
        }


def fevd_report(
    tables: Mapping[str, FEVDTable],
    horizons: Sequence[int] = REPORT_HORIZONS,
) -> FEVDReport:
    """One row per country (input order) of PARTVEP(YA, POLM, q) at each horizon.

    Values are kept at full precision; the text and CSV renderings show percentages
    with one decimal.
    """
    rows = []
    for country, table in tables.items():
        rows.append((country, tuple(partvep(table, q) for q in horizons)))
    return FEVDReport(tuple(horizons), tuple(rows))
