"""Moving-average inversion, impulse responses and multiplier metrics.

The European aggregate is held at zero deviation, so responses are partial
equilibrium with respect to YAEUR: only the endogenous lag blocks enter the
MA coefficients.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .estimation import SystemEstimate
from .identification import StructuralFactor, permutation_matrix, unit_impulse
from .roles import POLM, YA

DEFAULT_HORIZON = 20


def ma_coefficients(source, horizon: int, n_vars: int | None = None) -> np.ndarray:
    """Reduced-form MA matrices Phi_0..Phi_H as an array of shape (H+1, m, m).

    ``source`` is a :class:`SystemEstimate` or a companion matrix; for a bare
    companion ``n_vars`` gives m (default: its full size, i.e. a first-order system).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(source, SystemEstimate):
        companion, m = source.companion, len(source.variables)
    else:
        companion = np.asarray(source, dtype=float)
        m = companion.shape[0] if n_vars is None else n_vars
    n = companion.shape[0]
    phi = np.empty((horizon + 1, m, m))
    power = np.eye(n)
    for h in range(horizon + 1):
        phi[h] = power[:m, :m]
        power = companion @ power
    return phi


def reorder_phi(phi: np.ndarray, variables: Sequence[str], ordering: Sequence[str]) -> np.ndarray:
    P = permutation_matrix(variables, ordering)
    return P @ phi @ P.T


def impulse_response(phi: np.ndarray, impulse: np.ndarray, horizon: int | None = None) -> np.ndarray:
    """Paths ``Phi_h @ impulse``; row h holds every variable's response at horizon h."""
    phi = np.asarray(phi)
    if horizon is not None:
        phi = phi[: horizon + 1]
    return phi @ np.asarray(impulse, dtype=float)


@dataclass(frozen=True)
class IRFBundle:
    variables: tuple[str, ...]
    phi: np.ndarray
    responses: Mapping[str, np.ndarray]
    cumulative: Mapping[str, np.ndarray]
    signs: Mapping[str, int]

    @property
    def horizon(self) -> int:
        return self.phi.shape[0] - 1

    def path(self, shock: str, variable: str, cumulative: bool = False) -> np.ndarray:
        source = self.cumulative if cumulative else self.responses
        return source[shock][:, self.variables.index(variable)]

    def tidy_rows(self, country: str) -> list[tuple]:
        rows = []
        for shock in self.variables:
            for j, var in enumerate(self.variables):
                for h in range(self.horizon + 1):
                    rows.append(
                        (country, shock, var, h, self.responses[shock][h, j], self.cumulative[shock][h, j])
                    )
        return rows


def compute_irfs(
    source,
    factor: StructuralFactor,
    horizon: int = DEFAULT_HORIZON,
    signs: Mapping[str, int] | None = None,
    variables: Sequence[str] | None = None,
) -> IRFBundle:
    """Unit-normalised responses to every structural shock, in ``factor.ordering`` coordinates.

    ``source`` is a :class:`SystemEstimate`, or a companion matrix whose leading
    block is in ``variables`` order (default ``factor.ordering``).
    """
    signs = {role: int((signs or {}).get(role, 1)) for role in factor.ordering}
    if isinstance(source, SystemEstimate):
        variables = source.variables
    elif variables is None:
        variables = factor.ordering
    phi = ma_coefficients(source, horizon, n_vars=len(factor.ordering))
    phi = reorder_phi(phi, variables, factor.ordering)
    responses, cumulative = {}, {}
    for role in factor.ordering:
        paths = impulse_response(phi, unit_impulse(factor, role, signs[role]))
        responses[role] = paths
        cumulative[role] = np.cumsum(paths, axis=0)
    return IRFBundle(factor.ordering, phi, responses, cumulative, signs)


def irf_csv(bundles: Mapping[str, IRFBundle]) -> str:
    """Tidy CSV text: country, shock, variable, horizon, response, cumulative."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["country", "shock", "variable", "horizon", "response", "cumulative"])
    for country, bundle in bundles.items():
        for c, shock, var, h, r, cum in bundle.tidy_rows(country):
            writer.writerow([c, shock, var, h, repr(float(r)), repr(float(cum))])
    return buf.getvalue()


@dataclass(frozen=True)
class MultiplierMetrics:
    max_abs_cumulative: float
    years_to_90: int
    sign_of_effect: int
    horizon: int
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "max_abs_cumulative": self.max_abs_cumulative,
            "years_to_90": self.years_to_90,
            "sign_of_effect": self.sign_of_effect,
            "horizon": self.horizon,
            "degenerate": self.degenerate,
        }


def multiplier_metrics(cumulative_path: Sequence[float], share: float = 0.9) -> MultiplierMetrics:
    """Extremal absolute cumulative effect and the first horizon reaching ``share`` of it.

    Ties between equal extrema resolve to the earliest horizon. An all-zero path
    yields zero metrics with ``degenerate=True``.
    """
    path = np.asarray(cumulative_path, dtype=float)
    if path.size == 0:
        raise ValueError("empty cumulative path")
    horizon = path.size - 1
    absolute = np.abs(path)
    peak = int(np.argmax(absolute))
    max_abs = float(absolute[peak])
    if max_abs == 0.0:
        return MultiplierMetrics(0.0, 0, 1, horizon, degenerate=True)
    years = int(np.flatnonzero(absolute >= share * max_abs)[0])
    return MultiplierMetrics(max_abs, years, 1 if path[peak] > 0 else -1, horizon)


@dataclass(frozen=True)
class Thresholds:
    """Class cutoffs: size by ``max_abs_cumulative``, speed by ``years_to_90``.

    weak: size <= weak_max; strong: size > medium_max; fast: years <= fast_max;
    slow: years > medium_speed_max.
    """

    weak_max: float = 0.02
    medium_max: float = 0.06
    fast_max: int = 4
    medium_speed_max: int = 10

    def __post_init__(self):
        if not (0 <= self.weak_max <= self.medium_max):
            raise ValueError("size thresholds must satisfy 0 <= weak_max <= medium_max")
        if not (0 <= self.fast_max <= self.medium_speed_max):
            raise ValueError("speed thresholds must satisfy 0 <= fast_max <= medium_speed_max")

    @classmethod
    def from_dict(cls, block: Mapping | None) -> "Thresholds":
        return cls(**dict(block or {}))

    def to_dict(self) -> dict:
        return {
            "weak_max": self.weak_max,
            "medium_max": self.medium_max,
            "fast_max": self.fast_max,
            "medium_speed_max": self.medium_speed_max,
        }


def classify_sensitivity(metrics: MultiplierMetrics, thresholds: Thresholds = Thresholds()) -> tuple[str, str]:
    size = metrics.max_abs_cumulative
    if size <= thresholds.weak_max:
        size_class = "weak"
    elif size <= thresholds.medium_max:
        size_class = "medium"
    else:
        size_class = "strong"
    years = metrics.years_to_90
    if years <= thresholds.fast_max:
        speed_class = "fast"
    elif years <= thresholds.medium_speed_max:
        speed_class = "medium"
    else:
        speed_class = "slow"
    return size_class, speed_class


def ya_policy_metrics(bundle: IRFBundle, share: float = 0.9) -> MultiplierMetrics:
    return multiplier_metrics(bundle.path(POLM, YA, cumulative=True), share)


def changes_sign(path: Sequence[float], start: int = 1, rel_tol: float = 0.05) -> bool:
    """True when the path crosses zero at or after ``start``.

    Entries smaller than ``rel_tol`` times the path's largest magnitude are
    skipped, so a decayed tail wobbling around zero is not a reversal.
    """
    path = np.asarray(path, dtype=float)
    scale = np.max(np.abs(path)) if path.size else 0.0
    if scale == 0.0:
        return False
    signs = [np.sign(v) for v in path[start:] if abs(v) > rel_tol * scale]
    return any(a != b for a, b in zip(signs, signs[1:]))
