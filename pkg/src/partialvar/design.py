"""Per-equation regressor matrices for the block-restricted VAR.

The macro equations (PRICE, POLM) regress on an intercept and lags 1..p of the
macro variables only. The sector equation (YA) adds its own lags 1..p and the
European aggregate YAEUR at lags 0..p. Regressor labels read ``"POLM.L1"``,
``"YAEUR.L0"`` and ``"const"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientSample, RankDeficient
from .ingestion import AnnualPanel
from .roles import DEFAULT_ORDER, MACRO, YA, YAEUR, parse_ordering

CRITERIA = ("AIC", "BIC", "HQ")


def lag_label(role: str, lag: int) -> str:
    return f"{role}.L{lag}"


@dataclass(frozen=True)
class EquationSpec:
    response: str
    labels: tuple[str, ...]


@dataclass(frozen=True)
class SystemSpec:
    lag_order: int = 2
    endogenous_order: tuple[str, ...] = DEFAULT_ORDER

    def __post_init__(self):
        if int(self.lag_order) < 1:
            raise ValueError("lag order must be >= 1")
        object.__setattr__(self, "lag_order", int(self.lag_order))
        object.__setattr__(self, "endogenous_order", parse_ordering(self.endogenous_order))

    @property
    def macro_roles(self) -> tuple[str, ...]:
        return tuple(r for r in self.endogenous_order if r in MACRO)

    def regressors(self, response: str) -> tuple[str, ...]:
        p = self.lag_order
        labels = ["const"]
        for role in self.macro_roles:
            labels += [lag_label(role, k) for k in range(1, p + 1)]
        if response == YA:
            labels += [lag_label(YA, k) for k in range(1, p + 1)]
            labels += [lag_label(YAEUR, k) for k in range(0, p + 1)]
        return tuple(labels)

    @property
    def equations(self) -> tuple[EquationSpec, ...]:
        return tuple(EquationSpec(r, self.regressors(r)) for r in self.endogenous_order)

    def to_dict(self) -> dict:
        return {
            "lag_order": self.lag_order,
            "endogenous_order": list(self.endogenous_order),
            "equations": {eq.response: list(eq.labels) for eq in self.equations},
        }


@dataclass(frozen=True)
class DesignMatrix:
    equation_id: str
    response: np.ndarray
    regressors: np.ndarray
    labels: tuple[str, ...]
    years: tuple[int, ...]

    @property
    def n_obs(self) -> int:
        return self.regressors.shape[0]

    @property
    def n_regressors(self) -> int:
        return self.regressors.shape[1]


def _column(label: str, data: dict[str, np.ndarray], p: int, T: int) -> np.ndarray:
    if label == "const":
        return np.ones(T - p)
    role, lag = label.split(".L")
    lag = int(lag)
    return data[role][p - lag:T - lag]


def build_system(
    panel: AnnualPanel,
    yaeur: Sequence[float],
    p: int,
    ordering: Sequence[str] = DEFAULT_ORDER,
    check_rank: bool = True,
) -> list[DesignMatrix]:
    """Build one design matrix per endogenous role, in ``ordering``.

    All equations share the effective sample ``years[p:]``.
    """
    spec = SystemSpec(p, tuple(ordering))
    T = len(panel)
    yaeur = np.asarray(yaeur, dtype=float)
    if yaeur.shape != (T,):
        raise ValueError(f"YAEUR has length {yaeur.shape}, panel has {T}")
    data = {role: panel[role] for role in spec.endogenous_order}
    data[YAEUR] = yaeur

    designs = []
    for eq in spec.equations:
        k = len(eq.labels)
        if T - p <= k:
            raise InsufficientSample(
                f"{panel.country_id}: equation {eq.response} has T_eff={T - p} <= k={k}"
            )
        X = np.column_stack([_column(lab, data, p, T) for lab in eq.labels])
        if check_rank and np.linalg.matrix_rank(X) < k:
            raise RankDeficient(f"{panel.country_id}: collinear regressors in {eq.response} equation")
        designs.append(
            DesignMatrix(eq.response, data[eq.response][p:].copy(), X, eq.labels, panel.years[p:])
        )
    return designs


def information_criterion(log_det: float, n_params: int, n_obs: int, criterion: str) -> float:
    if criterion == "AIC":
        penalty = 2.0 * n_params / n_obs
    elif criterion == "BIC":
        penalty = n_params * np.log(n_obs) / n_obs
    elif criterion == "HQ":
        penalty = 2.0 * n_params * np.log(np.log(n_obs)) / n_obs
    else:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    return log_det + penalty


def lag_order_table(
    panel: AnnualPanel,
    yaeur: Sequence[float],
    max_p: int,
    criterion: str = "BIC",
    ordering: Sequence[str] = DEFAULT_ORDER,
) -> dict[int, float]:
    """Criterion value for every feasible p in 1..max_p on a common sample.

    Every candidate is fitted on ``years[max_p:]`` so the criteria compare
    likelihoods over the same observations.
    """
    from .estimation import sur_estimate

    criterion = criterion.upper()
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    if max_p < 1:
        raise ValueError("max_p must be >= 1")
    yaeur = np.asarray(yaeur, dtype=float)
    values = {}
    for p in range(1, max_p + 1):
        start = max_p - p
        sub = panel.restrict(panel.years[start], panel.years[-1]) if start else panel
        try:
            est = sur_estimate(build_system(sub, yaeur[start:], p, ordering), warn_unstable=False)
        except (InsufficientSample, RankDeficient):
            continue
        n_params = sum(len(c) for c in est.coefficients.values())
        _, log_det = np.linalg.slogdet(est.sigma_u)
        values[p] = information_criterion(log_det, n_params, est.n_obs, criterion)
    return values


def select_lag_order(
    panel: AnnualPanel,
    yaeur: Sequence[float],
    max_p: int,
    criterion: str = "BIC",
    ordering: Sequence[str] = DEFAULT_ORDER,
) -> int:
    """Return the p in 1..max_p minimising the criterion; ties go to the smaller p."""
    values = lag_order_table(panel, yaeur, max_p, criterion, ordering)
    if not values:
        raise InsufficientSample(f"{panel.country_id}: no feasible lag order up to {max_p}")
    best = min(values)
    for p in sorted(values):
        if values[p] < values[best]:
            best = p
    return best
