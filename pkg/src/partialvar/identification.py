"""Recursive (Cholesky) identification and unit-shock normalisation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NotPositiveDefinite, ZeroDiagonal
from .estimation import check_positive_definite


def permutation_matrix(variables: Sequence[str], ordering: Sequence[str]) -> np.ndarray:
    """P with ``P @ x`` reordering a vector from ``variables`` to ``ordering``."""
    variables, ordering = list(variables), list(ordering)
    if sorted(variables) != sorted(ordering):
        raise ValueError(f"ordering {ordering} is not a permutation of {variables}")
    P = np.zeros((len(ordering), len(ordering)))
    for row, role in enumerate(ordering):
        P[row, variables.index(role)] = 1.0
    return P


@dataclass(frozen=True)
class StructuralFactor:
    """Lower-triangular impact matrix in the coordinates of ``ordering``.

    Column j is the impact of a one-standard-deviation structural shock j;
    shocks are labelled by the variable they are ordered with.
    """

    ordering: tuple[str, ...]
    b0: np.ndarray

    @property
    def shock_labels(self) -> tuple[str, ...]:
        return self.ordering

    def impact(self, variables: Sequence[str]) -> np.ndarray:
        """Impact matrix with rows in ``variables`` order and shock columns in ``ordering``."""
        return permutation_matrix(variables, self.ordering).T @ self.b0


def cholesky_identify(
    sigma_u: np.ndarray,
    ordering: Sequence[str],
    variables: Sequence[str] | None = None,
) -> StructuralFactor:
    """Factor ``P sigma_u P' = B0 B0'`` with B0 lower triangular and a positive diagonal.

    ``variables`` names the coordinates of ``sigma_u``; when omitted,
    ``sigma_u`` is taken to be ordered already.
    """
    sigma = np.asarray(sigma_u, dtype=float)
    ordering = tuple(ordering)
    if sigma.shape != (len(ordering), len(ordering)):
        raise ValueError(f"sigma_u has shape {sigma.shape}, ordering has {len(ordering)} roles")
    if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=0.0):
        raise NotPositiveDefinite("sigma_u is not symmetric")
    if variables is not None:
        P = permutation_matrix(variables, ordering)
        sigma = P @ sigma @ P.T
    check_positive_definite(sigma, "sigma_u")
    try:
        b0 = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return StructuralFactor(ordering, b0)


def unit_impulse(factor: StructuralFactor, shock_role: str, sign: int = 1) -> np.ndarray:
    """Impact vector of ``shock_role``'s shock scaled so its own variable moves by ``sign``.

    The vector is in ``factor.ordering`` coordinates.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    j = factor.ordering.index(shock_role)
    pivot = factor.b0[j, j]
    if not pivot > 0:
        raise ZeroDiagonal(f"B0 diagonal entry for {shock_role} is {pivot}")
    return sign * factor.b0[:, j] / pivot
