"""OLS and Zellner SUR/FGLS estimation of the block-restricted system."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .design import DesignMatrix, SystemSpec, lag_label
from .errors import InsufficientSample, NotPositiveDefinite, NumericalError, RankDeficient
from .roles import YAEUR

PD_TOLERANCE = 1e-10


class OLSFit(NamedTuple):
    params: np.ndarray
    resid: np.ndarray


class Stability(NamedTuple):
    stable: bool
    moduli: np.ndarray


class UnstableSystemWarning(UserWarning):
    pass


def ols_estimate(design: DesignMatrix) -> OLSFit:
    X, y = design.regressors, design.response
    n, k = X.shape
    if n <= k:
        raise InsufficientSample(f"{design.equation_id}: T_eff={n} <= k={k}")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficient(f"{design.equation_id}: regressors are collinear")
    params, *_ = np.linalg.lstsq(X, y, rcond=None)
    return OLSFit(params, y - X @ params)


def check_positive_definite(matrix: np.ndarray, what: str = "matrix") -> None:
    eig = np.linalg.eigvalsh(matrix)
    if eig[-1] <= 0 or eig[0] <= PD_TOLERANCE * eig[-1]:
        raise NotPositiveDefinite(f"{what} is not positive definite (eigenvalues {eig})")


def residual_covariance(
    residuals: np.ndarray,
    divisor: str = "T",
    n_regressors: int | Sequence[int] | None = None,
) -> np.ndarray:
    """Sample covariance ``R'R / d`` of a T x m residual matrix.

    With ``divisor="T_minus_k"`` entry (i, j) is divided by
    ``sqrt((T - k_i)(T - k_j))``, where ``n_regressors`` gives k per column.
    """
    R = np.asarray(residuals, dtype=float)
    T, m = R.shape
    if T < m:
        raise InsufficientSample(f"need at least {m} residual rows, got {T}")
    cross = R.T @ R
    if divisor == "T":
        sigma = cross / T
    elif divisor == "T_minus_k":
        if n_regressors is None:
            raise ValueError("T_minus_k divisor needs n_regressors")
        k = np.broadcast_to(np.asarray(n_regressors, dtype=float), (m,))
        dof = T - k
        if np.any(dof <= 0):
            raise InsufficientSample("non-positive residual degrees of freedom")
        sigma = cross / np.sqrt(np.outer(dof, dof))
    else:
        raise ValueError(f"unknown divisor {divisor!r}")
    sigma = 0.5 * (sigma + sigma.T)
    check_positive_definite(sigma, "residual covariance")
    return sigma


def _gls(designs: Sequence[DesignMatrix], sigma: np.ndarray):
    """GLS with weight inv(sigma) kron I, assembled block by block."""
    omega = np.linalg.inv(sigma)
    m = len(designs)
    sizes = [d.n_regressors for d in designs]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    xwx = np.zeros((offsets[-1], offsets[-1]))
    xwy = np.zeros(offsets[-1])
    for i, di in enumerate(designs):
        si = slice(offsets[i], offsets[i + 1])
        for j, dj in enumerate(designs):
            sj = slice(offsets[j], offsets[j + 1])
            xwx[si, sj] = omega[i, j] * (di.regressors.T @ dj.regressors)
            xwy[si] += omega[i, j] * (di.regressors.T @ dj.response)
    beta = np.linalg.solve(xwx, xwy)
    params = [beta[offsets[i]:offsets[i + 1]] for i in range(m)]
    resid = np.column_stack([d.response - d.regressors @ b for d, b in zip(designs, params)])
    return params, resid, xwx


@dataclass(frozen=True)
class SystemEstimate:
    spec: SystemSpec
    coefficients: dict[str, np.ndarray]
    labels: dict[str, tuple[str, ...]]
    std_errors: dict[str, np.ndarray]
    residuals: np.ndarray
    sigma_u: np.ndarray
    years: tuple[int, ...]
    iterations: int = 1
    companion: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "companion", companion_matrix(self))

    @property
    def variables(self) -> tuple[str, ...]:
        return self.spec.endogenous_order

    @property
    def lag_order(self) -> int:
        return self.spec.lag_order

    @property
    def n_obs(self) -> int:
        return self.residuals.shape[0]

    def coefficient(self, equation: str, label: str) -> float:
        """Coefficient of ``label`` in ``equation``; exactly 0.0 for excluded regressors."""
        labels = self.labels[equation]
        if label not in labels:
            return 0.0
        return float(self.coefficients[equation][labels.index(label)])

    def lag_matrices(self) -> list[np.ndarray]:
        m, p = len(self.variables), self.lag_order
        mats = []
        for lag in range(1, p + 1):
            A = np.zeros((m, m))
            for i, eq in enumerate(self.variables):
                for j, var in enumerate(self.variables):
                    A[i, j] = self.coefficient(eq, lag_label(var, lag))
            mats.append(A)
        return mats

    def intercepts(self) -> np.ndarray:
        return np.array([self.coefficient(eq, "const") for eq in self.variables])

    def exogenous_loadings(self) -> np.ndarray:
        """Loadings of each equation on YAEUR lags 0..p, one row per equation."""
        p = self.lag_order
        return np.array(
            [[self.coefficient(eq, lag_label(YAEUR, k)) for k in range(p + 1)] for eq in self.variables]
        )

    def stability(self) -> Stability:
        return check_stability(self.companion)

    def to_dict(self) -> dict:
        stab = self.stability()
        return {
            "spec": self.spec.to_dict(),
            "years": [self.years[0], self.years[-1]],
            "n_obs": self.n_obs,
            "iterations": self.iterations,
            "coefficients": {
                eq: {
                    lab: {"estimate": float(c), "std_error": float(s)}
                    for lab, c, s in zip(self.labels[eq], self.coefficients[eq], self.std_errors[eq])
                }
                for eq in self.variables
            },
            "sigma_u": self.sigma_u.tolist(),
            "stable": bool(stab.stable),
            "moduli": stab.moduli.tolist(),
        }


class SURFit(NamedTuple):
    params: list[np.ndarray]
    resid: np.ndarray
    sigma_u: np.ndarray
    std_errors: list[np.ndarray]
    iterations: int


def sur_fit(
    designs: Sequence[DesignMatrix],
    iterate: bool = False,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> SURFit:
    """Two-step Zellner SUR (FGLS) for any number of equations.

    Stage one is OLS per equation, stage two GLS with weight
    ``inv(Sigma) kron I``. Sigma uses divisor T; the T - k correction only
    enters the reported standard errors. ``iterate`` repeats stage two until
    the coefficients move less than ``tol``.
    """
    designs = list(designs)
    if not designs:
        raise ValueError("no equations")
    years = designs[0].years
    if any(d.years != years for d in designs):
        raise ValueError("equations are not aligned on identical dates")

    fits = [ols_estimate(d) for d in designs]
    sigma = residual_covariance(np.column_stack([f.resid for f in fits]), "T")
    params, resid, _ = _gls(designs, sigma)
    iterations = 1
    if iterate:
        for iterations in range(2, max_iter + 1):
            sigma = residual_covariance(resid, "T")
            new_params, resid, _ = _gls(designs, sigma)
            delta = max(np.max(np.abs(a - b)) for a, b in zip(new_params, params))
            params = new_params
            if delta < tol:
                break
    sigma_u = residual_covariance(resid, "T")

    sizes = [d.n_regressors for d in designs]
    _, _, xwx = _gls(designs, residual_covariance(resid, "T_minus_k", sizes))
    se = np.sqrt(np.diag(np.linalg.inv(xwx)))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    std_errors = [se[offsets[i]:offsets[i + 1]] for i in range(len(designs))]
    return SURFit(params, resid, sigma_u, std_errors, iterations)


def _lag_order_of(designs: Sequence[DesignMatrix]) -> int:
    lags = [
        int(lab.split(".L")[1])
        for d in designs
        for lab in d.labels
        if ".L" in lab and not lab.startswith(YAEUR)
    ]
    return max(lags, default=1)


def sur_estimate(
    designs: Sequence[DesignMatrix],
    iterate: bool = False,
    max_iter: int = 100,
    tol: float = 1e-10,
    warn_unstable: bool = True,
) -> SystemEstimate:
    """SUR estimate of the partial VAR built by :func:`design.build_system`."""
    designs = list(designs)
    fit = sur_fit(designs, iterate=iterate, max_iter=max_iter, tol=tol)
    variables = tuple(d.equation_id for d in designs)
    estimate = SystemEstimate(
        spec=SystemSpec(_lag_order_of(designs), variables),
        coefficients={d.equation_id: b for d, b in zip(designs, fit.params)},
        labels={d.equation_id: d.labels for d in designs},
        std_errors={d.equation_id: s for d, s in zip(designs, fit.std_errors)},
        residuals=fit.resid,
        sigma_u=fit.sigma_u,
        years=designs[0].years,
        iterations=fit.iterations,
    )
    stab = estimate.stability()
    if warn_unstable and not stab.stable:
        warnings.warn(
            f"estimated system is not stable (max modulus {stab.moduli[0]:.4f})",
            UnstableSystemWarning,
            stacklevel=2,
        )
    return estimate


def companion_matrix(estimate: SystemEstimate) -> np.ndarray:
    """Stack A_1..A_p into the (m p) x (m p) first-order form."""
    mats = estimate.lag_matrices()
    return companion_from_lags(mats)


def companion_from_lags(mats: Sequence[np.ndarray]) -> np.ndarray:
    m, p = mats[0].shape[0], len(mats)
    comp = np.zeros((m * p, m * p))
    comp[:m, :] = np.hstack(mats)
    if p > 1:
        comp[m:, :-m] = np.eye(m * (p - 1))
    return comp


def check_stability(companion: np.ndarray) -> Stability:
    """Stable iff every eigenvalue modulus is below one; moduli sorted descending."""
    companion = np.asarray(companion, dtype=float)
    if companion.ndim != 2 or companion.shape[0] != companion.shape[1]:
        raise ValueError("companion matrix must be square")
    try:
        eig = np.linalg.eigvals(companion)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    moduli = np.sort(np.abs(eig))[::-1]
    return Stability(bool(moduli[0] < 1.0), moduli)
