"""Synthetic data: a parametric partial-VAR generator and a sector supply/demand model.

The VAR generator is the oracle for the estimators. The sector model gives the
sign implications of monetary policy for a small sector: supply rises with the
output price and falls with every input price (interest-sensitive inputs,
imported inputs, other inputs); demand rises with national income and falls with
the sector's relative price. Both are linear, so equilibria are closed-form and
the channel decomposition of a policy shock is exact.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np
import yaml

from .errors import ExplosiveDGP, NoEquilibrium
from .estimation import companion_from_lags
from .ingestion import AnnualPanel, CountryConfig, exp_index, write_panel
from .roles import DEFAULT_ORDER, MACRO, POLM, PRICE, YA, YAEUR, parse_ordering

BURN_IN = 100


# ---------------------------------------------------------------------------
# partial-VAR data-generating process


@dataclass(frozen=True)
class DriverSpec:
    """AR(1) for the exogenous European aggregate; ``persistence=1`` gives a random walk with drift."""

    mean: float = 0.0
    persistence: float = 0.7
    sigma: float = 1.0
    drift: float = 0.0

    def step(self, previous: float, shock: float) -> float:
        return (
            self.drift
            + self.persistence * previous
            + (1.0 - self.persistence) * self.mean
            + self.sigma * shock
        )


@dataclass(frozen=True)
class DGPSpec:
    lags: tuple[np.ndarray, ...]
    intercepts: np.ndarray
    b0: np.ndarray
    yaeur_loadings: np.ndarray
    driver: DriverSpec = DriverSpec()
    variables: tuple[str, ...] = DEFAULT_ORDER
    seed: int = 0
    allow_explosive: bool = False

    def __post_init__(self):
        variables = parse_ordering(self.variables)
        lags = tuple(np.array(a, dtype=float) for a in self.lags)
        m = len(variables)
        if not lags:
            raise ValueError("at least one lag matrix is required")
        for a in lags:
            if a.shape != (m, m):
                raise ValueError(f"lag matrices must be {m}x{m}")
            a.setflags(write=False)
        ya = variables.index(YA)
        for role in MACRO:
            i = variables.index(role)
            if any(a[i, ya] != 0.0 for a in lags):
                raise ValueError(f"{role} equation must not load on lagged YA")
        b0 = np.array(self.b0, dtype=float)
        if b0.shape != (m, m) or np.any(np.triu(b0, 1) != 0.0):
            raise ValueError("b0 must be lower triangular")
        loadings = np.array(self.yaeur_loadings, dtype=float)
        if loadings.shape != (len(lags) + 1,):
            raise ValueError(f"yaeur_loadings must cover lags 0..{len(lags)}")
        intercepts = np.array(self.intercepts, dtype=float)
        if intercepts.shape != (m,):
            raise ValueError("one intercept per variable")
        driver = self.driver if isinstance(self.driver, DriverSpec) else DriverSpec(**self.driver)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "yaeur_loadings", loadings)
        object.__setattr__(self, "intercepts", intercepts)
        object.__setattr__(self, "driver", driver)

    @property
    def lag_order(self) -> int:
        return len(self.lags)

    @property
    def companion(self) -> np.ndarray:
        return companion_from_lags(self.lags)

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.companion))))

    @property
    def sigma_u(self) -> np.ndarray:
        return self.b0 @ self.b0.T

    def coefficient_table(self) -> dict[str, dict[str, float]]:
        """True free coefficients keyed like the estimator's labels."""
        from .design import SystemSpec, lag_label

        spec = SystemSpec(self.lag_order, self.variables)
        table = {}
        for i, eq in enumerate(self.variables):
            row = {}
            for label in spec.regressors(eq):
                if label == "const":
                    row[label] = float(self.intercepts[i])
                    continue
                role, lag = label.split(".L")
                if role == YAEUR:
                    row[label] = float(self.yaeur_loadings[int(lag)]) if eq == YA else 0.0
                else:
                    row[label] = float(self.lags[int(lag) - 1][i, self.variables.index(role)])
            table[eq] = row
        return table

    def stationary_mean(self) -> np.ndarray:
        """Unconditional mean of the endogenous block given the driver's mean."""
        m = len(self.variables)
        driver_mean = self.driver.mean if self.driver.persistence < 1 else 0.0
        forcing = self.intercepts.copy()
        forcing[self.variables.index(YA)] += self.yaeur_loadings.sum() * driver_mean
        return np.linalg.solve(np.eye(m) - sum(self.lags), forcing)

    def to_dict(self) -> dict:
        return {
            "variables": list(self.variables),
            "lags": [a.tolist() for a in self.lags],
            "intercepts": self.intercepts.tolist(),
            "b0": self.b0.tolist(),
            "yaeur_loadings": self.yaeur_loadings.tolist(),
            "driver": asdict(self.driver),
            "seed": self.seed,
            "allow_explosive": self.allow_explosive,
        }

    @classmethod
    def from_dict(cls, block: Mapping) -> "DGPSpec":
        block = dict(block)
        block["lags"] = tuple(block["lags"])
        if "driver" in block:
            block["driver"] = DriverSpec(**block["driver"])
        if "variables" in block:
            block["variables"] = tuple(block["variables"])
        return cls(**block)


@dataclass(frozen=True)
class SimulatedPanel:
    panel: AnnualPanel
    dgp: DGPSpec
    structural_shocks: np.ndarray = field(repr=False)


def _check_explosive(dgp: DGPSpec, label: str = "DGP") -> None:
    if not dgp.allow_explosive and dgp.spectral_radius >= 1.0:
        raise ExplosiveDGP(f"{label}: spectral radius {dgp.spectral_radius:.4f} >= 1")


def simulate_var(
    dgp: DGPSpec,
    T: int,
    seed: int | None = None,
    burn_in: int = BURN_IN,
    start_year: int = 1,
    country_id: str = "SIM",
) -> SimulatedPanel:
    """Draw T periods (after ``burn_in`` discarded ones) from the partial VAR.

    Structural shocks are standard normal and enter through ``dgp.b0``; the
    European aggregate follows ``dgp.driver``. The panel carries PRICE, POLM,
    YA and YAEUR in model units.
    """
    if T < 50:
        raise ValueError("simulate_var needs T >= 50")
    _check_explosive(dgp)
    rng = np.random.default_rng(dgp.seed if seed is None else seed)
    m, p = len(dgp.variables), dgp.lag_order
    n = burn_in + T
    w = rng.standard_normal((n, m))
    driver_shocks = rng.standard_normal(n)
    ya = dgp.variables.index(YA)

    start = dgp.stationary_mean() if dgp.spectral_radius < 1 else np.zeros(m)
    d0 = dgp.driver.mean if dgp.driver.persistence < 1 else 0.0
    x = np.tile(start, (n + p, 1))
    d = np.full(n + p, d0)
    for t in range(p, n + p):
        d[t] = dgp.driver.step(d[t - 1], driver_shocks[t - p])
        value = dgp.intercepts + dgp.b0 @ w[t - p]
        for j, a in enumerate(dgp.lags, start=1):
            value = value + a @ x[t - j]
        value[ya] += dgp.yaeur_loadings @ d[t - p:t + 1][::-1]
        x[t] = value
    keep = slice(p + burn_in, n + p)
    series = {role: x[keep, i] for i, role in enumerate(dgp.variables)}
    series[YAEUR] = d[keep]
    panel = AnnualPanel(country_id, tuple(range(start_year, start_year + T)), series)
    return SimulatedPanel(panel, dgp, w[burn_in:])


def simulate_study(
    dgps: Mapping[str, DGPSpec],
    T: int,
    seed: int,
    burn_in: int = BURN_IN,
    start_year: int = 1,
) -> dict[str, AnnualPanel]:
    """Jointly simulate several countries whose YA loads on the lagged mean of the others' YA.

    Each country's aggregate is the mean of the other countries' YA, which is
    what ``build_euro_aggregate(..., "exclude_self")`` reconstructs from the
    emitted panels. Contemporaneous loadings must be zero so the aggregate stays
    predetermined. Panels are returned in model units with YAEUR attached.
    """
    countries = list(dgps)
    if len(countries) < 2:
        raise ValueError("a study needs at least two countries")
    for c in countries:
        _check_explosive(dgps[c], c)
        if dgps[c].yaeur_loadings[0] != 0.0:
            raise ValueError(f"{c}: contemporaneous YAEUR loading must be zero in a joint study")
    rng = np.random.default_rng(seed)
    n = burn_in + T
    p = max(d.lag_order for d in dgps.values())
    C = len(countries)
    m = 3
    shocks = rng.standard_normal((C, n, m))
    state = np.zeros((C, n + p, m))
    for ci, c in enumerate(countries):
        state[ci, :p] = dgps[c].stationary_mean()
    ya_idx = [dgps[c].variables.index(YA) for c in countries]
    agg = np.zeros((C, n + p))

    def others_mean(s):
        ya_s = np.array([state[ci, s, ya_idx[ci]] for ci in range(C)])
        return (ya_s.sum() - ya_s) / (C - 1)

    for s in range(p):
        agg[:, s] = others_mean(s)
    for t in range(p, n + p):
        agg[:, t - 1] = others_mean(t - 1)
        for ci, c in enumerate(countries):
            dgp = dgps[c]
            value = dgp.intercepts + dgp.b0 @ shocks[ci, t - p]
            for j, a in enumerate(dgp.lags, start=1):
                value = value + a @ state[ci, t - j]
            loads = dgp.yaeur_loadings
            value[ya_idx[ci]] += sum(loads[k] * agg[ci, t - k] for k in range(1, len(loads)))
            state[ci, t] = value
    agg[:, n + p - 1] = others_mean(n + p - 1)

    keep = slice(p + burn_in, n + p)
    years = tuple(range(start_year, start_year + T))
    panels = {}
    for ci, c in enumerate(countries):
        series = {role: state[ci, keep, i] for i, role in enumerate(dgps[c].variables)}
        series[YAEUR] = agg[ci, keep]
        panels[c] = AnnualPanel(c, years, series)
    return panels


def to_index_units(panel: AnnualPanel, roles: Sequence[str] = (PRICE, YA)) -> AnnualPanel:
    """Turn log-unit model series into base-100 indices so the log transform recovers them."""
    return panel.with_series(**{role: exp_index(panel[role]) for role in roles})


# ---------------------------------------------------------------------------
# sector supply/demand model


@dataclass(frozen=True)
class SectorCalibration:
    """Linear sector model; every slope is the signed partial derivative it names.

    Supply: ``q = supply_intercept + supply_price p + supply_rate_input Pz(r)
    + supply_import_input Pze(e) + supply_other_input Pa``.
    Demand: ``q = demand_intercept + demand_income Y + demand_relprice p / P
    + demand_exchange e``. Input prices pass through linearly:
    ``Pz = rate_input_base + rate_input_passthrough r`` and likewise for Pze.
    With ``support_price`` set, price is administered and quantity is read off supply.
    """

    name: str = "custom"
    demand_intercept: float = 10.0
    demand_income: float = 0.5
    demand_relprice: float = -1.0
    demand_exchange: float = 0.0
    supply_intercept: float = 0.0
    supply_price: float = 2.0
    supply_rate_input: float = -1.0
    supply_import_input: float = -0.5
    supply_other_input: float = -0.2
    rate_input_base: float = 0.0
    rate_input_passthrough: float = 1.0
    import_input_base: float = 0.0
    import_input_passthrough: float = 1.0
    other_input_price: float = 1.0
    price_level: float = 1.0
    base_rate: float = 5.0
    base_exchange: float = 1.0
    base_income: float = 10.0
    income_rate_response: float = -0.5
    exchange_rate_response: float = -0.1
    support_price: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


class Equilibrium(NamedTuple):
    price: float
    quantity: float
    negative_quantity: bool


def rate_input_price(cal: SectorCalibration, r: float) -> float:
    return cal.rate_input_base + cal.rate_input_passthrough * r


def import_input_price(cal: SectorCalibration, e: float) -> float:
    return cal.import_input_base + cal.import_input_passthrough * e


def income_at(cal: SectorCalibration, r: float) -> float:
    return cal.base_income + cal.income_rate_response * (r - cal.base_rate)


def exchange_at(cal: SectorCalibration, r: float) -> float:
    return cal.base_exchange + cal.exchange_rate_response * (r - cal.base_rate)


def supply_quantity(cal: SectorCalibration, p: float, pz: float, pze: float, pa: float) -> float:
    return (
        cal.supply_intercept
        + cal.supply_price * p
        + cal.supply_rate_input * pz
        + cal.supply_import_input * pze
        + cal.supply_other_input * pa
    )


def demand_quantity(cal: SectorCalibration, income: float, relative_price: float, e: float) -> float:
    return (
        cal.demand_intercept
        + cal.demand_income * income
        + cal.demand_relprice * relative_price
        + cal.demand_exchange * e
    )


def sector_equilibrium(
    cal: SectorCalibration,
    r: float,
    e: float,
    income: float,
    price_level: float | None = None,
) -> Equilibrium:
    """Price and quantity where supply meets demand (or supply at the support price)."""
    P = cal.price_level if price_level is None else price_level
    pz, pze = rate_input_price(cal, r), import_input_price(cal, e)
    if cal.support_price is not None:
        p = cal.support_price
    else:
        demand_slope = cal.demand_relprice / P
        gap = cal.supply_price - demand_slope
        if abs(gap) <= 1e-12 * max(abs(cal.supply_price), abs(demand_slope), 1.0):
            raise NoEquilibrium(f"{cal.name}: supply and demand are parallel")
        supply_rest = supply_quantity(cal, 0.0, pz, pze, cal.other_input_price)
        demand_rest = demand_quantity(cal, income, 0.0, e)
        p = (demand_rest - supply_rest) / gap
    q = supply_quantity(cal, p, pz, pze, cal.other_input_price)
    return Equilibrium(float(p), float(q), bool(q < 0))


def base_equilibrium(cal: SectorCalibration) -> Equilibrium:
    return sector_equilibrium(cal, cal.base_rate, cal.base_exchange, cal.base_income)


@dataclass(frozen=True)
class ChannelEffects:
    cost: float
    imported_input: float
    income: float
    competitiveness: float
    d_rate: float
    d_exchange: float
    d_income: float

    @property
    def total(self) -> float:
        return self.cost + self.imported_input + self.income + self.competitiveness

    @property
    def sign(self) -> int:
        return int(np.sign(self.total))

    def to_dict(self) -> dict:
        out = asdict(self)
        out.update(total=self.total, sign=self.sign)
        return out


def shock_comparative_statics(
    cal: SectorCalibration,
    d_rate: float,
    d_exchange: float | None = None,
    d_income: float | None = None,
) -> ChannelEffects:
    """Equilibrium quantity change from a rate move, split by transmission channel.

    Exchange-rate and income moves default to the calibration's macro linkages.
    A supply shift s and a demand shift d move quantity by
    ``(b s_d - a s_s)`` over ``(b - a)`` with b the supply and a the demand price
    slope; under price support only supply shifts matter.
    """
    if d_exchange is None:
        d_exchange = cal.exchange_rate_response * d_rate
    if d_income is None:
        d_income = cal.income_rate_response * d_rate
    b = cal.supply_price
    a = cal.demand_relprice / cal.price_level

    def via_supply(shift):
        if cal.support_price is not None:
            return shift
        return -a * shift / (b - a)

    def via_demand(shift):
        if cal.support_price is not None:
            return 0.0
        return b * shift / (b - a)

    if cal.support_price is None and b == a:
        raise NoEquilibrium(f"{cal.name}: supply and demand are parallel")
    return ChannelEffects(
        cost=via_supply(cal.supply_rate_input * cal.rate_input_passthrough * d_rate),
        imported_input=via_supply(cal.supply_import_input * cal.import_input_passthrough * d_exchange),
        income=via_demand(cal.demand_income * d_income),
        competitiveness=via_demand(cal.demand_exchange * d_exchange),
        d_rate=d_rate,
        d_exchange=d_exchange,
        d_income=d_income,
    )


class SignCheck(NamedTuple):
    name: str
    derivative: float
    expected: int
    ok: bool


def sign_checks(cal: SectorCalibration, step: float = 1e-6) -> list[SignCheck]:
    """Central finite differences of every signed relation, at the base equilibrium."""
    eq = base_equilibrium(cal)
    p, P = eq.price, cal.price_level
    pz, pze = rate_input_price(cal, cal.base_rate), import_input_price(cal, cal.base_exchange)
    pa, e, y, r = cal.other_input_price, cal.base_exchange, cal.base_income, cal.base_rate

    def diff(f, x):
        return (f(x + step) - f(x - step)) / (2 * step)

    cases = [
        ("supply/output_price", diff(lambda v: supply_quantity(cal, v, pz, pze, pa), p), 1),
        ("supply/rate_input_price", diff(lambda v: supply_quantity(cal, p, v, pze, pa), pz), -1),
        ("supply/import_input_price", diff(lambda v: supply_quantity(cal, p, pz, v, pa), pze), -1),
        ("supply/other_input_price", diff(lambda v: supply_quantity(cal, p, pz, pze, v), pa), -1),
        ("demand/income", diff(lambda v: demand_quantity(cal, v, p / P, e), y), 1),
        ("demand/relative_price", diff(lambda v: demand_quantity(cal, y, v, e), p / P), -1),
        ("rate_input_price/rate", diff(lambda v: rate_input_price(cal, v), r), 1),
        ("import_input_price/exchange", diff(lambda v: import_input_price(cal, v), e), 1),
        ("income/rate", diff(lambda v: income_at(cal, v), r), -1),
        ("exchange/rate", diff(lambda v: exchange_at(cal, v), r), -1),
    ]
    return [SignCheck(name, float(d), s, bool(np.sign(d) == s)) for name, d, s in cases]


# ---------------------------------------------------------------------------
# country panels from the sector model


@dataclass(frozen=True)
class MacroProcess:
    """Interest-rate, price-level and sector-adjustment dynamics around the calibration.

    The rate follows an AR(1); inflation falls with last year's rate gap; income
    and the exchange rate follow the calibration's linkages; sector output moves
    a fraction ``adjustment_speed`` of the way to the equilibrium quantity each year.
    """

    rate_mean: float = 5.0
    rate_persistence: float = 0.7
    rate_sigma: float = 1.0
    inflation_mean: float = 0.0
    inflation_rate_response: float = 0.005
    inflation_sigma: float = 0.01
    income_sigma: float = 0.0
    exchange_sigma: float = 0.0
    adjustment_speed: float = 0.4
    output_sigma: float = 0.01

    def to_dict(self) -> dict:
        return asdict(self)


def generate_country_panel(
    cal: SectorCalibration,
    macro: MacroProcess,
    T: int,
    seed: int,
    country_id: str = "SIM",
    start_year: int = 1965,
    burn_in: int = BURN_IN,
) -> AnnualPanel:
    """Simulate POLM (rate, in points), PRICE and YA (base-100 indices) from the sector model."""
    if T < 30:
        raise ValueError("generate_country_panel needs T >= 30")
    rng = np.random.default_rng(seed)
    n = burn_in + T
    eps = rng.standard_normal((n, 5))
    start = sector_equilibrium(
        cal, macro.rate_mean, exchange_at(cal, macro.rate_mean), income_at(cal, macro.rate_mean)
    )
    scale = abs(start.quantity) or 1.0

    r_prev, log_p, q_prev = macro.rate_mean, 0.0, start.quantity
    rate, price, output = np.empty(n), np.empty(n), np.empty(n)
    for t in range(n):
        log_p += (
            macro.inflation_mean
            - macro.inflation_rate_response * (r_prev - macro.rate_mean)
            + macro.inflation_sigma * eps[t, 1]
        )
        r = (
            macro.rate_mean
            + macro.rate_persistence * (r_prev - macro.rate_mean)
            + macro.rate_sigma * eps[t, 0]
        )
        income = income_at(cal, r) + macro.income_sigma * eps[t, 2]
        e = exchange_at(cal, r) + macro.exchange_sigma * eps[t, 3]
        target = sector_equilibrium(cal, r, e, income, cal.price_level * np.exp(log_p)).quantity
        q = q_prev + macro.adjustment_speed * (target - q_prev) + macro.output_sigma * scale * eps[t, 4]
        rate[t], price[t], output[t] = r, 100.0 * np.exp(log_p), 100.0 * q / scale
        r_prev, q_prev = r, q
    keep = slice(burn_in, n)
    return AnnualPanel(
        country_id,
        tuple(range(start_year, start_year + T)),
        {POLM: rate[keep], PRICE: price[keep], YA: output[keep]},
    )


# ---------------------------------------------------------------------------
# presets


def load_presets(path=None) -> dict:
    """Parse the preset YAML (the bundled ``presets.yaml`` by default)."""
    if path is None:
        text = resources.files("partialvar.data").joinpath("presets.yaml").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return yaml.safe_load(text)


def sector_presets(presets: Mapping | None = None) -> dict[str, SectorCalibration]:
    presets = load_presets() if presets is None else presets
    return {
        name: SectorCalibration(name=name, **block)
        for name, block in presets.get("sector", {}).items()
    }


def macro_presets(presets: Mapping | None = None) -> dict[str, MacroProcess]:
    presets = load_presets() if presets is None else presets
    return {name: MacroProcess(**block) for name, block in presets.get("macro", {}).items()}


def dgp_presets(presets: Mapping | None = None) -> dict[str, DGPSpec]:
    presets = load_presets() if presets is None else presets
    return {name: DGPSpec.from_dict(block) for name, block in presets.get("dgp", {}).items()}


@dataclass(frozen=True)
class StudyCountry:
    country_id: str
    tier: str
    dgp: DGPSpec
    expected_size: str
    expected_speed: str


def study_countries(presets: Mapping | None = None) -> list[StudyCountry]:
    """The calibrated multi-country study: one tier template per country plus its overrides.

    Overrides ``policy_scale``, ``own_shock_scale`` and ``rebound`` (see
    :func:`scale_dgp`) let countries differ within a tier.
    """
    presets = load_presets() if presets is None else presets
    templates = presets["study"]["tiers"]
    out = []
    for cid, block in presets["study"]["countries"].items():
        tier = templates[block["tier"]]
        dgp = DGPSpec.from_dict(tier["dgp"])
        dgp = scale_dgp(
            dgp,
            block.get("policy_scale", 1.0),
            block.get("own_shock_scale", 1.0),
            block.get("rebound", 0.0),
        )
        out.append(StudyCountry(cid, block["tier"], dgp, tier["expected_size"], tier["expected_speed"]))
    return out


def scale_dgp(
    dgp: DGPSpec,
    policy_scale: float = 1.0,
    own_shock_scale: float = 1.0,
    rebound: float = 0.0,
) -> DGPSpec:
    """Rescale the policy-to-output channel and the output shock of a DGP.

    ``rebound`` is added to YA's coefficient on the last POLM lag, which turns a
    contraction into a later expansion when large enough.
    """
    ya, polm = dgp.variables.index(YA), dgp.variables.index(POLM)
    lags = []
    for a in dgp.lags:
        a = a.copy()
        a[ya, polm] *= policy_scale
        lags.append(a)
    lags[-1][ya, polm] += rebound
    b0 = dgp.b0.copy()
    b0[ya, polm] *= policy_scale
    b0[ya, ya] *= own_shock_scale
    return replace(dgp, lags=tuple(lags), b0=b0)


def study_configs(countries: Sequence[StudyCountry], first_year: int) -> dict[str, CountryConfig]:
    return {
        c.country_id: CountryConfig(
            c.country_id,
            polm_kind="interest_rate",
            polm_column="rate",
            price_column="price_index",
            output_column="output_index",
            file=f"{c.country_id}.csv",
        )
        for c in countries
    }


def study_run_block(presets: Mapping | None = None) -> dict:
    """Run settings the bundled study is analysed with."""
    presets = load_presets() if presets is None else presets
    study = presets["study"]
    return {
        "lag": study.get("lag", "fixed:2"),
        "ordering": "price,polm,ya",
        "horizon": 20,
        "fevd_horizons": [1, 2, 5, 10, 15, 20],
        "aggregation": "exclude_self",
        "thresholds": dict(study["thresholds"]),
    }


def write_study(
    out_dir,
    seed: int | None = None,
    n_years: int | None = None,
    presets: Mapping | None = None,
) -> dict[str, AnnualPanel]:
    """Simulate the multi-country study and write ``config.yaml`` plus one CSV per country.

    Output and price are written as base-100 indices and the rate in points, so
    the ingestion defaults for an interest-rate country recover the model units.
    """
    presets = load_presets() if presets is None else presets
    study = presets["study"]
    seed = study["seed"] if seed is None else seed
    n_years = study["n_years"] if n_years is None else n_years
    countries = study_countries(presets)
    panels = simulate_study(
        {c.country_id: c.dgp for c in countries}, n_years, seed, start_year=study["first_year"]
    )
    configs = study_configs(countries, study["first_year"])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for cid, cfg in configs.items():
        panel = to_index_units(panels[cid])
        write_panel(panel, out / cfg.file, {POLM: cfg.polm_column, PRICE: cfg.price_column, YA: cfg.output_column})
    doc = {
        "run": {**study_run_block(presets), "seed": int(seed)},
        "tiers": {c.country_id: c.tier for c in countries},
        "countries": {cid: cfg.to_dict() for cid, cfg in configs.items()},
    }
    (out / "config.yaml").write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    return panels
