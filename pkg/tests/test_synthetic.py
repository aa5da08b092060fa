import dataclasses

import numpy as np
import pytest
import yaml

from partialvar.design import build_system
from partialvar.dynamics import compute_irfs
from partialvar.errors import ExplosiveDGP, NoEquilibrium
from partialvar.estimation import sur_estimate
from partialvar.identification import cholesky_identify
from partialvar.ingestion import CountryConfig, apply_transforms, build_euro_aggregate, load_panel
from partialvar.roles import DEFAULT_ORDER, POLM, PRICE, YA, YAEUR
from partialvar.synthetic import (
    DGPSpec,
    MacroProcess,
    SectorCalibration,
    base_equilibrium,
    dgp_presets,
    generate_country_panel,
    macro_presets,
    sector_equilibrium,
    sector_presets,
    shock_comparative_statics,
    sign_checks,
    simulate_study,
    simulate_var,
    study_countries,
    to_index_units,
    write_study,
)


def test_white_noise_autocorrelation():
    T = 2000
    panel = simulate_var(dgp_presets()["white_noise"], T, seed=3).panel
    for role in (PRICE, POLM, YA):
        x = panel[role] - panel[role].mean()
        rho = (x[1:] @ x[:-1]) / (x @ x)
        assert abs(rho) < 3 / np.sqrt(T)


def test_simulation_deterministic():
    dgp = dgp_presets()["stable"]
    a = simulate_var(dgp, 100, seed=5)
    b = simulate_var(dgp, 100, seed=5)
    for role in a.panel.series:
        assert a.panel[role].tobytes() == b.panel[role].tobytes()
    c = simulate_var(dgp, 100, seed=6)
    assert not np.array_equal(a.panel[YA], c.panel[YA])


def test_explosive_guard():
    dgp = dgp_presets()["explosive"]
    assert dgp.spectral_radius == pytest.approx(1.05)
    with pytest.raises(ExplosiveDGP):
        simulate_var(dgp, 60)
    forced = dataclasses.replace(dgp, allow_explosive=True)
    assert len(simulate_var(forced, 60, burn_in=0).panel) == 60
    with pytest.raises(ValueError):
        simulate_var(dgp_presets()["stable"], 49)


def test_stable_preset_radius():
    assert dgp_presets()["stable"].spectral_radius < 0.95


def test_dgp_validation():
    good = dgp_presets()["stable"]
    bad_lags = [a.copy() for a in good.lags]
    bad_lags[0][1, 2] = 0.1  # POLM loading on lagged YA
    with pytest.raises(ValueError):
        dataclasses.replace(good, lags=tuple(bad_lags))
    with pytest.raises(ValueError):
        dataclasses.replace(good, b0=np.ones((3, 3)))
    with pytest.raises(ValueError):
        dataclasses.replace(good, yaeur_loadings=np.zeros(2))
    assert DGPSpec.from_dict(good.to_dict()).to_dict() == good.to_dict()


def test_true_coefficient_table_respects_blocks():
    table = dgp_presets()["stable"].coefficient_table()
    assert "YA.L1" not in table[POLM]
    assert table[YA]["YAEUR.L0"] == 0.3
    assert table[PRICE]["const"] == 0.1


def textbook():
    # supply q = -1 + 2p - r, demand q = 10 - p
    return SectorCalibration(
        demand_intercept=10.0, demand_income=0.0, demand_relprice=-1.0, demand_exchange=0.0,
        supply_intercept=-1.0, supply_price=2.0, supply_rate_input=-1.0,
        supply_import_input=0.0, supply_other_input=0.0,
    )


def test_equilibrium_hand_solution():
    eq = sector_equilibrium(textbook(), r=1.0, e=0.0, income=0.0)
    assert (eq.price, eq.quantity) == pytest.approx((4.0, 6.0))
    eq = sector_equilibrium(textbook(), r=0.0, e=0.0, income=0.0)
    assert (eq.price, eq.quantity) == pytest.approx((11 / 3, 19 / 3))
    assert not eq.negative_quantity


def test_parallel_curves():
    cal = dataclasses.replace(textbook(), demand_relprice=2.0)
    with pytest.raises(NoEquilibrium):
        sector_equilibrium(cal, 1.0, 0.0, 0.0)
    with pytest.raises(NoEquilibrium):
        shock_comparative_statics(cal, -1.0)


def test_negative_quantity_flag():
    cal = dataclasses.replace(textbook(), demand_intercept=-50.0)
    assert sector_equilibrium(cal, 1.0, 0.0, 0.0).negative_quantity


@pytest.mark.parametrize("name", sorted(sector_presets()))
def test_sign_suite(name):
    cal = sector_presets()[name]
    checks = sign_checks(cal, step=1e-6)
    assert len(checks) == 10
    assert all(c.ok for c in checks), [c for c in checks if not c.ok]
    assert base_equilibrium(cal).quantity > 0


def test_low_import_rate_cut_raises_quantity():
    cal = sector_presets()["low_import"]
    effects = shock_comparative_statics(cal, d_rate=-1.0)
    assert effects.total > 0 and effects.sign == 1
    zero_import = dataclasses.replace(cal, supply_import_input=0.0)
    assert shock_comparative_statics(zero_import, -1.0).total > 0


def test_null_calibration_has_no_effect():
    cal = dataclasses.replace(
        textbook(), supply_rate_input=0.0, supply_import_input=0.0, demand_income=0.0, demand_exchange=0.0
    )
    effects = shock_comparative_statics(cal, -1.0)
    assert effects.total == 0.0


@pytest.mark.parametrize("name", sorted(sector_presets()))
def test_channels_add_up_to_equilibrium_change(name):
    cal = sector_presets()[name]
    dr = -0.75
    effects = shock_comparative_statics(cal, dr)
    r0 = cal.base_rate
    before = sector_equilibrium(cal, r0, cal.base_exchange, cal.base_income)
    after = sector_equilibrium(
        cal, r0 + dr, cal.base_exchange + effects.d_exchange, cal.base_income + effects.d_income
    )
    assert effects.total == pytest.approx(after.quantity - before.quantity, abs=1e-9)


def test_import_sensitivity_lowers_gain_from_cut():
    cal = sector_presets()["balanced"]
    heavy = dataclasses.replace(cal, supply_import_input=-2.0)

    def gain(c):
        r0, dr = c.base_rate, -1.0
        de, dy = c.exchange_rate_response * dr, c.income_rate_response * dr
        before = sector_equilibrium(c, r0, c.base_exchange, c.base_income).quantity
        return sector_equilibrium(c, r0 + dr, c.base_exchange + de, c.base_income + dy).quantity - before

    assert gain(heavy) < gain(cal)
    assert shock_comparative_statics(heavy, -1.0).total < shock_comparative_statics(cal, -1.0).total


def test_import_heavy_rate_cut_lowers_quantity():
    assert shock_comparative_statics(sector_presets()["import_heavy"], -1.0).total < 0


def test_price_support_reads_supply_curve():
    cal = sector_presets()["price_support"]
    eq = base_equilibrium(cal)
    assert eq.price == cal.support_price
    effects = shock_comparative_statics(cal, -1.0)
    assert effects.income == 0.0 and effects.competitiveness == 0.0
    assert effects.cost == pytest.approx(-cal.supply_rate_input * cal.rate_input_passthrough)


def test_country_panel_constant_without_noise():
    quiet = MacroProcess(rate_sigma=0.0, inflation_sigma=0.0, income_sigma=0.0, exchange_sigma=0.0,
                         output_sigma=0.0, inflation_mean=0.0)
    panel = generate_country_panel(sector_presets()["balanced"], quiet, 40, seed=1)
    for role in (POLM, PRICE, YA):
        np.testing.assert_allclose(panel[role], panel[role][0], rtol=1e-12)


def test_country_panel_deterministic_and_ingestable(tmp_path):
    cal, macro = sector_presets()["balanced"], macro_presets()["default"]
    a = generate_country_panel(cal, macro, 40, seed=2)
    b = generate_country_panel(cal, macro, 40, seed=2)
    assert a[YA].tobytes() == b[YA].tobytes()
    assert a.years[0] == 1965
    with pytest.raises(ValueError):
        generate_country_panel(cal, macro, 29, seed=2)


def test_end_to_end_sign_low_import():
    # a strong cost channel makes a restrictive rate shock lower output at its extremum
    cal, macro = sector_presets()["low_import"], macro_presets()["default"]
    panels = {
        cid: apply_transforms(generate_country_panel(cal, macro, 2000, seed=s, country_id=cid), CountryConfig(cid))
        for s, cid in enumerate(["A", "B"])
    }
    panel = panels["A"]
    yaeur = build_euro_aggregate(panels.values(), "A")
    est = sur_estimate(build_system(panel, yaeur, 2))
    factor = cholesky_identify(est.sigma_u, DEFAULT_ORDER, est.variables)
    path = compute_irfs(est, factor, 20).path(POLM, YA)
    assert path[np.argmax(np.abs(path))] < 0


def test_study_aggregate_matches_ingestion():
    countries = study_countries()
    assert len(countries) == 12
    assert {c.tier for c in countries} == {"weak", "medium", "strong"}
    panels = simulate_study({c.country_id: c.dgp for c in countries}, 80, seed=4)
    for cid, panel in panels.items():
        agg = build_euro_aggregate(panels.values(), cid, "exclude_self")
        np.testing.assert_allclose(panel[YAEUR], agg, rtol=1e-12, atol=1e-12)


def test_study_rejects_contemporaneous_loading():
    dgp = dgp_presets()["stable"]
    with pytest.raises(ValueError):
        simulate_study({"A": dgp, "B": dgp}, 60, seed=0)


def test_index_units_invert_logs():
    panel = simulate_var(dgp_presets()["stable"], 60, seed=1).panel
    back = apply_transforms(to_index_units(panel), CountryConfig("SIM"))
    np.testing.assert_allclose(back[YA], panel[YA] + np.log(100.0), rtol=1e-12)
    assert back[POLM].tobytes() == panel[POLM].tobytes()


def test_write_study(tmp_path):
    panels = write_study(tmp_path, seed=3, n_years=60)
    doc = yaml.safe_load((tmp_path / "config.yaml").read_text())
    assert sorted(doc["countries"]) == sorted(panels)
    assert doc["run"]["seed"] == 3
    cfg = CountryConfig.from_dict("BE", doc["countries"]["BE"])
    loaded = apply_transforms(load_panel(tmp_path / "BE.csv", cfg), cfg)
    np.testing.assert_allclose(loaded[YA], panels["BE"][YA] + np.log(100.0), rtol=1e-12)
