from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partialvar.design import (
    SystemSpec,
    build_system,
    information_criterion,
    lag_order_table,
    select_lag_order,
)
from partialvar.errors import InsufficientSample, RankDeficient
from partialvar.ingestion import panel_from_arrays
from partialvar.roles import DEFAULT_ORDER, POLM, PRICE, YA, YAEUR
from partialvar.synthetic import dgp_presets, simulate_var


def random_panel(T, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((T, 4))
    panel = panel_from_arrays("R", 1965, {PRICE: data[:, 0], POLM: data[:, 1], YA: data[:, 2]})
    return panel, data[:, 3]


def test_counts_for_thirty_one_years():
    panel, yaeur = random_panel(31)
    designs = build_system(panel, yaeur, 2)
    assert [d.equation_id for d in designs] == list(DEFAULT_ORDER)
    assert all(d.n_obs == 29 for d in designs)
    k = {d.equation_id: d.n_regressors for d in designs}
    assert k == {PRICE: 5, POLM: 5, YA: 10}


def test_dof_boundary():
    panel, yaeur = random_panel(12)
    with pytest.raises(InsufficientSample):
        build_system(panel, yaeur, 2)
    panel, yaeur = random_panel(13)
    assert build_system(panel, yaeur, 2)[2].n_obs == 11


def test_constant_yaeur_is_rank_deficient():
    panel, _ = random_panel(31)
    with pytest.raises(RankDeficient):
        build_system(panel, np.full(31, 3.0), 2)


def test_regressor_layout():
    spec = SystemSpec(2)
    assert spec.regressors(PRICE) == ("const", "PRICE.L1", "PRICE.L2", "POLM.L1", "POLM.L2")
    assert spec.regressors(YA)[-5:] == ("YA.L1", "YA.L2", "YAEUR.L0", "YAEUR.L1", "YAEUR.L2")


def test_design_columns_hold_lagged_values():
    panel, yaeur = random_panel(20, seed=3)
    ya_eq = build_system(panel, yaeur, 2)[2]
    t = 5  # row t corresponds to year index t + p
    assert ya_eq.response[t] == panel[YA][t + 2]
    assert ya_eq.regressors[t, ya_eq.labels.index("POLM.L2")] == panel[POLM][t]
    assert ya_eq.regressors[t, ya_eq.labels.index("YAEUR.L0")] == yaeur[t + 2]
    assert ya_eq.regressors[t, ya_eq.labels.index("const")] == 1.0


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 4),
    st.permutations(list(DEFAULT_ORDER)),
    st.integers(0, 2**31 - 1),
)
def test_block_restriction_and_alignment(p, ordering, seed):
    panel, yaeur = random_panel(60, seed)
    designs = build_system(panel, yaeur, p, ordering)
    by_eq = {d.equation_id: d for d in designs}
    for role in (PRICE, POLM):
        assert not any(lab.startswith((YA + ".", YAEUR + ".")) for lab in by_eq[role].labels)
    assert len({d.years for d in designs}) == 1
    assert designs[0].years == panel.years[p:]
    assert by_eq[YA].n_regressors == 3 * p + (p + 1) + 1


def test_information_criteria_penalties():
    assert information_criterion(-1.0, 10, 100, "AIC") == pytest.approx(-1.0 + 0.2)
    assert information_criterion(-1.0, 10, 100, "BIC") == pytest.approx(-1.0 + 10 * np.log(100) / 100)
    assert information_criterion(-1.0, 10, 100, "HQ") == pytest.approx(-1.0 + 20 * np.log(np.log(100)) / 100)
    with pytest.raises(ValueError):
        information_criterion(0.0, 1, 10, "XYZ")


def _select_many(preset, n_seeds=100):
    dgp = dgp_presets()[preset]
    picks = []
    for seed in range(n_seeds):
        panel = simulate_var(dgp, 500, seed=seed).panel
        picks.append(select_lag_order(panel, panel[YAEUR], 3, "BIC"))
    return Counter(picks)


def test_selects_two_on_lag_two_dgp():
    counts = _select_many("lag2")
    assert counts.most_common(1)[0][0] == 2


def test_selects_one_on_white_noise():
    counts = _select_many("white_noise")
    assert counts.most_common(1)[0][0] == 1


def test_selection_deterministic_and_common_sample():
    panel = simulate_var(dgp_presets()["lag2"], 200, seed=4).panel
    a = lag_order_table(panel, panel[YAEUR], 3)
    b = lag_order_table(panel, panel[YAEUR], 3)
    assert a == b
    assert sorted(a) == [1, 2, 3]
    assert select_lag_order(panel, panel[YAEUR], 3) == min(a, key=lambda p: (a[p], p))


def test_infeasible_candidates_skipped_or_error():
    panel, yaeur = random_panel(14)
    # on the common sample of 11 rows p = 3 needs k = 14 regressors in the YA equation
    assert sorted(lag_order_table(panel, yaeur, 3)) == [1, 2]
    assert select_lag_order(panel, yaeur, 3) in (1, 2)
    panel, yaeur = random_panel(10)
    with pytest.raises(InsufficientSample):
        select_lag_order(panel, yaeur, 4)
