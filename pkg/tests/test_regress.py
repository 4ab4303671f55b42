import numpy as np
import pandas as pd
import pytest

from regional_complexity.errors import ValidationError
from regional_complexity.regress import (ModelSpec, format_results_text, ols,
                                         results_frame, run_cross_section,
                                         run_panel_lsdv, run_period_growth,
                                         significance_stars,
                                         validate_dataset)


def test_ols_exact_line():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = 2.0 * x + 3.0
    fit = ols(y, x[:, None], names=["x"])
    assert fit.names == ("x", "Constant")
    np.testing.assert_allclose(fit.coef, [2.0, 3.0], atol=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.resid_se == pytest.approx(0.0, abs=1e-10)


def test_ols_matches_normal_equations():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    beta = np.array([1.5, -2.0, 0.25, 4.0])
    y = np.column_stack([X, np.ones(40)]) @ beta + rng.normal(size=40)
    fit = ols(y, X, se_kind="classical")

    Xd = np.column_stack([X, np.ones(40)])
    XtX_inv = np.linalg.inv(Xd.T @ Xd)
    coef = XtX_inv @ Xd.T @ y
    resid = y - Xd @ coef
    sigma2 = resid @ resid / (40 - 4)
    se = np.sqrt(np.diag(sigma2 * XtX_inv))
    np.testing.assert_allclose(fit.coef, coef, rtol=1e-10)
    np.testing.assert_allclose(fit.se, se, rtol=1e-10)


def test_hc1_sandwich_matches_direct_formula():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    fit = ols(y, X, se_kind="HC1")

    Xd = np.column_stack([X, np.ones(30)])
    XtX_inv = np.linalg.inv(Xd.T @ Xd)
    coef = XtX_inv @ Xd.T @ y
    e = y - Xd @ coef
    meat = Xd.T @ (e[:, None] ** 2 * Xd)
    cov = (30 / (30 - 3)) * XtX_inv @ meat @ XtX_inv
    np.testing.assert_allclose(fit.se, np.sqrt(np.diag(cov)), rtol=1e-10)


def test_hc1_equals_classical_on_balanced_residuals():
    # x and the intercept are both orthogonal to e, and e**2 is constant,
    # so the sandwich reduces to the classical covariance exactly.
    x = np.array([1.0, 2.0, 3.0, 4.0])
    e = np.array([1.0, -1.0, -1.0, 1.0])
    y = 2.0 * x + 1.0 + e
    classical = ols(y, x[:, None], se_kind="classical")
    robust = ols(y, x[:, None], se_kind="HC1")
    np.testing.assert_allclose(robust.se, classical.se, rtol=1e-12)
    assert robust.se_kind == "HC1"


def test_ols_rank_deficiency_names_column():
    x = np.arange(5.0)
    X = np.column_stack([x, 2.0 * x])
    # pivoting may flag either member of the collinear pair
    with pytest.raises(ValidationError, match=r"rank deficient.*x[12]"):
        ols(x, X, names=["x1", "x2"])


def test_ols_requires_more_rows_than_params():
    with pytest.raises(ValidationError, match="observations"):
        ols(np.ones(3), np.eye(3))


def test_ols_slope_invariant_to_regressor_shift():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(50, 2))
    y = X @ np.array([1.0, -1.0]) + rng.normal(size=50)
    base = ols(y, X)
    shifted = ols(y, X + np.array([100.0, -40.0]))
    np.testing.assert_allclose(base.coef[:2], shifted.coef[:2], atol=1e-9)


def test_significance_stars_thresholds():
    assert significance_stars(0.005) == "***"
    assert significance_stars(0.03) == "**"
    assert significance_stars(0.07) == "*"
    assert significance_stars(0.2) == ""


def make_cross_section(n=200, seed=3):
    rng = np.random.default_rng(seed)
    eci = rng.normal(size=n)
    pop = rng.normal(size=n)
    edu = rng.normal(size=n)
    gov = rng.normal(size=n)
    y = 0.5 * eci - 0.2 * pop + 0.3 * edu + rng.normal(scale=0.5, size=n)
    return pd.DataFrame({
        "entity": [f"R{i:03d}" for i in range(n)],
        "year": 2015,
        "ECI": eci,
        "outcome": y,
        "log population": pop,
        "college share": edu,
        "government share": gov,
    })


CONTROLS = {"economic": ["log population"],
            "sociodemographic": ["college share"],
            "institutional": ["government share"]}


def test_cross_section_ladder_structure():
    data = make_cross_section()
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=2015)
    results = run_cross_section(data, spec)
    assert [r.label for r in results] == ["(1)", "(2)", "(3)", "(4)", "(5)"]
    assert results[0].names == ("ECI", "Constant")
    assert "log population" in results[1].names
    assert "college share" not in results[1].names  # ladder is not cumulative
    assert "college share" in results[2].names
    assert "government share" in results[3].names
    assert set(results[4].names) == {"ECI", "log population", "college share",
                                     "government share", "Constant"}


def test_cross_section_recovers_simulated_slopes():
    data = make_cross_section(n=2000, seed=4)
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=2015)
    full = run_cross_section(data, spec)[4]
    coef = dict(zip(full.names, full.coef))
    se = dict(zip(full.names, full.se))
    for name, true in [("ECI", 0.5), ("log population", -0.2),
                       ("college share", 0.3), ("government share", 0.0)]:
        assert abs(coef[name] - true) < 3 * se[name] + 1e-12


def test_cross_section_constant_outcome():
    data = make_cross_section()
    data["outcome"] = 7.0
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=2015)
    fit = run_cross_section(data, spec)[0]
    assert fit.coef[0] == pytest.approx(0.0, abs=1e-10)
    assert fit.coef[-1] == pytest.approx(7.0)
    # zero-variance outcome is fit exactly, so R2 takes the 0/0 = 1 branch
    assert fit.r2 == pytest.approx(1.0)
    assert fit.resid_se == pytest.approx(0.0, abs=1e-10)


def test_cross_section_missing_year_lists_available():
    data = make_cross_section()
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=1990)
    with pytest.raises(ValidationError, match="2015"):
        run_cross_section(data, spec)


def test_cross_section_listwise_deletion_counted():
    data = make_cross_section()
    data.loc[data.index[:10], "log population"] = np.nan
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=2015)
    results = run_cross_section(data, spec)
    assert results[0].dropped_rows == 0
    assert results[1].dropped_rows == 10
    assert results[1].n_obs == len(data) - 10


def make_panel_data(n_entities=6, years=(2010, 2011, 2012, 2013), seed=5):
    rng = np.random.default_rng(seed)
    rows = []
    for e in range(n_entities):
        for y in years:
            rows.append({"entity": f"R{e}", "year": y,
                         "ECI": rng.normal(),
                         "outcome": rng.normal(),
                         "log population": rng.normal()})
    return pd.DataFrame(rows)


def test_period_growth_names_and_zero_growth():
    data = make_panel_data()
    # each entity keeps its (varying) start level, so growth is zero
    start = data[data["year"] == 2010].set_index("entity")["ECI"].abs() + 1.0
    data["outcome"] = data["entity"].map(start).to_numpy()
    spec = ModelSpec(kind="period_growth", outcome="outcome",
                     controls=CONTROLS_PANEL, start_year=2010, end_year=2013)
    results = run_period_growth(data, spec)
    fit = results[0]
    assert fit.names[0] == "ECI"
    assert fit.names[1] == "outcome in 2010"
    np.testing.assert_allclose(fit.coef[:2], 0.0, atol=1e-10)


CONTROLS_PANEL = {"economic": ["log population"]}


def test_period_growth_hand_computed():
    # growth = (end - start) / start built to satisfy
    # g = 0.1 * eci + 0.01 * start - 0.05 exactly, so the four-entity
    # regression on (eci, start level, constant) has zero residuals.
    eci = [1.0, 2.0, 3.0, 4.0]
    start = [10.0, 20.0, 40.0, 80.0]
    growth = [0.1 * e + 0.01 * s - 0.05 for e, s in zip(eci, start)]
    end = [s * (1.0 + g) for s, g in zip(start, growth)]
    data = pd.DataFrame({
        "entity": ["A", "A", "B", "B", "C", "C", "D", "D"],
        "year": [2000, 2005] * 4,
        "ECI": [v for e in eci for v in (e, 9.9)],
        "outcome": [v for s, f in zip(start, end) for v in (s, f)],
    })
    spec = ModelSpec(kind="period_growth", outcome="outcome", controls={},
                     start_year=2000, end_year=2005)
    fit = run_period_growth(data, spec)[0]
    coef = dict(zip(fit.names, fit.coef))
    assert coef["ECI"] == pytest.approx(0.1, abs=1e-10)
    assert coef["outcome in 2000"] == pytest.approx(0.01, abs=1e-10)
    assert coef["Constant"] == pytest.approx(-0.05, abs=1e-10)
    assert fit.r2 == pytest.approx(1.0)


def test_period_growth_nonpositive_start_dropped():
    data = pd.DataFrame({
        "entity": ["A", "A", "B", "B", "C", "C", "D", "D", "E", "E"],
        "year": [2000, 2005] * 5,
        "ECI": [1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 0.0, 5.0, 0.0],
        "outcome": [10.0, 12.0, 0.0, 14.0, 10.0, 16.0, 20.0, 10.0,
                    30.0, 33.0],
    })
    spec = ModelSpec(kind="period_growth", outcome="outcome", controls={},
                     start_year=2000, end_year=2005)
    fit = run_period_growth(data, spec)[0]
    assert fit.n_obs == 4  # entity B has start level 0, growth undefined


def test_panel_lsdv_matches_two_way_demeaning():
    data = make_panel_data(n_entities=10, years=tuple(range(2000, 2006)),
                           seed=6)
    data["outcome"] = (0.8 * data["ECI"].to_numpy()
                       + np.random.default_rng(7).normal(size=len(data)))
    spec = ModelSpec(kind="panel", outcome="outcome", controls={})
    fit = run_panel_lsdv(data, spec)[0]
    coef = dict(zip(fit.names, fit.coef))

    # two-way within transform on the lagged regressor
    frame = data.sort_values(["entity", "year"]).copy()
    lagged = frame.set_index(["entity", "year"])["ECI"]
    idx = pd.MultiIndex.from_arrays([frame["entity"], frame["year"] - 1])
    frame["lag"] = lagged.reindex(idx).to_numpy()
    frame = frame.dropna(subset=["lag", "outcome"])

    def demean(series):
        out = series.astype(float).copy()
        for _ in range(200):
            out = out - out.groupby(frame["entity"]).transform("mean")
            out = out - out.groupby(frame["year"]).transform("mean")
        return out.to_numpy()

    y_w = demean(frame["outcome"])
    x_w = demean(frame["lag"])
    direct = float(x_w @ y_w / (x_w @ x_w))
    assert coef["l.ECI"] == pytest.approx(direct, abs=1e-8)


def test_panel_lsdv_pure_fixed_effects_annihilated():
    # outcome built purely from entity and year effects: the lag
    # coefficient must vanish once both sets of dummies absorb it.
    rows = []
    entity_fx = {"A": 1.0, "B": -2.0}
    year_fx = {2000: 0.0, 2001: 3.0, 2002: -1.0, 2003: 2.0}
    rng = np.random.default_rng(8)
    for entity, fe in entity_fx.items():
        for year, fy in year_fx.items():
            rows.append({"entity": entity, "year": year,
                         "ECI": rng.normal(),
                         "outcome": fe + fy})
    data = pd.DataFrame(rows)
    spec = ModelSpec(kind="panel", outcome="outcome", controls={})
    fit = run_panel_lsdv(data, spec)[0]
    coef = dict(zip(fit.names, fit.coef))
    assert coef["l.ECI"] == pytest.approx(0.0, abs=1e-9)


def test_panel_lsdv_drops_no_within_variation():
    data = make_panel_data(seed=9)
    frozen = data.groupby("entity")["log population"].transform("first")
    data["log population"] = frozen  # entity-constant control
    spec = ModelSpec(kind="panel", outcome="outcome",
                     controls={"economic": ["log population"]})
    results = run_panel_lsdv(data, spec)
    full = results[4]
    assert "log population" not in full.names
    assert any("log population" in w for w in full.warnings)


def test_panel_lsdv_reports_lag_label_and_no_resid_se():
    data = make_panel_data(seed=10)
    spec = ModelSpec(kind="panel", outcome="outcome", controls={})
    fit = run_panel_lsdv(data, spec)[0]
    assert fit.names[0] == "l.ECI"
    assert fit.resid_se is None
    assert fit.metadata["n_entities"] == 6


def test_format_results_text_layout():
    data = make_cross_section()
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=2015)
    results = run_cross_section(data, spec)
    text = format_results_text(results, title="outcome")
    for label in ["(1)", "(2)", "(3)", "(4)", "(5)"]:
        assert label in text
    assert "*p<0.1; **p<0.05; ***p<0.01" in text
    assert "Observations" in text
    assert "Adjusted R2" in text
    assert "Residual Std. Error" in text
    assert "(" in text.split("ECI", 1)[1]  # standard error under coefficient
    lines = text.splitlines()
    constant_line = max(i for i, l in enumerate(lines) if "Constant" in l)
    eci_line = min(i for i, l in enumerate(lines) if l.startswith("ECI"))
    assert constant_line > eci_line


def test_format_results_text_panel_omits_resid_se():
    data = make_panel_data(seed=11)
    spec = ModelSpec(kind="panel", outcome="outcome", controls={})
    text = format_results_text(run_panel_lsdv(data, spec),
                               title="outcome")
    assert "Residual Std. Error" not in text
    assert "l.ECI" in text


def test_results_frame_long_format():
    data = make_cross_section()
    spec = ModelSpec(kind="cross_section", outcome="outcome",
                     controls=CONTROLS, year=2015)
    frame = results_frame(run_cross_section(data, spec))
    assert list(frame.columns) == ["model", "variable", "coef", "se",
                                   "pvalue", "stars", "n_obs", "r2",
                                   "adj_r2"]
    assert set(frame["model"]) == {"(1)", "(2)", "(3)", "(4)", "(5)"}


def test_validate_dataset_duplicate_keys():
    data = pd.DataFrame({"entity": ["A", "A"], "year": [2015, 2015],
                         "outcome": [1.0, 2.0]})
    with pytest.raises(ValidationError, match="duplicate"):
        validate_dataset(data)


def test_model_spec_validation():
    with pytest.raises(ValidationError):
        ModelSpec(kind="nope", outcome="y", controls={})
    with pytest.raises(ValidationError, match="year"):
        ModelSpec(kind="cross_section", outcome="y", controls={})
    with pytest.raises(ValidationError, match="start_year"):
        ModelSpec(kind="period_growth", outcome="y", controls={})
    with pytest.raises(ValidationError):
        ModelSpec(kind="cross_section", outcome="y",
                  controls={"mystery": ["a"]}, year=2015)
    with pytest.raises(ValidationError):
        ModelSpec(kind="cross_section", outcome="y", controls={},
                  year=2015, se_kind="HC9")
