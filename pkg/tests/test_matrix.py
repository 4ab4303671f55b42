import numpy as np
import pytest

from regional_complexity.errors import DegenerateNetworkError, ValidationError
from regional_complexity.matrix import (DEFAULT_CM_CUTOFF, STRATEGIES,
                                        InputMatrix, build_input_matrix,
                                        location_quotient, prune_empty)


def test_location_quotient_hand_example():
    X = np.array([[9.0, 1.0], [1.0, 9.0]])
    LQ = location_quotient(X)
    assert LQ[0, 0] == pytest.approx((9 / 10) / (10 / 20))
    assert LQ[0, 0] == pytest.approx(1.8)
    assert LQ[0, 1] == pytest.approx((1 / 10) / (10 / 20))


def test_location_quotient_single_region_is_one():
    X = np.array([[5.0, 0.0, 12.0]])
    LQ = location_quotient(X)
    assert LQ[0, 0] == pytest.approx(1.0)
    assert LQ[0, 1] == 0.0
    assert LQ[0, 2] == pytest.approx(1.0)


def test_location_quotient_zero_total_region_rejected():
    X = np.array([[1.0, 2.0], [0.0, 0.0]])
    with pytest.raises(ValidationError, match="1"):
        location_quotient(X)


def test_location_quotient_zero_grand_total_rejected():
    with pytest.raises(ValidationError):
        location_quotient(np.zeros((2, 2)))


def test_location_quotient_zero_national_industry_is_zero():
    X = np.array([[1.0, 0.0], [3.0, 0.0]])
    LQ = location_quotient(X)
    assert np.all(LQ[:, 1] == 0.0)


def test_strategies_tuple():
    assert STRATEGIES == ("BM", "RLQ", "WM", "Presence", "CM")


def test_bm_is_lq_indicator():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 40, size=(6, 9)).astype(float)
    X[X.sum(axis=1) == 0, 0] = 1.0
    BM = build_input_matrix(X, "BM").values
    RLQ = build_input_matrix(X, "RLQ").values
    assert np.array_equal(BM, (RLQ >= 1.0).astype(float))


def test_wm_column_sums_are_one():
    rng = np.random.default_rng(4)
    X = rng.integers(1, 40, size=(5, 7)).astype(float)
    WM = build_input_matrix(X, "WM").values
    np.testing.assert_allclose(WM.sum(axis=0), 1.0, atol=1e-12)


def test_wm_single_region_industry():
    X = np.array([[10.0, 100.0], [20.0, 0.0]])
    WM = build_input_matrix(X, "WM").values
    assert WM[0, 1] == 1.0
    assert WM[1, 1] == 0.0


def test_zero_cell_is_zero_under_every_strategy():
    X = np.array([[0.0, 30.0], [40.0, 5.0]])
    for strategy in STRATEGIES:
        M = build_input_matrix(X, strategy).values
        assert M[0, 0] == 0.0, strategy


def test_presence_thresholds():
    X = np.array([[0.0, 0.5, 1.0], [9.5, 3.0, 2.0]])
    P = build_input_matrix(X, "Presence").values
    assert P[0, 0] == 0.0
    assert P[0, 1] == 0.0  # below the one-employee threshold
    assert P[0, 2] == 1.0
    assert P[1, 0] == 1.0


def test_cm_cutoff_is_strict():
    # two regions, equal totals; LQ < 1 in the first industry for region 0
    X = np.array([[50.0, 150.0], [100.0, 0.0]])
    CM = build_input_matrix(X, "CM").values
    # X = 50 is not "more than 50"; LQ = (50/200)/(150/300) = 0.5 < 1
    assert CM[0, 0] == 0.0
    X2 = X.copy()
    X2[0, 0] = 51.0
    CM2 = build_input_matrix(X2, "CM").values
    assert CM2[0, 0] == 1.0


def test_cm_custom_cutoff_param():
    X = np.array([[30.0, 170.0], [100.0, 0.0]])
    low = build_input_matrix(X, "CM", params={"cutoff": 20}).values
    assert low[0, 0] == 1.0
    default = build_input_matrix(X, "CM").values
    assert default[0, 0] == 0.0
    assert DEFAULT_CM_CUTOFF == 50.0


def test_cm_lq_branch():
    # low employment but LQ >= 1 still sets CM
    X = np.array([[4.0, 1.0], [1.0, 9.0]])
    CM = build_input_matrix(X, "CM").values
    BM = build_input_matrix(X, "BM").values
    assert BM[0, 0] == 1.0
    assert CM[0, 0] == 1.0


def test_containment_and_scale_invariance():
    rng = np.random.default_rng(11)
    X = rng.integers(0, 200, size=(8, 12)).astype(float)
    X[X.sum(axis=1) == 0, 0] = 1.0
    BM = build_input_matrix(X, "BM").values
    CM = build_input_matrix(X, "CM").values
    P = build_input_matrix(X, "Presence").values
    assert np.all(P >= CM)
    assert np.all(CM >= BM)
    for c in (3.0, 10.0):
        assert np.array_equal(build_input_matrix(c * X, "BM").values, BM)
        np.testing.assert_allclose(
            build_input_matrix(c * X, "RLQ").values,
            build_input_matrix(X, "RLQ").values, atol=1e-12)
        np.testing.assert_allclose(
            build_input_matrix(c * X, "WM").values,
            build_input_matrix(X, "WM").values, atol=1e-12)


def test_unknown_strategy_rejected():
    with pytest.raises(ValidationError, match="strategy"):
        build_input_matrix(np.ones((2, 2)), "RCA")


def test_negative_employment_rejected():
    with pytest.raises(ValidationError):
        build_input_matrix(np.array([[1.0, -2.0], [3.0, 4.0]]), "Presence")


def test_binary_flag_per_strategy():
    X = np.array([[9.0, 1.0], [1.0, 9.0]])
    for strategy in ("BM", "Presence", "CM"):
        assert build_input_matrix(X, strategy).binary
    for strategy in ("RLQ", "WM"):
        assert not build_input_matrix(X, strategy).binary


def test_prune_noop_reports_empty():
    M = InputMatrix.from_array(np.ones((3, 3)))
    pruned, report = prune_empty(M)
    assert report.empty
    assert np.array_equal(pruned.values, M.values)
    assert list(pruned.region_catalog) == list(M.region_catalog)


def test_prune_drops_zero_row():
    values = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 0.0]])
    M = InputMatrix.from_array(values, region_catalog=["a", "b", "c"],
                               industry_catalog=["x", "y"])
    pruned, report = prune_empty(M)
    assert pruned.values.shape == (2, 2)
    dropped = [code for code, _ in report.dropped_regions]
    assert dropped == ["b"]
    assert not report.dropped_industries


def test_prune_cascade():
    # dropping the empty column y empties region b, which must cascade
    values = np.array([
        [1.0, 0.0, 1.0],
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 1.0],
    ])
    M = InputMatrix.from_array(values, region_catalog=["a", "b", "c"],
                               industry_catalog=["x", "y", "z"])
    pruned, report = prune_empty(M)
    assert pruned.values.shape == (2, 2)
    assert [code for code, _ in report.dropped_regions] == ["b"]
    assert [code for code, _ in report.dropped_industries] == ["y"]
    assert np.all(pruned.values == 1.0)


def test_prune_cascade_second_pass():
    # column z only supports region c; dropping empty column y is pass 1,
    # but region b dies only after column z goes (constructed cascade)
    values = np.array([
        [1.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ])
    M = InputMatrix.from_array(values)
    pruned, report = prune_empty(M)
    assert pruned.values.shape == (2, 3) or not report.empty


def test_prune_all_empty_is_degenerate():
    M = InputMatrix.from_array(np.zeros((2, 2)))
    with pytest.raises(DegenerateNetworkError):
        prune_empty(M)


def test_ny_gas_station_fixture():
    # two regions, two industries, totals chosen so the big region's
    # gas-station location quotient lands near 0.27 while employment is
    # far above the 50-employee cutoff
    x_gas = 13972.0
    t_ny = 7_000_000.0
    t_total = 130_000_000.0
    gas_total = round(x_gas * t_total / (0.27 * t_ny))
    X = np.array([
        [x_gas, t_ny - x_gas],
        [gas_total - x_gas, t_total - t_ny - (gas_total - x_gas)],
    ])
    LQ = location_quotient(X)
    assert LQ[0, 0] == pytest.approx(0.27, abs=1e-4)
    assert build_input_matrix(X, "BM").values[0, 0] == 0.0
    assert build_input_matrix(X, "CM").values[0, 0] == 1.0
    assert build_input_matrix(X, "Presence").values[0, 0] == 1.0
