import numpy as np
import pandas as pd
import pytest

from regional_complexity.complexity import eci
from regional_complexity.diagnostics import (correlate, export_heatmap,
                                             group_summary,
                                             order_for_triangularity,
                                             read_heatmap_triplets, top_bottom,
                                             triangularity_violations)
from regional_complexity.errors import ValidationError
from regional_complexity.matrix import InputMatrix, build_input_matrix
from regional_complexity.synth import generate_nested


def test_ordering_identity_on_nested():
    M = generate_nested(5, 5)
    view = order_for_triangularity(M)
    assert np.array_equal(view.region_order, np.arange(5))
    assert np.array_equal(view.industry_order, np.arange(5))
    assert np.array_equal(view.values, M)


def test_ordering_reverses_reversed_nested():
    M = generate_nested(6, 6)
    reversed_M = M[::-1, :]
    view = order_for_triangularity(reversed_M)
    assert np.array_equal(view.region_order, np.arange(6)[::-1])
    assert np.array_equal(view.values, np.tril(np.ones((6, 6))))


def test_ordering_idempotent():
    rng = np.random.default_rng(0)
    M = (rng.random((7, 9)) < 0.5).astype(float)
    M[M.sum(axis=1) == 0, 0] = 1.0
    M[0, M.sum(axis=0) == 0] = 1.0
    once = order_for_triangularity(M)
    twice = order_for_triangularity(once.values)
    assert np.array_equal(twice.region_order, np.arange(7))
    assert np.array_equal(twice.industry_order, np.arange(9))


def test_ordering_stable_under_ties():
    # identical diversities and totals: catalog order must survive
    M = np.array([[1.0, 0.0], [0.0, 1.0]])
    view = order_for_triangularity(M)
    assert np.array_equal(view.region_order, [0, 1])


def test_ordering_triangular_for_every_nested_size():
    for n in (3, 8, 13):
        view = order_for_triangularity(generate_nested(n, n))
        assert triangularity_violations(view) == 0


def test_violations_positive_on_checkerboard():
    M = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
    view = order_for_triangularity(M)
    assert triangularity_violations(view) > 0


def test_rlq_view_top_coded(tmp_path):
    # region 1 is fully specialized in a nationally rare industry
    X = np.array([[5.0, 95.0], [1.0, 0.0]])
    M = build_input_matrix(X, "RLQ")
    assert M.values.max() > 10.0
    view = order_for_triangularity(M)
    assert view.values.max() == pytest.approx(10.0)


def test_svg_has_one_rect_per_nonzero_cell(tmp_path):
    M = InputMatrix.from_array(generate_nested(3, 3), strategy="BM")
    view = order_for_triangularity(M)
    path = tmp_path / "heat.svg"
    export_heatmap(view, path, format="svg")
    text = path.read_text()
    assert text.count("<rect") == 6
    assert "svg" in text


def test_heatmap_triplet_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    M = rng.random((5, 6)) * (rng.random((5, 6)) < 0.6)
    M[M.sum(axis=1) == 0, 0] = 0.5
    M[0, M.sum(axis=0) == 0] = 0.5
    view = order_for_triangularity(M)
    path = tmp_path / "heat.csv"
    export_heatmap(view, path, format="triplet-csv")
    rebuilt = read_heatmap_triplets(path, view.values.shape)
    np.testing.assert_allclose(rebuilt, view.values, rtol=1e-10)


def test_heatmap_unknown_format(tmp_path):
    view = order_for_triangularity(generate_nested(3, 3))
    with pytest.raises(ValidationError):
        export_heatmap(view, tmp_path / "x", format="")


def test_correlate_self_is_one():
    a = np.array([1.0, 2.0, 5.0, 3.0])
    assert correlate(a, a) == pytest.approx(1.0)


def test_correlate_perfect_negative():
    assert correlate(np.array([1.0, 2.0, 3.0]),
                     np.array([6.0, 4.0, 2.0])) == pytest.approx(-1.0)


def test_correlate_symmetry_and_affine_invariance():
    rng = np.random.default_rng(2)
    a = rng.normal(size=20)
    b = rng.normal(size=20)
    assert correlate(a, b) == correlate(b, a)
    assert correlate(2.0 * a + 7.0, b) == pytest.approx(correlate(a, b), abs=1e-12)
    assert correlate(a, 0.5 * b - 3.0) == pytest.approx(correlate(a, b), abs=1e-12)


def test_correlate_log_transform():
    rng = np.random.default_rng(3)
    a = rng.normal(size=30)
    fi = np.exp(a + 0.05 * rng.normal(size=30))
    assert correlate(a, fi, transform_b="log") > correlate(a, fi)
    with pytest.raises(ValidationError):
        correlate(a, np.concatenate([fi[:-1], [-1.0]]), transform_b="log")


def test_correlate_inner_join_on_series():
    a = pd.Series([1.0, 2.0, 3.0, 4.0], index=["a", "b", "c", "d"])
    b = pd.Series([8.0, 6.0, 4.0, 2.0], index=["b", "c", "d", "e"])
    assert correlate(a, b) == pytest.approx(-1.0)


def test_correlate_rejects_short_and_constant():
    with pytest.raises(ValidationError):
        correlate(np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValidationError):
        correlate(np.array([1.0, 1.0, 1.0]), np.array([1.0, 2.0, 3.0]))


def test_correlate_spearman_flag():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    b = np.array([1.0, 10.0, 100.0, 1000.0])
    assert correlate(a, b, method="spearman") == pytest.approx(1.0)


def test_group_summary_means_and_counts():
    scores = pd.Series([1.0, 2.0, 3.0, 10.0], index=["a", "b", "c", "d"])
    attributes = {"a": "traded", "b": "traded", "c": "local"}
    summary = group_summary(scores, attributes)
    frame = summary.as_frame().set_index("group")
    assert frame.loc["traded", "count"] == 2
    assert frame.loc["traded", "mean"] == pytest.approx(1.5)
    assert frame.loc["local", "count"] == 1
    assert frame.loc["unclassified", "mean"] == pytest.approx(10.0)


def test_group_weighted_means_average_to_zero():
    M = generate_nested(9, 9)
    scores = eci(M)
    groups = {i: ("low" if i < 4 else "high") for i in range(9)}
    summary = group_summary(pd.Series(scores.region_scores), groups)
    total = sum(count * mean for _, count, mean, _ in summary.rows)
    assert abs(total) < 1e-9


def test_top_bottom_nested_rarest_first():
    M = generate_nested(6, 6)
    scores = eci(M)
    table = top_bottom(pd.Series(scores.industry_scores,
                                 index=[f"I{j}" for j in range(6)]), 2)
    top = table[table["end"] == "top"]
    # industry 5 is hosted only by the most diverse region
    assert top.iloc[0]["code"] == "I5"
    assert list(top["rank"]) == [1, 2]
    bottom = table[table["end"] == "bottom"]
    assert bottom.iloc[0]["code"] == "I0"


def test_top_bottom_full_ranking_monotone():
    scores = pd.Series([0.3, -1.2, 2.0, 0.0], index=list("abcd"))
    table = top_bottom(scores, 4)
    top = table[table["end"] == "top"]["score"].to_numpy()
    assert np.all(np.diff(top) <= 0)


def test_top_bottom_rejects_overlong():
    with pytest.raises(ValidationError):
        top_bottom(pd.Series([1.0, 2.0]), 3)
