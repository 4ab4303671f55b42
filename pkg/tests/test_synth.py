import numpy as np
import pytest
from scipy import stats

from regional_complexity.errors import ValidationError
from regional_complexity.matrix import InputMatrix, prune_empty
from regional_complexity.synth import (generate_capability_model,
                                       generate_nested)


def test_nested_3x3_lower_triangular():
    M = generate_nested(3, 3)
    assert np.array_equal(M, np.tril(np.ones((3, 3))))
    assert np.array_equal(M.sum(axis=1), [1.0, 2.0, 3.0])


def test_nested_single_region_full_row():
    M = generate_nested(1, 5)
    assert np.array_equal(M, np.ones((1, 5)))


def test_nested_rectangular_shapes():
    for m, n in ((3, 7), (7, 3), (10, 10)):
        M = generate_nested(m, n)
        assert M.shape == (m, n)
        div = M.sum(axis=1)
        assert np.all(np.diff(div) >= 0)
        assert div[0] >= 1
        assert div[-1] == n
        # every row is a prefix of industries
        for row in M:
            ones = np.flatnonzero(row)
            assert np.array_equal(ones, np.arange(len(ones)))


def test_nested_invariant_under_prune():
    M = generate_nested(6, 9)
    pruned, report = prune_empty(InputMatrix.from_array(M))
    assert report.empty
    assert np.array_equal(pruned.values, M)


def test_nested_rejects_empty_dims():
    with pytest.raises(ValidationError):
        generate_nested(0, 3)
    with pytest.raises(ValidationError):
        generate_nested(3, 0)


def test_capability_full_matrix():
    model, M = generate_capability_model(4, 6, n_capabilities=1,
                                         p_region=1.0, p_industry=1.0, seed=5)
    assert np.array_equal(M, np.ones((4, 6)))
    assert np.array_equal(model.capability_counts(), np.ones(4))


def test_capability_deterministic_per_seed():
    a = generate_capability_model(30, 20, 4, 0.5, 0.5, seed=42)
    b = generate_capability_model(30, 20, 4, 0.5, 0.5, seed=42)
    assert np.array_equal(a[1], b[1])
    assert np.array_equal(a[0].region_capability, b[0].region_capability)
    c = generate_capability_model(30, 20, 4, 0.5, 0.5, seed=43)
    assert not np.array_equal(a[1], c[1])


def test_capability_presence_is_subset_coverage():
    model, M = generate_capability_model(25, 15, 3, 0.5, 0.5, seed=7)
    RC = model.region_capability.astype(int)
    IR = model.industry_requirement.astype(int)
    expected = (RC @ IR.T == IR.sum(axis=1)[None, :]).astype(float)
    assert np.array_equal(M, expected)


def test_capability_monotone_in_capabilities():
    model, M = generate_capability_model(20, 30, 4, 0.4, 0.4, seed=9)
    RC = model.region_capability.astype(int).copy()
    r = int(np.argmin(RC.sum(axis=1)))
    missing = np.flatnonzero(RC[r] == 0)
    if missing.size == 0:
        pytest.skip("every region already has every capability")
    RC[r, missing[0]] = 1
    IR = model.industry_requirement.astype(int)
    augmented = (RC @ IR.T == IR.sum(axis=1)[None, :]).astype(float)
    assert np.all(augmented[r] >= M[r])


def test_capability_count_tracks_diversity():
    model, M = generate_capability_model(200, 100, 4, 0.5, 0.5, seed=1)
    counts = model.capability_counts()
    diversity = M.sum(axis=1)
    rho = stats.spearmanr(counts, diversity).statistic
    assert rho > 0


def test_capability_rejects_bad_probabilities():
    for p_region, p_industry in ((0.0, 0.5), (1.5, 0.5), (0.5, 0.0)):
        with pytest.raises(ValidationError):
            generate_capability_model(5, 5, 2, p_region, p_industry, seed=0)


def test_capability_retry_warns_then_errors():
    # tiny probabilities make an all-zero presence matrix overwhelmingly
    # likely; the generator must warn per retry and then give up
    with pytest.raises(ValidationError, match="draws"):
        with pytest.warns(RuntimeWarning):
            generate_capability_model(2, 2, 30, 0.01, 1.0, seed=3)
