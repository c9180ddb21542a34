"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import calibra


def test_qmatrix_is_orthonormal_and_centered():
    q = calibra.qmatrix(4)
    assert q.shape == (4, 3)
    assert np.allclose(q.T @ q, np.eye(3), atol=1e-12)
    assert np.allclose(q.sum(axis=0), 0.0, atol=1e-12)


def test_contrast_matrix_sum_coding():
    c = calibra.contrast_matrix("sum", 2)
    assert np.allclose(c.ravel(), [1.0, -1.0])
    tgm = calibra.contrast_matrix("treatment-grand-mean", 3)
    # Columns sum to zero against the grand-mean intercept row.
    assert tgm.shape == (3, 2)


def test_presets_and_dataset_row_counts():
    names = calibra.preset_names()
    assert "sim1_1" in names and "gibson_wu" in names and "toy" in names
    data = calibra.simulate_dataset("sim1_1")
    assert len(data["y"]) == 600
    data2 = calibra.simulate_dataset("gibson_wu")
    assert len(data2["y"]) == 672
    assert min(data2["y"]) > 0  # lognormal responses


def test_scenario_json_round_trip():
    js = calibra.scenario_json("sim1_1_desk")
    assert '"sim1_1_desk"' in js
    data = calibra.simulate_dataset(js, seed=5)
    assert len(data["y"]) == 10 * 3 * 5


def test_jzs_ttest_direction():
    null = [(-1.0) ** i for i in range(40)]
    bf_null, log_bf_null, _ = calibra.jzs_ttest_bf(null)
    assert bf_null < 1.0
    shifted = [x + 1.5 for x in null]
    bf_alt, log_bf_alt, _ = calibra.jzs_ttest_bf(shifted)
    assert bf_alt > 10.0
    assert log_bf_alt > log_bf_null
    assert math.isclose(bf_alt, math.exp(log_bf_alt), rel_tol=1e-9)


def test_posterior_model_prob():
    assert math.isclose(calibra.posterior_model_prob(3.0, 0.5), 0.75)
    assert math.isclose(calibra.posterior_model_prob(4.0, 0.2), 0.5)


def test_min_f():
    value, df = calibra.min_f(8.0, 19.0, 8.0, 19.0)
    assert math.isclose(value, 4.0)
    assert math.isclose(df, 38.0)
    value0, df0 = calibra.min_f(0.0, 10.0, 0.0, 10.0)
    assert value0 == 0.0 and df0 is None


def test_run_sbc_toy_recovers_prior_and_is_deterministic():
    rec1 = calibra.run_sbc("toy", n_sims=300, seed=42)
    rec2 = calibra.run_sbc("toy", n_sims=300, seed=42, jobs=2)
    assert rec1["post_p1"] == rec2["post_p1"]
    mean_post = sum(rec1["post_p1"]) / len(rec1["post_p1"])
    assert abs(mean_post - 0.5) < 2.576 * 0.5 / math.sqrt(300)


def test_summarize_sbc_shape():
    rows = calibra.summarize_sbc("toy", n_sims=50, seed=1)
    assert len(rows) == 1
    assert rows[0]["n"] == 50
    assert 0.0 <= rows[0]["mean_post_p1"] <= 1.0


def test_bad_scenario_raises():
    with pytest.raises(Exception):
        calibra.simulate_dataset('{"name": "x", "bogus": 1}')
