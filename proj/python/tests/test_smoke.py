import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import gplfm

SOURCE_DIR = Path(os.environ.get("GPLFM_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_kernel_realization_matches_covariance():
    tau = np.linspace(0.0, 2.5, 51)
    for p in (0, 1, 2):
        direct = gplfm.matern_eval(p, 2.0, 0.5, tau)
        via_ssm = gplfm.kernel_from_ssm(p, 2.0, 0.5, tau)
        assert np.max(np.abs(direct - via_ssm)) < 1e-10
    ssm = gplfm.kernel_to_ssm(1, 1.0, 1.0)
    assert ssm["F"].shape == (2, 2)
    assert ssm["P_inf"][0, 0] == pytest.approx(1.0)


def test_matern_p0_is_exponential():
    tau = np.array([0.0, 0.3, 1.0])
    np.testing.assert_allclose(gplfm.matern_eval(0, 3.0, 0.7, tau), 3.0 * np.exp(-tau / 0.7), rtol=1e-14)


def test_building_frequencies():
    freqs, zetas, shapes = gplfm.modal_analysis([200.0] * 10, [5e5] * 10, 0.1, 0.0005)
    assert freqs[0] == pytest.approx(1.19, abs=0.01)
    assert zetas[0] * 100 == pytest.approx(0.86, abs=0.01)
    assert shapes.shape == (10, 10)


def test_ground_motion_style_feedthrough_is_zero_without_loads():
    ssm = gplfm.state_space([1.0, 1.0], [100.0, 100.0], 0.0, 0.0, [2], [1, 2])
    assert ssm["J"][0, 0] == 0.0
    assert ssm["J"][1, 0] == pytest.approx(1.0)


def test_kalman_smoother_matches_batch_regression():
    rng = np.random.default_rng(3)
    times = 0.1 * np.arange(1, 31)
    y = np.sin(times) + 0.1 * rng.standard_normal(times.size)
    k = gplfm.kernel_to_ssm(0, 1.0, 0.8)
    a = gplfm.matrix_exponential(k["F"], 0.1)
    q = k["P_inf"] - a @ k["P_inf"] @ a.T
    res = gplfm.kalman_filter(a, k["H"], q, np.array([[0.01]]), np.zeros(1), k["P_inf"], y.reshape(-1, 1))
    for i in (0, 14, 29):
        mean, var = gplfm.gp_regress_batch(times, y, 0, 1.0, 0.8, 0.01, times[i])
        assert res["smoothed_means"][i, 0] == pytest.approx(mean, abs=1e-8)
        assert res["smoothed_variances"][i, 0] == pytest.approx(var, abs=1e-8)
    assert math.isfinite(res["nll"])


def test_invalid_kernel_raises():
    with pytest.raises(gplfm.UnsupportedKernelError):
        gplfm.kernel_to_ssm(3, 1.0, 1.0)
    with pytest.raises(gplfm.Error):
        gplfm.matern_eval(0, -1.0, 1.0, np.zeros(1))


def test_run_experiment_round_trip(tmp_path):
    config = {
        "model": {"type": "shear_building", "floors": 10},
        "inputs": [{"floor": 10, "excitation": {"type": "impact", "start": 0.5}}],
        "sensors": {"acceleration": "all"},
        "sampling": {"rate_hz": 100, "duration_s": 2},
        "noise_fraction": 0.1,
        "seed": 5,
        "method": "gplfm",
        "gplfm": {"kernels": {"family": "matern", "p": 0, "alpha2": 4e5, "lengthscale": 0.07}},
    }
    summary = gplfm.run_experiment(config, "estimate", tmp_path)
    assert summary["verb"] == "estimate"
    assert summary["diagnostics"]["detectable"] is True
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    assert on_disk["nll"] == pytest.approx(summary["nll"])
    assert (tmp_path / "estimates_force.csv").exists()


def test_run_experiment_from_file(tmp_path):
    summary = gplfm.run_experiment(str(SOURCE_DIR / "configs" / "random_akf.json"), "diagnose", tmp_path)
    assert summary["diagnostics"]["detectable"] is False


def test_config_errors_surface_as_exceptions(tmp_path):
    with pytest.raises(gplfm.Error, match="bogus"):
        gplfm.run_experiment({"bogus": 1}, "simulate", tmp_path)
