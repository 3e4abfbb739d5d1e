"""End-to-end smoke tests for the python module and the command-line tool."""

import json
import os
import shutil
import subprocess

import numpy as np
import pytest

cw = pytest.importorskip("convex_wgan")


def relu(t):
    return np.maximum(t, 0.0)


def test_svt_norm_identity_and_certificate():
    x = np.diag([2.0, 1.0])
    g = cw.svt_generator(x, 1.0)
    assert np.linalg.norm(g) ** 2 == pytest.approx(3.0, abs=1e-10)
    report = cw.check_feasible(x, g, activation="quadratic", beta=1.0)
    assert report["gap"] <= 1.0 + 1e-8


def test_line_program_endpoints():
    w = cw.solve_1d_relu_program([-1.0, 1.0], 0.1)
    assert w == pytest.approx([-0.9, 0.9], abs=1e-4)
    assert cw.constraint_violation_1d([-1.0, 1.0], 0.1, w) <= 1e-6
    collapsed = cw.solve_1d_relu_program([-1.0, 1.0], 1.0)
    assert np.max(np.abs(collapsed)) <= 1e-4


def test_two_layer_recovery_roundtrip():
    rng = np.random.default_rng(5)
    z = rng.standard_normal((5, 2))
    u = rng.standard_normal(2)
    v = rng.standard_normal(2)
    target = np.outer(relu(z @ u), v)
    rec = cw.recover_two_layer(z, target)
    assert rec["complete"]
    out = relu(z @ rec["first_layer"]) @ rec["second_layer"]
    assert np.max(np.abs(out - target)) <= 1e-6


def test_latent_weights_match_direct_spectrum():
    rng = np.random.default_rng(9)
    z = rng.standard_normal((8, 4))
    x = rng.standard_normal((6, 3))
    beta = cw.beta_for_rank(x, 2)
    assert cw.thresholded_rank(x, beta) == 2
    w = cw.closed_form_linear_weights(z, x, beta)
    direct = cw.svt_generator(x, beta)
    assert np.linalg.norm(z @ w) ** 2 == pytest.approx(
        np.linalg.norm(direct) ** 2, abs=1e-8
    )


def test_polynomial_lift_width():
    z = np.random.default_rng(3).standard_normal((4, 3))
    lifted = cw.polynomial_lift(z, 1.0, 0.5, 0.25)
    assert lifted.shape == (4, 3 * 3 + 3 + 1)


def test_sampled_gap_is_a_lower_bound():
    x = np.diag([2.0, 1.0])
    g = cw.svt_generator(x, 1.0)
    sampled = cw.dual_gap_sampled(x, g, activation="quadratic", samples=20000)
    assert sampled <= 1.0 + 1e-9


def test_errors_carry_their_kind():
    with pytest.raises(cw.Error, match="DimensionMismatch"):
        cw.downsample(np.zeros((2, 16)), (4, 3), 2)


def test_staged_pipeline_certificates_and_means():
    rng = np.random.default_rng(11)
    data = rng.standard_normal((16, 16)) * 3.0 + 5.0  # 16 images of 4x4
    centered = data - data.mean(axis=0)
    b1 = cw.beta_for_rank(cw.downsample(centered, (4, 4), 2), 2)
    b2 = cw.beta_for_rank(centered, 2)
    res = cw.run_pipeline(
        data,
        stages=[(2, 2, b1), (4, 4, b2)],
        latent_dim=8,
        sample_count=16,
        seed=3,
    )
    assert res["stage_gaps"][0] <= b1 + 1e-6
    assert res["stage_gaps"][1] <= b2 + 1e-6
    final = res["final_images"]
    assert final.shape == (16, 16)
    assert np.max(np.abs(final.mean(axis=0) - data.mean(axis=0))) <= 1e-7


def test_histogram_match_and_covariance_distance():
    gen = np.arange(8.0).reshape(4, 2)
    matched = cw.histogram_match(gen, 2.0 * gen)
    assert matched == pytest.approx(2.0 * gen)
    assert cw.covariance_spectral_distance(gen, gen) == pytest.approx(0.0, abs=1e-12)


def test_line_experiment_converges_on_a_good_seed():
    run = cw.run_two_point_line(1)
    assert run["distance_to_target"] <= 0.1
    assert len(run["disc_losses"]) == 8000


def test_frozen_game_matches_the_line_program():
    x = np.array([[-1.0], [1.0]])
    z = np.array([[-1.0], [1.0]])
    res = cw.solve_game(x, z, np.array([[1.0]]), 0.1, level=1.0, cross=True)
    assert res["residual"] < 1e-3
    assert res["objective"] == pytest.approx(0.81, abs=1e-3)


# --------------------------------------------------------------------- CLI

def cli_binary():
    return os.environ.get("CWGAN_CLI") or shutil.which("convex-wgan")


@pytest.mark.skipif(cli_binary() is None, reason="command-line binary not found")
def test_cli_toy1d_and_svt(tmp_path):
    cli = cli_binary()
    out = tmp_path / "toy"
    proc = subprocess.run(
        [cli, "toy1d", "--x", "-1,1", "--beta", "0.1", "--out-dir", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    result = json.loads((out / "toy1d_result.json").read_text())
    assert result["metrics"]["w_0"] == pytest.approx(-0.9, abs=1e-4)
    assert result["metrics"]["w_1"] == pytest.approx(0.9, abs=1e-4)

    data = tmp_path / "x.csv"
    data.write_text("# 2 2\n2,0\n0,1\n")
    out2 = tmp_path / "svt"
    proc = subprocess.run(
        [cli, "svt", "--x-file", str(data), "--beta", "1", "--out-dir", str(out2)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    result = json.loads((out2 / "svt_result.json").read_text())
    assert result["metrics"]["frobenius_sq"] == pytest.approx(3.0, abs=1e-8)
    assert result["metrics"]["gap"] <= 1.0 + 1e-8
