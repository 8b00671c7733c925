"""Tests for the effective/device backends, chevron fits, and the optimizer."""

from math import pi

import numpy as np
import pytest

from pstsim import calibration
from pstsim.models import device as device_models

TWO_PI = 2.0 * pi


def _backend(noise=0.0, seed=0):
    return calibration.EffectiveBackend(
        calibration.default_effective_config(noise=noise), seed=seed
    )


# -------------------------------------------------------------- config


def test_default_config_shape():
    cfg = calibration.default_effective_config()
    assert cfg.n_drives == 5
    assert cfg.n_sites == 6
    assert cfg.tau == pytest.approx(640e-9)
    assert len(cfg.stark) == 5


def test_config_validation():
    with pytest.raises(ValueError):
        calibration.EffectiveChainConfig(0.0, (1.0,), (1.0,))
    with pytest.raises(ValueError):
        calibration.EffectiveChainConfig(1e-6, (1.0, 2.0), (1.0,))
    with pytest.raises(ValueError):
        calibration.EffectiveChainConfig(1e-6, (-1.0,), (1.0,))
    with pytest.raises(ValueError):
        calibration.EffectiveChainConfig(1e-6, (1.0,), (1.0,), stark=((1.0, 2.0),))
    with pytest.raises(ValueError):
        calibration.EffectiveChainConfig(1e-6, (1.0,), (1.0,), noise=-0.1)


# ------------------------------------------------------- pair physics


def test_resonant_pair_oscillation():
    cfg = calibration.default_effective_config()
    be = calibration.EffectiveBackend(cfg)
    pair, amp = (1, 2), 0.01
    b = be.pair_coupler(pair)
    j = cfg.coupling_slopes[b - 1] * amp
    res = cfg.resonances([amp, 0.0, 0.0, 0.0, 0.0])[b - 1]
    t = np.linspace(0.0, 2e-6, 11)
    pops = be.run_pair(pair, calibration.CouplerDrive(b, amp, res), t)
    np.testing.assert_allclose(pops[:, 1], np.sin(j * t) ** 2, atol=1e-12)
    np.testing.assert_allclose(pops.sum(axis=1), 1.0, atol=1e-12)


def test_detuned_contrast():
    cfg = calibration.default_effective_config()
    be = calibration.EffectiveBackend(cfg)
    pair, amp = (2, 3), 0.012
    b = be.pair_coupler(pair)
    j = cfg.coupling_slopes[b - 1] * amp
    res = cfg.resonances([0.0, amp, 0.0, 0.0, 0.0])[b - 1]
    delta = TWO_PI * 300e3
    rabi = np.sqrt(j * j + delta * delta / 4.0)
    t_star = pi / (2.0 * rabi)
    pops = be.run_pair_scan(pair, amp, [res + delta], [t_star])
    assert pops[0, 0] == pytest.approx(j * j / rabi**2, abs=1e-12)


def test_measurement_noise_reproducible():
    a = _backend(noise=0.02, seed=4)
    b = _backend(noise=0.02, seed=4)
    other = _backend(noise=0.02, seed=5)
    pair = (1, 2)
    t = np.linspace(0.0, 1e-6, 9)
    freqs = [TWO_PI * 440e6]
    pa = a.run_pair_scan(pair, 0.01, freqs, t)
    pb = b.run_pair_scan(pair, 0.01, freqs, t)
    pc = other.run_pair_scan(pair, 0.01, freqs, t)
    np.testing.assert_array_equal(pa, pb)
    assert not np.array_equal(pa, pc)
    assert pa.min() >= 0.0 and pa.max() <= 1.0


def test_run_pair_rejects_wrong_coupler():
    be = _backend()
    with pytest.raises(ValueError):
        be.run_pair((1, 2), calibration.CouplerDrive(3, 0.01, TWO_PI * 440e6), [0.0])


# ----------------------------------------------------------- objective


def test_transfer_objective_ideal_drives():
    be = _backend()
    ideal = calibration.ideal_drive_settings(be.config)
    assert calibration.transfer_error_objective(be, ideal) < 1e-10


def test_transfer_objective_penalizes_miscalibration():
    be = _backend()
    ideal = calibration.ideal_drive_settings(be.config)
    scaled = calibration.DriveSettings(
        tuple(a * 1.1 for a in ideal.amplitudes), ideal.frequencies
    )
    assert calibration.transfer_error_objective(be, scaled) > 0.1
    off = calibration.DriveSettings((0.0,) * 5, ideal.frequencies)
    assert calibration.transfer_error_objective(be, off) == pytest.approx(0.2, abs=1e-9)


# -------------------------------------------------------- chevron fits


def _chevron_window(cfg, pair, amp):
    b = pair[0] if pair[0] < pair[1] else pair[1]
    res = cfg.resonances([amp if i == b - 1 else 0.0 for i in range(5)])[b - 1]
    freqs = res + TWO_PI * np.linspace(-1.2e6, 1.2e6, 21)
    times = np.linspace(0.0, 1.2e-6, 41)
    return res, freqs, times


def test_fit_chevron_noiseless_recovery():
    cfg = calibration.default_effective_config()
    be = calibration.EffectiveBackend(cfg)
    pair, amp = (2, 3), 0.012
    j = cfg.coupling_slopes[1] * amp
    res, freqs, times = _chevron_window(cfg, pair, amp)
    # multi-antinode window: the rate guess must lock to the first peak
    data = calibration.chevron_scan(be, pair, [amp], freqs, times)
    fit = calibration.fit_chevron(data)
    assert fit.coupling == pytest.approx(j, rel=1e-9)
    assert fit.resonance == pytest.approx(res, abs=1.0)
    assert fit.contrast == pytest.approx(1.0, abs=1e-6)
    assert fit.residual < 1e-9


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fit_chevron_noisy_recovery(seed):
    cfg = calibration.default_effective_config(noise=0.01)
    be = calibration.EffectiveBackend(cfg, seed=seed)
    pair, amp = (2, 3), 0.012
    j = cfg.coupling_slopes[1] * amp
    _, freqs, times = _chevron_window(cfg, pair, amp)
    data = calibration.chevron_scan(be, pair, [amp], freqs, times)
    fit = calibration.fit_chevron(data)
    assert abs(fit.coupling - j) / j < 0.02


def test_fit_chevron_residual_threshold():
    be = _backend(noise=0.01, seed=0)
    cfg = be.config
    _, freqs, times = _chevron_window(cfg, (2, 3), 0.012)
    data = calibration.chevron_scan(be, (2, 3), [0.012], freqs, times)
    with pytest.raises(calibration.FitError):
        calibration.fit_chevron(data, residual_threshold=1e-6)


def test_fit_chevron_amplitude_index():
    be = _backend()
    cfg = be.config
    _, freqs, times = _chevron_window(cfg, (2, 3), 0.012)
    data = calibration.chevron_scan(be, (2, 3), [0.01, 0.012], freqs, times)
    with pytest.raises(ValueError):
        calibration.fit_chevron(data)
    fit = calibration.fit_chevron(data, amplitude_index=1)
    assert fit.coupling == pytest.approx(cfg.coupling_slopes[1] * 0.012, rel=1e-9)


# ----------------------------------------------------- coupling curves


def test_coupling_curve_is_linear():
    be = _backend()
    cfg = be.config
    _, freqs, times = _chevron_window(cfg, (2, 3), 0.012)
    amps = np.linspace(0.006, 0.014, 5)
    curve = calibration.measure_coupling_curve(be, (2, 3), amps, freqs, times)
    np.testing.assert_allclose(curve[1], cfg.coupling_slopes[1] * curve[0], rtol=1e-6)


def test_amplitude_for_target_inversion():
    be = _backend()
    cfg = be.config
    _, freqs, times = _chevron_window(cfg, (2, 3), 0.012)
    amps = np.linspace(0.006, 0.014, 5)
    curve = calibration.measure_coupling_curve(be, (2, 3), amps, freqs, times)
    target = cfg.coupling_slopes[1] * 0.0103
    assert calibration.amplitude_for_target(target, curve) == pytest.approx(
        0.0103, abs=1e-6
    )
    with pytest.raises(calibration.TargetRangeError):
        calibration.amplitude_for_target(cfg.coupling_slopes[1] * 0.02, curve)
    with pytest.raises(ValueError):
        calibration.amplitude_for_target(
            1.0, (np.array([1.0, 2.0, 3.0]), np.array([1.0, 3.0, 2.0]))
        )


# ------------------------------------------------------------- perturb


def test_perturb_drives_bounds_and_determinism():
    cfg = calibration.default_effective_config()
    ideal = calibration.ideal_drive_settings(cfg)
    assert calibration.perturb_drives(ideal, 7) == calibration.perturb_drives(ideal, 7)
    assert calibration.perturb_drives(ideal, 7) != calibration.perturb_drives(ideal, 8)
    for seed in range(5):
        p = calibration.perturb_drives(ideal, seed)
        rel = np.abs(np.array(p.amplitudes) / np.array(ideal.amplitudes) - 1.0)
        df = np.abs(np.array(p.frequencies) - np.array(ideal.frequencies))
        assert rel.max() <= 0.2
        assert df.max() <= TWO_PI * 200e3


# ----------------------------------------------------------- optimizer


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        calibration.OptimizerConfig(budget=0)
    with pytest.raises(ValueError):
        calibration.OptimizerConfig(amplitude_halfwidth=1.5)
    with pytest.raises(ValueError):
        calibration.OptimizerConfig(frequency_halfwidth=0.0)


def test_optimizer_deterministic_and_consistent():
    be = _backend()
    guess = calibration.perturb_drives(calibration.ideal_drive_settings(be.config), 5)
    cfg = calibration.OptimizerConfig(budget=60, seed=9)
    a = calibration.optimize_simultaneous_drives(be, guess, cfg)
    b = calibration.optimize_simultaneous_drives(be, guess, cfg)
    assert a.amplitudes == b.amplitudes
    assert a.history == b.history
    assert a.best_objective == min(h["objective"] for h in a.history)
    assert a.evaluations == len(a.history) == 60
    assert a.budget_exhausted


def test_optimizer_stops_at_target():
    be = _backend()
    ideal = calibration.ideal_drive_settings(be.config)
    r = calibration.optimize_simultaneous_drives(
        be, ideal, calibration.OptimizerConfig(budget=50, seed=0, target=1e-6)
    )
    assert r.evaluations == 1
    assert not r.budget_exhausted
    assert r.best_objective < 1e-6


def test_optimizer_single_point_budget():
    be = _backend()
    guess = calibration.perturb_drives(calibration.ideal_drive_settings(be.config), 5)
    r = calibration.optimize_simultaneous_drives(
        be, guess, calibration.OptimizerConfig(budget=1, seed=3)
    )
    assert r.evaluations == 1
    assert r.budget_exhausted
    assert r.amplitudes == guess.amplitudes


@pytest.mark.parametrize("seed", [0, 1])
def test_optimizer_recovers_from_miscalibration(seed):
    be = _backend()
    ideal = calibration.ideal_drive_settings(be.config)
    guess = calibration.perturb_drives(ideal, 100 + seed)
    r = calibration.optimize_simultaneous_drives(
        be, guess, calibration.OptimizerConfig(budget=500, seed=seed)
    )
    assert r.best_objective < 0.02


def test_convergence_csv(tmp_path):
    be = _backend()
    guess = calibration.perturb_drives(calibration.ideal_drive_settings(be.config), 5)
    r = calibration.optimize_simultaneous_drives(
        be, guess, calibration.OptimizerConfig(budget=40, seed=2)
    )
    path = tmp_path / "conv.csv"
    calibration.write_convergence_csv(r, path)
    lines = path.read_text().splitlines()
    assert lines[0] == (
        "evaluation,objective,running_min,"
        "amplitude_1,amplitude_2,amplitude_3,amplitude_4,amplitude_5,"
        "frequency_1,frequency_2,frequency_3,frequency_4,frequency_5"
    )
    assert len(lines) == 41
    running = [float(l.split(",")[2]) for l in lines[1:]]
    assert all(b <= a for a, b in zip(running, running[1:]))
    assert running[-1] == pytest.approx(r.best_objective, rel=1e-9)


# ------------------------------------------------------------ strategy


def test_search_strategy_clips_and_tracks_best():
    s = calibration.ShrinkingGaussianSearch(dim=3, sigma=2.0, floor=1.0, decay=1.0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        assert np.all(np.abs(s.propose(rng)) <= 1.0)
    tight = calibration.ShrinkingGaussianSearch(dim=3, sigma=1e-3, floor=1e-4)
    incumbent = np.array([0.5, -0.2, 0.1])
    tight.update(incumbent, 0.1)
    tight.update(np.array([0.9, 0.9, 0.9]), 0.5)  # worse, ignored
    for _ in range(20):
        assert np.max(np.abs(tight.propose(rng) - incumbent)) < 0.05


# ------------------------------------------------------- device backend


def test_device_backend_resource_guard():
    with pytest.raises(device_models.ResourceError):
        calibration.DeviceBackend(chain_qubits=(1, 2, 3, 4))


def test_device_backend_pair_run_deterministic():
    db = calibration.DeviceBackend()
    pair = (1, 2)
    j = db.pair_coupler(pair)
    t = np.linspace(0.0, 30e-9, 4)
    drive = calibration.CouplerDrive(j, 0.01, TWO_PI * 447e6)
    a = db.run_pair(pair, drive, t)
    b = db.run_pair(pair, drive, t)
    assert np.all(np.isfinite(a))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (4, 2)
    assert a[0, 0] == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        db.run_pair(pair, calibration.CouplerDrive(j + 1, 0.01, TWO_PI * 447e6), t)
