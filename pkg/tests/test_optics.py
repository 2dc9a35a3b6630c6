import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symclone.optics import (
    BeamGeometry,
    FrequencyMismatchError,
    FwmConfig,
    OpticalMode,
    fwm_outputs,
    modulated_run,
    phase_match_residual,
    phase_match_status,
    pump_noise_series,
    quadrature_is_symplectic,
    quadrature_map_check,
    quadrature_matrix,
)

complexes = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


def test_unit_gain_clone_and_anticlone():
    geom = BeamGeometry.collinear(1.0)
    clone, anti = fwm_outputs(OpticalMode(geom.k1, 1 + 2j, 1.0), FwmConfig(), geom)
    assert clone.A == 1 + 2j
    assert anti.A == 1 - 2j
    assert np.array_equal(anti.kvec, -geom.k1)
    assert np.array_equal(clone.kvec, geom.k3)


def test_zero_signal():
    geom = BeamGeometry.collinear(1.0)
    clone, anti = fwm_outputs(OpticalMode(geom.k1, 0, 1.0), FwmConfig(), geom)
    assert clone.A == 0 and anti.A == 0


def test_raw_gains():
    cfg = FwmConfig(A2=2, A3=3j, chi3=1.0, eps0=1.0, normalize=False)
    assert cfg.g_anticlone == 6j
    assert cfg.g_clone == 6j
    geom = BeamGeometry.collinear(1.0)
    clone, anti = fwm_outputs(OpticalMode(geom.k1, 1, 1.0), cfg, geom)
    assert clone.A == 6j and anti.A == 6j


def test_gain_with_complex_pump_phase():
    cfg = FwmConfig(A2=1j, A3=1, normalize=False)
    assert cfg.g_anticlone == 1j
    assert cfg.g_clone == -1j


def test_frequency_mismatch():
    geom = BeamGeometry.collinear(1.0)
    with pytest.raises(FrequencyMismatchError):
        fwm_outputs(OpticalMode(geom.k1, 1, 1.1), FwmConfig(), geom)


def test_normalize_needs_pumps():
    with pytest.raises(ValueError):
        FwmConfig(A2=0)


def test_geometry_invariants():
    g = BeamGeometry((0.6, 0.8), (-0.08, 0.06))
    assert np.allclose(np.array(g.k2) + g.k3, 0)
    assert abs(np.dot(g.k2, g.delta)) < 1e-12
    with pytest.raises(ValueError):
        BeamGeometry((1.0, 0.0), (0.1, 0.0))


def test_collinear_residuals_exactly_zero():
    geom = BeamGeometry.collinear(2.0)
    cfg = FwmConfig(omega=3.0, c_tilde=1.5)
    clone, anti = fwm_outputs(OpticalMode(geom.k1, 1, 3.0), cfg, geom)
    assert phase_match_residual(clone, 1.5) == 0.0
    assert phase_match_residual(anti, 1.5) == 0.0
    assert phase_match_status(clone, 1.5) == "exact"


@pytest.mark.parametrize("delta", [1e-3, 1e-2, 0.05])
def test_offset_residual(delta):
    k, c = 2.0, 0.7
    geom = BeamGeometry.collinear(k, delta)
    cfg = FwmConfig(omega=c * k, c_tilde=c)
    clone, _ = fwm_outputs(OpticalMode(geom.k1, 1, cfg.omega), cfg, geom)
    r = phase_match_residual(clone, c)
    exact = c * (np.hypot(k, delta) - k)
    assert r == pytest.approx(exact, rel=1e-6)
    assert r <= delta ** 2 / k * c
    assert r == pytest.approx(c * delta ** 2 / (2 * k), rel=delta ** 2)
    assert abs(np.linalg.norm(geom.k1) - k) <= delta ** 2 / k


def test_residual_requires_nonzero_k():
    with pytest.raises(ValueError):
        phase_match_residual(OpticalMode((0, 0), 1, 1), 1.0)


def test_status_mismatched():
    assert phase_match_status(OpticalMode((2.0, 0.0), 1, 1.0), 1.0) == "mismatched"


def test_quadrature_maps():
    assert np.array_equal(quadrature_matrix(np.conj), np.diag([1.0, -1.0]))
    assert quadrature_map_check(np.conj)
    assert not quadrature_map_check(lambda z: z)
    assert quadrature_is_symplectic(lambda z: np.conj(np.conj(z)))
    assert quadrature_is_symplectic(lambda z: 1j * z)


@settings(max_examples=50, deadline=None)
@given(a=complexes, g=complexes.filter(lambda z: abs(z) > 1e-6))
def test_amplitude_bookkeeping(a, g):
    cfg = FwmConfig(A2=1, A3=g, normalize=False)
    geom = BeamGeometry.collinear(1.0)
    clone, anti = fwm_outputs(OpticalMode(geom.k1, a, 1.0), cfg, geom)
    assert abs(clone.A) == pytest.approx(abs(cfg.g_clone) * abs(a), rel=1e-12, abs=1e-300)
    assert abs(anti.A) == pytest.approx(abs(cfg.g_anticlone) * abs(a), rel=1e-12, abs=1e-300)


def test_constant_series():
    run = modulated_run(np.full(10, 2 - 1j), FwmConfig())
    assert np.all(run.clone == 2 - 1j) and np.all(run.anticlone == 2 + 1j)


def test_sinusoidal_series_conjugate():
    t = np.linspace(0, 1, 100)
    a = np.sin(2 * np.pi * t) + 1j * np.cos(6 * np.pi * t)
    run = modulated_run(a, FwmConfig(), BeamGeometry.collinear(1.0), t=t)
    assert np.array_equal(run.anticlone, np.conj(a))
    assert np.array_equal(np.conj(run.anticlone), run.clone)


def test_pump_noise_marks_both_channels():
    a = np.exp(1j * np.linspace(0, 3, 500))
    eta = pump_noise_series(500, 0.05, seed=4)
    run = modulated_run(a, FwmConfig(), pump_noise=eta)
    from_clone, from_anti = run.source_estimates(FwmConfig())
    assert np.allclose(from_clone, from_anti)
    assert np.allclose(from_clone / a - 1, eta)
    assert np.std(np.abs(from_clone - a)) > 0.01


def test_series_validation():
    with pytest.raises(ValueError):
        modulated_run([], FwmConfig())
    with pytest.raises(ValueError):
        modulated_run([1, 2], FwmConfig(), pump_noise=[0.1])


def test_run_csv():
    run = modulated_run([1 + 1j, 2], FwmConfig())
    lines = run.to_csv().splitlines()
    assert lines[0] == "t,source_re,source_im,clone_re,clone_im,anticlone_re,anticlone_im"
    assert lines[1] == "0,1,1,1,1,1,-1"
