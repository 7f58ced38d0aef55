import math

import numpy as np
import pytest

import btcspin as bs


BTC = dict(p=2, q=1, omega_z=1.0, omega_x=1.0, gamma_up=0.2)


def test_model_params():
    mp = bs.ModelParams(**BTC)
    assert mp.delta_gamma == pytest.approx(0.2)
    assert mp.gamma_bar == pytest.approx(0.2)
    with pytest.raises(bs.Error, match="DomainError"):
        bs.ModelParams(p=0, q=1, omega_x=1.0)


def test_meanfield_integration_conserves_norm():
    mp = bs.ModelParams(**BTC)
    s0 = bs.bloch_from_angles(1.47, 3.10)
    tr = bs.integrate(mp, s0, 60.0, samples=3000)
    assert len(tr) == 3000
    norms = np.linalg.norm(tr.s, axis=1)
    assert np.max(np.abs(norms - 1.0)) < 1e-6
    assert bs.detect_orbit(tr) == "CLOSED"


def test_fixed_point_classes():
    mp = bs.ModelParams(**BTC)
    fps = bs.find_fixed_points(mp)
    classes = sorted(fp.cls for fp in fps)
    assert classes == ["ATTRACTOR", "MARGINAL", "REPELLER", "SADDLE"]
    att = next(fp for fp in fps if fp.cls == "ATTRACTOR")
    assert np.linalg.norm(att.s - np.array([0.49505, 0.049505, 0.86745])) < 1e-4


def test_envelope_and_frequency():
    t = np.linspace(0.0, 40.0, 4001)
    v = np.exp(-0.05 * t) * np.cos(2.0 * np.pi * 0.8 * t)
    env = bs.envelope(list(t), list(v))
    assert len(env) > 20
    fit = bs.fit_exp_amplitude(env)
    assert fit.rate == pytest.approx(0.05, rel=0.05)
    assert bs.dominant_frequency(list(t), list(v)) == pytest.approx(0.8, rel=1e-3)


def test_exact_evolution_matches_meanfield_direction():
    mp = bs.ModelParams(p=2, q=1, omega_x=3.0, gamma_up=0.2)
    ops = bs.build_operators(24)
    psi = bs.coherent_state(24, 2.0, 0.0)
    rho0 = np.outer(psi, psi.conj())
    tr = bs.evolve(ops, mp, rho0, 6.0, samples=200)
    assert not tr.positivity_breach
    assert np.max(tr.trace_err) < 1e-8
    s0 = bs.bloch_from_angles(2.0, 0.0)
    mf = bs.integrate(mp, s0, 6.0, samples=200)
    # finite-size damping keeps the early-time curves close, not identical
    assert np.max(np.abs(tr.jz - mf.s[:, 2])[:50]) < 0.1


def test_spectrum_and_steady_state():
    mp = bs.ModelParams(p=2, q=1, omega_x=3.0, gamma_up=0.2)
    ops = bs.build_operators(12)
    L = bs.build_liouvillian(ops, mp)
    res = bs.spectrum(L, 10)
    assert res.gap > 0.0
    assert abs(res.eigenvalues[0]) < 1e-9 * res.liouvillian_norm
    rho = bs.steady_state(L)
    metrics = bs.steadystate_metrics(rho)
    assert metrics.purity == pytest.approx(np.trace(rho @ rho).real, abs=1e-12)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)


def test_total_spin_identity():
    closed = bs.ansatz_total_spin(6, 0.3, 0.2)
    brute = bs.brute_force_total_spin(6, 0.3, 0.2, 0.7)
    assert closed == pytest.approx(brute, abs=1e-10)


def test_phase_labels():
    assert bs.classify_phase(bs.ModelParams(**BTC)) == "F+BTC"
    assert bs.classify_phase(bs.ModelParams(p=2, q=1, omega_x=3.0, gamma_up=0.2)) == "BTC"
    assert bs.classify_phase(bs.ModelParams(p=2, q=1, omega_x=0.25, gamma_up=0.5)) == "F"


def test_error_translation():
    with pytest.raises(bs.Error, match="SizeLimit"):
        bs.build_operators(0)
    with pytest.raises(bs.Error, match="InsufficientData"):
        bs.dominant_frequency([0.0, 1.0], [0.0, 1.0])
