import numpy as np
import pytest

from multiwell.acceptance import eps_for_eta
from multiwell.diagnostics import (
    beating_detector,
    compare_gpe_dnls,
    drift_report,
    manifold_distance,
    paired_run,
    scaling_fit,
)
from multiwell.dnls import DnlsModel, dnls_integrate, extract_coefficients
from multiwell.errors import ConfigError
from multiwell.gpe import GpeRunConfig, gpe_integrate
from multiwell.normalform import NormalFormConfig, normal_form_from_spectral
from multiwell.spectral import splitting

HBAR = 0.2


def one_beat(sp):
    return np.pi * HBAR / splitting(sp, 2)[0]


def test_linear_paired_run_agrees(dw):
    _, _, sp, basis = dw
    rep, g, d, _ = paired_run(sp, basis, 0.0, 2, basis.frame[:, 0].astype(complex), one_beat(sp), obs_stride=20)
    assert rep.sup < 1e-6


def test_stationary_paired_run(dw):
    _, _, sp, basis = dw
    rep, g, _, _ = paired_run(sp, basis, 0.0, 2, sp.eigenvectors[:, 0].astype(complex), one_beat(sp), obs_stride=50)
    assert np.ptp(g.populations[:, 0]) < 1e-10
    assert rep.sup < 1e-6


def test_reduction_accuracy_eta1(dw):
    _, _, sp, basis = dw
    rep, *_ = paired_run(sp, basis, eps_for_eta(1.0), 2, basis.frame[:, 0].astype(complex), one_beat(sp), obs_stride=20)
    assert rep.sup <= 0.05


def test_compare_rejects_short_reduced_run(dw):
    _, _, sp, basis = dw
    psi0 = basis.frame[:, 0].astype(complex)
    m = extract_coefficients(sp, basis, 0.0, 2)
    g = gpe_integrate(sp, GpeRunConfig(HBAR, 0.0, t_end=one_beat(sp), obs_stride=100), psi0, basis)
    d = dnls_integrate(m, basis.amplitudes(sp.grid, psi0), 0.5, 0.01)
    with pytest.raises(ConfigError):
        compare_gpe_dnls(g, d, m, HBAR)


def test_drift_linear_is_tiny(dw):
    _, _, sp, basis = dw
    psi0 = basis.frame[:, 0].astype(complex)
    m = extract_coefficients(sp, basis, 0.0, 2)
    g = gpe_integrate(sp, GpeRunConfig(HBAR, 0.0, t_end=one_beat(sp), obs_stride=50), psi0, basis)
    rep = drift_report(g, m, HBAR)
    assert rep.I_drift < 1e-10
    assert rep.K0_drift < 1e-10


def test_drift_grows_with_mu(dw):
    _, _, sp, basis = dw
    psi0 = basis.frame[:, 0].astype(complex)
    drifts = []
    for eta in (0.5, 1.0, 2.0):
        eps = eps_for_eta(eta)
        m = extract_coefficients(sp, basis, eps, 2)
        g = gpe_integrate(sp, GpeRunConfig(HBAR, eps, t_end=one_beat(sp), obs_stride=20), psi0, basis)
        drifts.append(drift_report(g, m, HBAR).I_drift)
    assert drifts[0] < drifts[1] < drifts[2]


def test_manifold_distance_basic(dw):
    _, _, sp, basis = dw
    res = manifold_distance(basis.frame[:, 0].astype(complex), sp, 2)
    assert res["picnorm"] < 1e-10
    assert res["dM"] is None
    high = sp.eigenvectors[:, 2].astype(complex)
    assert manifold_distance(high, sp, 2)["picnorm"] == pytest.approx(np.sqrt(sp.eigenvalues[2]))


def test_manifold_distance_eps_zero_transform(dw):
    _, _, sp, basis = dw
    nf = normal_form_from_spectral(sp, 2, 4, 0.0, NormalFormConfig(sigma=1, r_max=1))
    res = manifold_distance(basis.frame[:, 1].astype(complex), sp, 2, transform=nf)
    assert res["converged"]
    assert res["dM"] < 1e-8


def test_beating_detector_cosine():
    t = np.linspace(0, 10, 2001)
    res = beating_detector(t, np.cos(2 * np.pi * t / 2.5), expected_period=2.5)
    assert res["is_beating"]
    assert res["period"] == pytest.approx(2.5, rel=1e-4)


def test_beating_detector_stationary_and_short():
    t = np.linspace(0, 10, 101)
    assert not beating_detector(t, np.full_like(t, 0.3))["is_beating"]
    assert beating_detector(t, np.cos(t), expected_period=8.0)["status"] == "inconclusive"
    with pytest.raises(ConfigError):
        beating_detector([0, 1], [1, -1])


def test_beating_detector_self_trapped():
    m = DnlsModel.from_scaled([0, 0], [1.0], 10.0)
    tr = dnls_integrate(m, [1, 0], 30.0, 0.01)
    x = tr.populations[:, 1] - tr.populations[:, 0]
    res = beating_detector(tr.times, x)
    assert not res["is_beating"]
    assert np.all(x < 0)


def test_scaling_fit_exact():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert scaling_fit(x, 7 * x**-1.5)["slope"] == pytest.approx(-1.5, abs=1e-12)
    assert scaling_fit(x, 3 * np.exp(-2 * x), semilog=True)["slope"] == pytest.approx(-2.0, abs=1e-12)
    with pytest.raises(ConfigError):
        scaling_fit([1, 2], [1, 2])
    with pytest.raises(ConfigError):
        scaling_fit([1, 2, 3], [1, -2, 3])
