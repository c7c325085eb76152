import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiwell.dnls import (
    DnlsModel,
    MidpointStepper,
    action_drift_stats,
    bifurcation_scan,
    classify_trajectory,
    dnls_integrate,
    dnls_rhs,
    double_well_analysis,
    extract_coefficients,
    k0_energy,
    sample_sphere,
)
from multiwell.errors import ConfigError
from multiwell.grid import Grid
from multiwell.potential import make_double_well
from multiwell.spectral import eigensolve, single_well_basis


def dimer(eta, bond=1.0, sigma=2):
    return DnlsModel.from_scaled([0.0, 0.0], [bond], eta, sigma)


def test_k0_examples():
    assert k0_energy(dimer(0.0), [1, 0]) == 0.0
    # onsite term is eta/(sigma+1) |psi_j|^(2 sigma + 2)
    assert k0_energy(dimer(3.0), [1, 0]) == pytest.approx(1.0)
    a = np.array([1, 1]) / np.sqrt(2)
    assert k0_energy(dimer(3.0), a) == pytest.approx(1 + 3.0 / 12)


def test_k0_batched():
    m = dimer(2.0)
    psi = np.array([[1, 0], [0, 1], [0.6, 0.8j]])
    np.testing.assert_allclose(k0_energy(m, psi), [k0_energy(m, p) for p in psi])


def test_rhs_linear_oracle():
    np.testing.assert_allclose(dnls_rhs(dimer(0.0), [1, 0]), [0, -1j])
    assert np.all(dnls_rhs(dimer(5.0), [0, 0]) == 0)


@settings(max_examples=25, deadline=None)
@given(
    re=st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    im=st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    eta=st.floats(-5, 5),
)
def test_rhs_is_hamiltonian_gradient(re, im, eta):
    m = DnlsModel.from_scaled([0.1, -0.2, 0.3], [1.0, 0.5], eta, 2)
    psi = np.array(re) + 1j * np.array(im)
    h = 1e-6
    grad = np.empty(3, dtype=complex)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        dx = (k0_energy(m, psi + e) - k0_energy(m, psi - e)) / (2 * h)
        dy = (k0_energy(m, psi + 1j * e) - k0_energy(m, psi - 1j * e)) / (2 * h)
        grad[j] = 0.5 * (dx + 1j * dy)
    np.testing.assert_allclose(dnls_rhs(m, psi), -1j * grad, atol=1e-6)


def test_model_validation():
    with pytest.raises(ConfigError):
        DnlsModel(2, np.zeros(2), np.array([0.0, 1.0]), 1.0)
    with pytest.raises(ConfigError):
        DnlsModel(2, np.zeros(2), np.array([1.0, 1.0, 0.0]), 1.0)
    with pytest.raises(ConfigError):
        DnlsModel(0, np.zeros(2), np.array([0.0, 1.0, 0.0]), 1.0)


def test_linear_beating_cos2():
    tr = dnls_integrate(dimer(0.0), [1, 0], 5.0, 1e-3)
    np.testing.assert_allclose(tr.populations[:, 0], np.cos(tr.times) ** 2, atol=1e-6)


@pytest.mark.parametrize("eta", [0.0, 1.5, 10.0])
def test_invariant_conserved(eta):
    tr = dnls_integrate(dimer(eta), [0.8, 0.6j], 50.0, 0.01 / max(1.0, eta / 2))
    assert np.max(np.abs(tr.I - tr.I[0])) <= 1e-10
    # K0 is conserved only up to the O(dtau^2) method error
    assert np.max(np.abs(tr.K0 - tr.K0[0])) < 1e-3 * max(1.0, abs(tr.K0[0]))


def test_backward_integration_returns():
    m = DnlsModel.from_scaled([0.0, 0.2, 0.0], [1.0, 1.0], 4.0)
    fwd = dnls_integrate(m, [1, 0.2, 0.1j], 3.0, 0.01)
    back = dnls_integrate(m, fwd.states[-1], -3.0, 0.01)
    np.testing.assert_allclose(back.states[-1], [1, 0.2, 0.1j], atol=1e-9)


def test_stepper_reports_iterations():
    st = MidpointStepper(dimer(3.0), 0.01)
    psi = np.array([[1.0 + 0j, 0.0]])
    new, mid = st.step(psi, psi.copy())
    assert 1 <= st.iterations < 50
    np.testing.assert_allclose(new, 2 * mid - psi, atol=1e-12)
    assert np.sum(np.abs(new) ** 2) == pytest.approx(1.0, abs=1e-13)


def test_self_trapping_strong():
    tr = dnls_integrate(dimer(10.0), [1, 0], 100.0, 0.01)
    assert tr.populations[:, 0].min() > 0.9


def test_equilibria_linear():
    res = double_well_analysis(0.0)
    assert not res["bifurcated"]
    assert sorted(e["p"] for e in res["equilibria"]) == pytest.approx([0.5, 0.5])


def test_equilibria_above_bifurcation():
    res = double_well_analysis(3.0)
    assert res["bifurcated"]
    assert res["count"] == 4
    # saddle at the symmetric in-phase point: 2 * 1/2 + eta/3 * 2/8
    assert res["homoclinic_level"] == pytest.approx(1 + 3.0 / 12)


def test_bifurcation_at_two():
    scan = bifurcation_scan(np.round(np.arange(1.5, 2.5001, 0.01), 2))
    assert scan["birth"] == pytest.approx(2.0, abs=0.05)


def test_analysis_sigma_restricted():
    with pytest.raises(ConfigError):
        double_well_analysis(1.0, sigma=1)


def test_classification():
    assert classify_trajectory(dimer(0.0), [1, 0], 20.0)["status"] == "beating"
    assert classify_trajectory(dimer(10.0), [1, 0], 20.0)["status"] == "self-trapped"
    assert classify_trajectory(dimer(0.0), [1, 0], 1.0)["status"] == "inconclusive"
    # a state on the saddle level
    saddle = np.array([1, 1]) / np.sqrt(2)
    assert classify_trajectory(dimer(3.0), saddle, 20.0)["status"] == "near-homoclinic"


def test_sample_sphere(rng):
    z = sample_sphere(3, 50, 0.2, rng)
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0)
    assert np.all(np.abs(z) > 0.2)
    with pytest.raises(ConfigError):
        sample_sphere(4, 5, 0.5, rng)


def test_drift_linear_full_transfer():
    res = action_drift_stats(dimer(0.0), 8, 0.1, 10.0, seed=1)
    assert res["median"] > 0.3
    assert res["max_invariant_error"] < 1e-10


def test_drift_decreases_with_eta():
    m = lambda e: DnlsModel.from_scaled(np.zeros(3), [1.0, 1.0], e)
    lo = action_drift_stats(m(10.0), 24, 0.2, 50.0, seed=3)
    hi = action_drift_stats(m(80.0), 24, 0.2, 50.0, seed=3)
    assert hi["median"] < lo["median"]


def test_extract_coefficients_double_well(dw):
    _, _, sp, basis = dw
    m = extract_coefficients(sp, basis, 1e-3, 2)
    assert m.delta[0] == pytest.approx(m.delta[1], abs=1e-9)
    assert abs(m.hopping[1]) == pytest.approx(1.0, rel=1e-6)
    assert m.eta == pytest.approx(3 * 1e-3 * m.c / m.omega)
    assert extract_coefficients(sp, basis, 0.0, 2).eta == 0.0


def test_extract_raw_frame_close(dw):
    _, _, sp, basis = dw
    raw = extract_coefficients(sp, basis, 1e-3, 2, frame="raw")
    low = extract_coefficients(sp, basis, 1e-3, 2)
    assert raw.c == pytest.approx(low.c, rel=1e-2)


def test_onsite_coefficient_scaling():
    # Gaussian oracle for sigma = 1: c ~ (1/2) sqrt(alpha / (2 pi)), alpha = sqrt(V''/2) / hbar
    dw = make_double_well(1.0, 1.0)
    grid = Grid(6.0, 2048)
    hb = np.array([0.08, 0.1, 0.12, 0.15])
    cs = []
    for h in hb:
        sp = eigensolve(dw, grid, h, 4)
        cs.append(extract_coefficients(sp, single_well_basis(dw, grid, h, spectral=sp), 1.0, 1).c)
    slope = np.polyfit(np.log(hb), np.log(cs), 1)[0]
    assert slope == pytest.approx(-0.5, rel=0.1)
    alpha = np.sqrt(4.0) / 0.1
    assert cs[1] == pytest.approx(0.5 * np.sqrt(alpha / (2 * np.pi)), rel=0.1)
