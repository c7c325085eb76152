import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multiwell.dnls import extract_coefficients
from multiwell.errors import ConfigError
from multiwell.normalform import (
    ModeTruncation,
    NormalFormConfig,
    Poly,
    band_counts,
    build_bands,
    classify_monomial,
    compare_k_k0,
    decompose,
    e_norm,
    e_norm_poly,
    gauge_monomials,
    majorant_norm,
    nonlinear_poly,
    normal_form,
    normal_form_from_spectral,
    number_operator,
    poisson_bracket,
    random_band_sparse,
    small_divisor_bound_check,
    solve_homological,
)


def harmonic_truncation(hbar, M, n=2):
    k = np.arange(1, M + 1)
    return ModeTruncation(tuple(1 + hbar * (2 * k - 1)), n, hbar)


def e(M, *idx):
    out = [0] * M
    for i in idx:
        out[i] += 1
    return tuple(out)


@st.composite
def polys(draw, M=3, max_degree=4, gauge=False):
    terms = {}
    for _ in range(draw(st.integers(1, 4))):
        K = draw(st.lists(st.integers(0, 2), min_size=M, max_size=M))
        L = draw(st.lists(st.integers(0, 2), min_size=M, max_size=M))
        if gauge:
            L = list(K)
            L[0], L[-1] = L[-1], L[0]
        if sum(K) + sum(L) > max_degree:
            continue
        re, im = draw(st.integers(-5, 5)), draw(st.integers(-5, 5))
        terms[(tuple(K), tuple(L))] = complex(re, im)
    return Poly(M, terms, exact=True)


# polynomial engine


def test_number_bracket_counts_charge():
    N = number_operator(3, exact=True)
    mono = Poly.monomial(3, (2, 0, 1), (0, 1, 0), 1, exact=True)
    assert poisson_bracket(N, mono) == mono.scale(2j)


def test_bracket_of_coordinate_is_flow():
    # {zeta, H} = -i dH/dconj(zeta) matches the compiled vector field
    H = Poly(2, {((1, 0), (1, 0)): 2.0, ((2, 0), (1, 1)): 0.5, ((0, 1), (1, 0)): 1.0})
    z = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    flow = H.compile().vector_field(z)
    for j in range(2):
        coord = Poly.monomial(2, e(2, j), (0, 0), 1.0)
        assert poisson_bracket(coord, H).evaluate(z) == pytest.approx(flow[j])


@settings(max_examples=30, deadline=None)
@given(A=polys(), B=polys(), C=polys())
def test_bracket_antisymmetric_jacobi(A, B, C):
    assert poisson_bracket(A, B) == -poisson_bracket(B, A)
    jac = (
        poisson_bracket(A, poisson_bracket(B, C))
        + poisson_bracket(B, poisson_bracket(C, A))
        + poisson_bracket(C, poisson_bracket(A, B))
    )
    assert not jac


@settings(max_examples=30, deadline=None)
@given(A=polys(gauge=True), B=polys(gauge=True))
def test_bracket_preserves_gauge(A, B):
    N = number_operator(3, exact=True)
    assert not poisson_bracket(N, A)
    assert not poisson_bracket(N, poisson_bracket(A, B))
    assert not poisson_bracket(N, A * B)


@settings(max_examples=20, deadline=None)
@given(A=polys())
def test_json_roundtrip(A):
    assert Poly.from_json(3, A.to_json(), exact=True) == A


def test_evaluate_matches_compiled(rng):
    A = Poly(3, {((1, 1, 0), (0, 2, 0)): 1 + 2j, ((0, 0, 1), (0, 0, 1)): -0.5})
    z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    assert A.evaluate(z) == pytest.approx(A.compile().value(z))


def test_mixing_exact_and_float_rejected():
    with pytest.raises(ConfigError):
        Poly.zero(2, exact=True) + Poly.zero(2)


def test_nonlinear_poly_matches_quadrature(dw, rng):
    _, grid, sp, _ = dw
    phi = sp.eigenvectors[:, :4]
    P = nonlinear_poly(phi, grid.h, 1)
    z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    direct = np.sum(np.abs(phi @ z) ** 4) * grid.h / 2
    assert P.evaluate(z).real == pytest.approx(direct, rel=1e-10)
    assert P.is_real(1e-12) and P.is_gauge_invariant()


# bands and classification


def test_bands_harmonic():
    tr = harmonic_truncation(0.1, 40)
    bands = build_bands(tr)
    for g, E in enumerate(bands.edges):
        assert 2 * g < E < 2 * g + 1
    assert bands.gap >= 0.1 - 1e-9
    assert bands.edges[-1] > tr.eigenvalues[-1]


@pytest.mark.parametrize("hbar", [0.05, 0.1, 0.2])
def test_band_spacing(hbar):
    bands = build_bands(harmonic_truncation(hbar, int(4 / hbar)))
    d = np.diff(bands.edges)
    assert np.all((d > 1) & (d < 3))


def test_band_counts_scale_like_inverse_hbar():
    c = [max(band_counts(build_bands(harmonic_truncation(h, int(4 / h))))) * h for h in (0.05, 0.1, 0.2)]
    assert max(c) / min(c) < 2


def test_classification_examples():
    tr = harmonic_truncation(0.1, 16)
    bands = build_bands(tr)
    M = 16
    # band 0 lies below the spectrum
    a, b = bands.members[1][0], bands.members[2][0]
    assert classify_monomial(e(M, 0, 1), e(M, 0, 1), bands) == "noncoupling"
    assert classify_monomial(e(M, a), e(M, b), bands) == "coupling"
    a2 = bands.members[1][1]
    assert classify_monomial(e(M, a), e(M, a2), bands) == "noncoupling"
    assert classify_monomial(e(M, a), e(M, a), bands) == "noncoupling"
    assert classify_monomial(e(M, a, 0), e(M, 1, 1), bands) == "coupling"
    with pytest.raises(ConfigError):
        classify_monomial(e(M, a), e(M), bands)


def test_decompose_reassembles(rng):
    tr = harmonic_truncation(0.2, 8)
    bands = build_bands(tr)
    mons = list(gauge_monomials(8, 4))
    pick = rng.choice(len(mons), size=200, replace=False)
    H = Poly(8, {mons[i]: complex(*rng.integers(-9, 10, 2)) for i in pick}, exact=True)
    F, Z = decompose(H, bands)
    assert F + Z == H
    assert all(classify_monomial(K, L, bands) == "coupling" for K, L in F.terms)
    H0 = tr.h0()
    F0, Z0 = decompose(H0, bands)
    assert not F0 and Z0 == H0


def test_e_norm():
    tr = harmonic_truncation(0.1, 12)
    bands = build_bands(tr)
    assert e_norm(np.zeros(10), bands) == 0.0
    z = np.zeros(10)
    z[0] = 1
    assert e_norm(z, bands) == pytest.approx(bands.edges[bands.band_of[2]])
    w = e_norm_poly(bands)
    assert w.evaluate(np.concatenate([[0, 0], z])).real == pytest.approx(e_norm(z, bands))


@pytest.mark.parametrize("hbar", [0.05, 0.1, 0.2])
def test_e_norm_equivalent_to_graph_norm(hbar, rng):
    tr = harmonic_truncation(hbar, int(6 / hbar))
    bands = build_bands(tr)
    lam = np.array(tr.eigenvalues[2:])
    for _ in range(20):
        z = rng.standard_normal(len(lam)) + 1j * rng.standard_normal(len(lam))
        r = e_norm(z, bands) / np.sum(lam * np.abs(z) ** 2)
        assert 1.0 <= r <= 3.0


# homological equation


def test_homological_zero():
    tr = harmonic_truncation(0.1, 6)
    G, alpha = solve_homological(Poly.zero(6), tr, build_bands(tr))
    assert not G and alpha == np.inf


def test_homological_single_monomial():
    tr = ModeTruncation((0.9, 1.1, 2.0), 2, 0.1)
    bands = build_bands(tr)
    F = Poly.monomial(3, (0, 0, 1), (1, 0, 0), 1)
    G, alpha = solve_homological(F, tr, bands, sign=-1)
    assert G.terms[((0, 0, 1), (1, 0, 0))] == pytest.approx(1j)
    assert alpha == pytest.approx(1.0)


@pytest.mark.parametrize("exact", [True, False])
def test_homological_residual(exact, rng):
    tr = harmonic_truncation(0.2, 8)
    bands = build_bands(tr)
    mons = [m for m in gauge_monomials(8, 4) if classify_monomial(*m, bands) == "coupling"]
    pick = rng.choice(len(mons), size=60, replace=False)
    F = Poly(8, {mons[i]: complex(rng.standard_normal(), rng.standard_normal()) for i in pick}, exact=exact)
    G, _ = solve_homological(F, tr, bands)
    res = poisson_bracket(tr.h0(exact), G) - F
    if exact:
        assert not res
    else:
        assert res.max_abs() <= 1e-12


def test_homological_rejects_noncoupling():
    tr = harmonic_truncation(0.1, 6)
    with pytest.raises(ConfigError):
        solve_homological(tr.h0(), tr, build_bands(tr))


def test_small_divisor_examples():
    tr = harmonic_truncation(0.1, 16)
    bands = build_bands(tr)
    modes = [j for j, g in enumerate(bands.band_of) if g is not None]
    F = np.zeros((len(modes), len(modes)))
    assert small_divisor_bound_check(F, tr.eigenvalues, bands)["ratio"] == 0.0
    i, j = bands.members[1][-1], bands.members[2][0]
    F[modes.index(i), modes.index(j)] = 1.0
    res = small_divisor_bound_check(F, tr.eigenvalues, bands)
    assert res["ratio"] == pytest.approx(1 / abs(tr.eigenvalues[j] - tr.eigenvalues[i]))


def test_small_divisor_scaling(rng):
    hb = np.array([0.05, 0.1, 0.2])
    worst = []
    for h in hb:
        tr = harmonic_truncation(h, int(4 / h))
        bands = build_bands(tr)
        worst.append(max(small_divisor_bound_check(random_band_sparse(bands, rng), tr.eigenvalues, bands)["ratio"] for _ in range(100)))
    slope = np.polyfit(np.log(hb), np.log(worst), 1)[0]
    assert slope >= -1.5 - 0.1


# Lie transform


def test_majorant_examples():
    assert majorant_norm(Poly.zero(2), 1.0) == 0.0
    assert majorant_norm(Poly.quadratic([1.0, 0.0]), 1.0) == pytest.approx(2.0)
    A = Poly(2, {((2, 0), (1, 1)): 1 + 1j})
    B = Poly(2, {((2, 0), (1, 1)): -1.0, ((1, 0), (1, 0)): 3.0})
    assert majorant_norm(A + B, 0.7) <= majorant_norm(A, 0.7) + majorant_norm(B, 0.7)


def test_decomposition_majorants(rng):
    tr = harmonic_truncation(0.2, 6)
    bands = build_bands(tr)
    mons = list(gauge_monomials(6, 4))
    H = Poly(6, {m: complex(rng.standard_normal(), rng.standard_normal()) for m in mons})
    F, Z = decompose(H, bands)
    assert majorant_norm(F, 1.0) + majorant_norm(Z, 1.0) == pytest.approx(majorant_norm(H, 1.0))


def test_eps_zero_is_trivial(dw):
    sp = dw[2]
    res = normal_form_from_spectral(sp, 2, 6, 0.0, NormalFormConfig(sigma=1))
    assert not res.R()
    assert not res.generators
    z = np.arange(6) * (1 + 0.5j)
    np.testing.assert_array_equal(res.transformation(z), z)


def test_exact_normal_form_structure(dw):
    sp = dw[2]
    res = normal_form_from_spectral(sp, 2, 6, 1e-3, NormalFormConfig(sigma=1, max_degree=6, r_max=2, exact=True))
    rep = res.exactness_report()
    assert rep["coupling_terms"] == {1: 0, 2: 0}
    assert rep["gauge_Z"] and rep["gauge_R"] and rep["generators_coupling"]
    assert all(v == 0 for v in rep["homological_residual"])


def test_normal_form_refuses_large_mu(dw):
    sp = dw[2]
    with pytest.raises(ConfigError):
        normal_form_from_spectral(sp, 2, 6, 0.1, NormalFormConfig(sigma=1))


def test_already_normal_input_gives_zero_generator():
    tr = ModeTruncation((1.0, 1.001, 1.6, 2.4), 2, 0.2)
    P0 = Poly.quadratic([1.0, 1.0, 0.0, 0.0]).multiply(Poly.quadratic([1.0, 1.0, 0.0, 0.0]))
    res = normal_form(tr, 1e-3, P0, NormalFormConfig(sigma=1, r_max=1))
    assert not res.generators[0]


def test_k_matches_reduced_model(dw):
    _, _, sp, basis = dw
    for eps in (1e-3, 2.5e-4):
        res = normal_form_from_spectral(sp, 2, 6, eps, NormalFormConfig(sigma=1, r_max=2))
        cmp = compare_k_k0(res, basis.W, extract_coefficients(sp, basis, eps, 1))
        bound = res.constants["mu"] / 0.2**1.5
        assert cmp["hopping_rel"] <= bound
        assert cmp["onsite_rel"] <= bound
        assert cmp["dropped_rel"] <= bound
