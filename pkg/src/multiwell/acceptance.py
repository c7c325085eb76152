"""Acceptance suite: twelve numerical checks with their stated tolerances.

Each ``criterion_k`` returns a ``CriterionResult``; ``run_all`` runs a
selection and ``format_line`` renders the one-line pass/fail summary.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .diagnostics import beating_detector, paired_run, scaling_fit
from .dnls import (
    DnlsModel,
    action_drift_stats,
    bifurcation_scan,
    dnls_integrate,
    extract_coefficients,
)
from .gpe import GpeRunConfig, gpe_integrate
from .grid import Grid
from .normalform import (
    ModeTruncation,
    NormalFormConfig,
    Poly,
    build_bands,
    classify_monomial,
    e_norm,
    e_norm_poly,
    gauge_monomials,
    normal_form_from_spectral,
    number_operator,
    poisson_bracket,
    random_band_sparse,
    small_divisor_bound_check,
)
from .potential import agmon_distance, make_double_well
from .spectral import alt_norm, eigensolve, single_well_basis, splitting, xs_norm

HBAR = 0.2
DW_GRID = (6.0, 1024)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": bool(self.passed),
            "detail": self.detail,
            "values": self.values,
            "runtime_s": round(self.runtime, 3),
        }


def format_line(res: CriterionResult) -> str:
    tag = "PASS" if res.passed else "FAIL"
    return f"[{tag}] criterion {res.number:2d} {res.name}: {res.detail} ({res.runtime:.1f} s)"


@lru_cache(maxsize=None)
def double_well_setup(hbar: float = HBAR, K: int = 64):
    dw = make_double_well(1.0, 1.0)
    grid = Grid(*DW_GRID)
    sp = eigensolve(dw, grid, hbar, K)
    basis = single_well_basis(dw, grid, hbar, spectral=sp)
    return dw, grid, sp, basis


def eps_for_eta(eta: float, sigma: int = 2, hbar: float = HBAR) -> float:
    _, _, sp, basis = double_well_setup(hbar)
    unit = extract_coefficients(sp, basis, 1.0, sigma)
    return eta / unit.eta


def criterion_1() -> CriterionResult:
    t0 = time.perf_counter()
    hbar = 0.1
    sp = eigensolve(lambda x: 1.0 + x * x, Grid(8.0, 4096), hbar, 5, method="fourier")
    exact = 1.0 + hbar * (2 * np.arange(1, 6) - 1)
    err = float(np.max(np.abs(sp.eigenvalues - exact) / exact))
    rt = time.perf_counter() - t0
    ok = err < 1e-6 and rt < 10
    return CriterionResult(1, "harmonic oracle", ok, f"max rel err {err:.2e} (< 1e-6), {rt:.2f} s (< 10 s)", {"rel_err": err})


def criterion_2() -> CriterionResult:
    dw = make_double_well(1.0, 1.0)
    grid = Grid(*DW_GRID)
    hbars = [0.12, 0.15, 0.2, 0.25, 0.3]
    om = [splitting(eigensolve(dw, grid, h, 3), 2)[0] for h in hbars]
    fit = scaling_fit(1.0 / np.array(hbars), om, semilog=True)
    gamma = agmon_distance(dw, 1)
    rel = abs(-fit["slope"] - gamma) / gamma
    return CriterionResult(
        2,
        "splitting asymptotics",
        rel <= 0.10,
        f"semilog slope {fit['slope']:.4f} vs -Gamma = {-gamma:.4f}, rel dev {rel:.3f} (<= 0.10)",
        {"slope": fit["slope"], "gamma": gamma, "omega": om},
    )


def criterion_3() -> CriterionResult:
    _, grid, sp, basis = double_well_setup()
    omega, _ = splitting(sp, 2)
    T = np.pi * HBAR / omega
    phiR = (sp.eigenvectors[:, 0] + sp.eigenvectors[:, 1]) / np.sqrt(2)
    tr = gpe_integrate(sp, GpeRunConfig(HBAR, 0.0, 2, t_end=2.5 * T, obs_stride=2), phiR.astype(complex), basis)
    left = tr.populations[:, 0]
    at_T = float(np.interp(T, tr.times, left))
    near = (tr.times > 0.75 * T) & (tr.times < 1.25 * T)
    t_peak = float(tr.times[near][np.argmax(left[near])])
    peak_dev = abs(t_peak - T) / T
    right_half = float(np.interp(T / 2, tr.times, tr.populations[:, 1]))
    bd = beating_detector(tr.times, tr.x_mean, expected_period=T)
    per_dev = abs(bd["period"] - T) / T if bd["period"] else np.inf
    ok = at_T > 0.99 and peak_dev <= 0.02 and per_dev <= 0.02 and bd["is_beating"]
    return CriterionResult(
        3,
        "linear beating",
        ok,
        f"left pop at T {at_T:.6f} (> 0.99), peak offset {peak_dev:.1e} T, <x> period dev {per_dev:.1e} (<= 0.02), right pop at T/2 {right_half:.6f}",
        {"T": T, "left_at_T": at_T, "peak_dev": peak_dev, "period_dev": per_dev},
    )


def criterion_4() -> CriterionResult:
    _, grid, sp, basis = double_well_setup()
    omega, _ = splitting(sp, 2)
    T = np.pi * HBAR / omega
    psi0 = basis.frame[:, 0].astype(complex)
    norm_dev = 0.0
    eps = eps_for_eta(2.0)
    drifts = []
    for div in (8000, 16000, 32000):
        tr = gpe_integrate(sp, GpeRunConfig(HBAR, eps, 2, t_end=T / 16, dt=T / div, obs_stride=1), psi0, basis)
        norm_dev = max(norm_dev, float(np.max(np.abs(tr.N - 1))))
        drifts.append(float(np.max(np.abs(tr.E - tr.E[0]))))
    for e in (0.0, eps_for_eta(1.0)):
        tr = gpe_integrate(sp, GpeRunConfig(HBAR, e, 2, t_end=T, obs_stride=20), psi0, basis)
        norm_dev = max(norm_dev, float(np.max(np.abs(tr.N - 1))))
    slopes = -np.diff(np.log(drifts)) / np.log(2.0)
    inv_dev = 0.0
    for eta in (0.0, 1.5, 3.0, 10.0):
        m = DnlsModel.from_scaled([0, 0], [1.0], eta, 2)
        d = dnls_integrate(m, [1, 0], 100.0, 0.01)
        inv_dev = max(inv_dev, float(np.max(np.abs(d.I - d.I[0]))))
    m3 = DnlsModel.from_scaled([0.1, 0, -0.1], [1.0, 0.7], 20.0, 2)
    d = dnls_integrate(m3, [0.6, 0.64, 0.48], 50.0, 0.005)
    inv_dev = max(inv_dev, float(np.max(np.abs(d.I - d.I[0]))))
    ok = norm_dev <= 1e-10 and inv_dev <= 1e-10 and np.all(np.abs(slopes - 2.0) <= 0.2)
    return CriterionResult(
        4,
        "conservation",
        ok,
        f"max |N-1| {norm_dev:.1e}, energy-drift orders {np.round(slopes, 3).tolist()} (2 +- 0.2), max DNLS |I-I0| {inv_dev:.1e}",
        {"norm_dev": norm_dev, "energy_drift": drifts, "slopes": slopes.tolist(), "invariant_dev": inv_dev},
    )


def criterion_5() -> CriterionResult:
    etas = np.round(np.arange(1.5, 2.5 + 1e-9, 0.01), 2)
    birth = bifurcation_scan(etas)["birth"]
    a = birth is not None and abs(birth - 2.0) <= 0.05
    d = dnls_integrate(DnlsModel.from_scaled([0, 0], [1.0], 1.5, 2), [1, 0], 100.0, 0.01)
    p = d.populations[:, 0]
    crossings = int(np.count_nonzero((p[1:] > 0.5) != (p[:-1] > 0.5)))
    b = crossings >= 1
    d3 = dnls_integrate(DnlsModel.from_scaled([0, 0], [1.0], 3.0, 2), [1, 0], 100.0, 0.01)
    pmin = float(d3.populations[:, 0].min())
    c = pmin > 0.9
    return CriterionResult(
        5,
        "bifurcation",
        a and b and c,
        f"birth at eta = {birth} (2 +- 0.05): {a}; eta=1.5 crossings {crossings}: {b}; eta=3 min |psi1|^2 {pmin:.4f} (> 0.9): {c}",
        {"birth": birth, "crossings": crossings, "min_pop_eta3": pmin},
    )


def criterion_6() -> CriterionResult:
    _, grid, sp, basis = double_well_setup()
    omega, _ = splitting(sp, 2)
    T = np.pi * HBAR / omega
    psi0 = basis.frame[:, 0].astype(complex)
    disc = []
    for eta in (1.0, 0.5, 0.25):
        rep, *_ = paired_run(sp, basis, eps_for_eta(eta), 2, psi0, T, obs_stride=5)
        disc.append(rep.sup)
    mono = all(b < a for a, b in zip(disc, disc[1:]))
    ok = disc[0] <= 0.05 and mono
    return CriterionResult(
        6,
        "reduction accuracy",
        ok,
        f"sup population discrepancy at eta = 1, 1/2, 1/4: {[round(x, 5) for x in disc]} (first <= 0.05, decreasing)",
        {"discrepancy": disc},
    )


def criterion_7() -> CriterionResult:
    _, grid, sp, basis = double_well_setup()
    omega, _ = splitting(sp, 2)
    T = np.pi * HBAR / omega
    psi0 = basis.frame[:, 0].astype(complex)
    ratios, scales = [], []
    # same runs as the reduction check: eta = 1 halved twice
    for eta in (1.0, 0.5, 0.25):
        cfg = GpeRunConfig(HBAR, eps_for_eta(eta), 2, t_end=T, obs_stride=5)
        tr = gpe_integrate(sp, cfg, psi0, basis)
        ratios.append(float(np.max(tr.picnorm / tr.xsnorm)))
        scales.append(tr.mu / HBAR**1.5)
    ratios, scales = np.array(ratios), np.array(scales)
    K = float(np.exp(np.mean(np.log(ratios / scales))))
    excess = ratios / (K * scales)
    ok = bool(np.all(excess <= 1.2))
    return CriterionResult(
        7,
        "complement bound",
        ok,
        f"fitted K = {K:.4g}; run/envelope ratios {np.round(excess, 3).tolist()} (<= 1.2)",
        {"K": K, "ratios": ratios.tolist(), "mu_scale": scales.tolist()},
    )


def _test_states(grid: Grid) -> list:
    x = grid.x
    states = []
    for c in (-1.0, -0.5, 0.0, 0.5, 1.0):
        for w in (0.35, 0.7):
            g = np.exp(-((x - c) ** 2) / (2 * w * w)) * (1.0 + 0.3 * np.sin(2 * x))
            states.append(g / np.sqrt(np.sum(g * g) * grid.h))
    return states


def criterion_8() -> CriterionResult:
    dw = make_double_well(1.0, 1.0)
    grid = Grid(4.0, 2048)
    states = _test_states(grid)
    ratios = {}
    for hbar in (0.05, 0.1, 0.2, 0.4):
        # K scales like 1/hbar so lambda_K stays below the edge value of V
        sp = eigensolve(dw, grid, hbar, int(round(20 / hbar)), method="fourier")
        for s in (1, 2):
            for k, f in enumerate(states):
                ratios[(hbar, s, k)] = xs_norm(sp, f, s, strict=False) / alt_norm(f, s, hbar, dw, grid)
    vals = np.array(list(ratios.values()))
    c, C = float(vals.min()), float(vals.max())
    return CriterionResult(
        8,
        "norm equivalence",
        C / c < 10,
        f"xs/alt ratios in [{c:.3f}, {C:.3f}], C/c = {C / c:.3f} (< 10) over 4 hbar x 2 s x 10 states",
        {"c": c, "C": C},
    )


def criterion_9() -> CriterionResult:
    t0 = time.perf_counter()
    _, _, sp, _ = double_well_setup()
    cfg = NormalFormConfig(sigma=1, max_degree=6, r_max=2, exact=True)
    res = normal_form_from_spectral(sp, 2, 6, 1e-3, cfg)
    rep = res.exactness_report()
    rt = time.perf_counter() - t0
    ok = (
        all(v == 0 for v in rep["coupling_terms"].values())
        and rep["gauge_Z"]
        and rep["gauge_R"]
        and all(v == 0 for v in rep["homological_residual"])
        and rt < 60
    )
    return CriterionResult(
        9,
        "normal-form exactness",
        ok,
        f"coupling terms at orders 1, 2: {rep['coupling_terms']}; {{N, Z}} = 0: {rep['gauge_Z']}; {{N, R}} = 0: {rep['gauge_R']}; homological residuals {rep['homological_residual']}; {rt:.1f} s (< 60 s)",
        {k: v for k, v in rep.items()},
    )


def criterion_10(seed: int = 0) -> CriterionResult:
    _, _, sp, _ = double_well_setup()
    M, n = 6, 2
    tr = ModeTruncation(tuple(sp.eigenvalues[:M]), n, HBAR)
    bands = build_bands(tr)
    NE = e_norm_poly(bands, 1, exact=True)
    Nu = number_operator(M, range(n), exact=True)
    count, bad = 0, 0
    for K, L in gauge_monomials(M, 6):
        if sum(K[n:]) + sum(L[n:]) > 2 or classify_monomial(K, L, bands) == "coupling":
            continue
        mono = Poly.monomial(M, K, L, 1, exact=True)
        count += 1
        if poisson_bracket(NE, mono) or poisson_bracket(Nu, mono):
            bad += 1
    # noncoupling polynomial with cubic z-part
    rng = np.random.default_rng(seed)
    cubic = [
        (K, L)
        for K, L in gauge_monomials(M, 6)
        if sum(K[n:]) + sum(L[n:]) == 3 and sum(K[n:]) != sum(L[n:]) and K <= L
    ]
    pick = rng.choice(len(cubic), size=min(12, len(cubic)), replace=False)
    terms = {}
    for i in pick:
        K, L = cubic[i]
        c = complex(rng.standard_normal(), rng.standard_normal())
        terms[(K, L)] = c
        terms[(L, K)] = c.conjugate()
    Z = Poly(M, terms)
    br = poisson_bracket(e_norm_poly(bands, 1), Z).compile()
    u = np.array([0.6, 0.5 + 0.2j])
    direction = rng.standard_normal(M - n) + 1j * rng.standard_normal(M - n)
    ne, val = [], []
    for t in np.logspace(-1, -4, 7):
        z = np.concatenate([u, t * direction])
        ne.append(e_norm(z[n:], bands, 1))
        val.append(abs(br.value(z)))
    fit = scaling_fit(ne, val)
    ok = bad == 0 and abs(fit["slope"] - 1.5) <= 0.1
    return CriterionResult(
        10,
        "noncoupling invariance",
        ok,
        f"{count} noncoupling monomials, {bad} with nonzero brackets; log|{{N_E, Z}}| vs log N_E slope {fit['slope']:.4f} (1.5 +- 0.1)",
        {"monomials": count, "nonzero": bad, "slope": fit["slope"]},
    )


def criterion_11(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    hbars = (0.05, 0.1, 0.2)
    worst = []
    for hbar in hbars:
        kmax = int(np.floor((7.0 - 1.0) / (2 * hbar) + 0.5))
        lam = 1.0 + hbar * (2 * np.arange(1, kmax + 1) - 1)
        bands = build_bands(ModeTruncation(tuple(lam), 1, hbar))
        best = 0.0
        for _ in range(100):
            F = random_band_sparse(bands, rng)
            best = max(best, small_divisor_bound_check(F, lam, bands)["ratio"])
        worst.append(best)
    fit = scaling_fit(1.0 / np.array(hbars), worst)
    return CriterionResult(
        11,
        "small-divisor scaling",
        fit["slope"] <= 1.7,
        f"log max ||G||/||F|| vs log(1/hbar) slope {fit['slope']:.3f} (<= 1.7); ratios {np.round(worst, 3).tolist()}",
        {"slope": fit["slope"], "max_ratio": worst},
    )


def criterion_12(seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    etas = (10.0, 20.0, 40.0, 80.0)
    med = []
    for eta in etas:
        m = DnlsModel.from_scaled([0, 0, 0], [1.0, 1.0], eta, 2)
        med.append(action_drift_stats(m, 100, 0.2, 200.0, seed=seed)["median"])
    fit = scaling_fit(etas, med)
    rt = time.perf_counter() - t0
    ok = -0.75 <= fit["slope"] <= -0.25 and rt < 300
    return CriterionResult(
        12,
        "anticontinuum drift",
        ok,
        f"log median drift vs log eta slope {fit['slope']:.3f} (in [-0.75, -0.25]); medians {np.round(med, 4).tolist()}; {rt:.0f} s (< 300 s)",
        {"slope": fit["slope"], "medians": med},
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}


def run_criterion(k: int, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    fn = CRITERIA[k]
    res = fn(seed) if k in (10, 11, 12) else fn()
    res.runtime = time.perf_counter() - t0
    return res


def run_all(which=None, seed: int = 0, echo=None) -> list:
    out = []
    for k in which or sorted(CRITERIA):
        res = run_criterion(k, seed)
        if echo is not None:
            echo(format_line(res))
        out.append(res)
    return out
