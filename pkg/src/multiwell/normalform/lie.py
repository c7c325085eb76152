"""Finite-order normal form by Lie transforms with explicit eps-order bookkeeping.

The energy restricted to M eigenmodes is written as a formal series
sum_p eps^p E_p with

    E_0 = H0 = Omega sum_{j<=n} |u_j|^2 + sum_{j>n} lambda_j |z_j|^2,
    E_1 = P_eps = (1/eps) sum_{j<=n} (lambda_j - Omega) |u_j|^2 + P0,

where P0 is the nonlinearity (1/(sigma+1)) int |sum zeta_k phi_k|^(2 sigma + 2)
expanded in monomials. Step r -> r+1 removes the coupling part F of E_{r+1}
with a generator G solving {H0, G} = -F and replaces the series by its
composition with the time eps^(r+1) flow of G,

    sum_k eps^((r+1) k) / k! ad_G^k E,   ad_G F = {F, G}.

Orders above ``p_max`` and degrees above the cap are discarded.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import ConfigError, NumericalError
from .bands import BandDecomposition, ModeTruncation, build_bands, decompose, is_coupling
from .homological import solve_homological
from .poly import Poly, multi_indices, multinomial, number_operator, poisson_bracket, to_complex, to_exact


@dataclass(frozen=True)
class NormalFormConfig:
    """Normal-form parameters.

    Attributes:
        sigma: nonlinearity power.
        max_degree: polynomial degree cap (default 2 sigma + 4).
        r_max: number of Lie steps, or "auto" for min(r_*, r_auto_cap).
        series_cap: largest k kept in each Lie series.
        p_max: highest eps order kept (default r + 1).
        R, delta: radius and analyticity step entering the recorded constants.
        mu_star: the refusal threshold is mu_star hbar^(3/2) / 2.
        exact: Gaussian-rational arithmetic instead of floating point.
        chop: relative size below which quadrature coefficients count as zero.
    """

    sigma: int = 1
    max_degree: int | None = None
    r_max: int | str = 2
    r_auto_cap: int = 4
    series_cap: int = 6
    p_max: int | None = None
    R: float = 1.0
    delta: float = 0.25
    mu_star: float = 2.0
    exact: bool = False
    chop: float = 1e-12

    def __post_init__(self):
        if self.sigma < 1:
            raise ConfigError("sigma must be positive")
        if self.max_degree is None:
            object.__setattr__(self, "max_degree", 2 * self.sigma + 4)
        if self.max_degree < 2 * self.sigma + 2:
            raise ConfigError(f"degree cap {self.max_degree} is below the nonlinearity degree {2 * self.sigma + 2}")
        if self.r_max != "auto" and int(self.r_max) < 0:
            raise ConfigError("r_max must be nonnegative or 'auto'")


def majorant_norm(H: Poly, R: float) -> float:
    """sum |c| deg R^(deg - 1): bounds the vector field of H on the ball of radius R."""
    if R <= 0:
        raise ConfigError("R must be positive")
    total = 0.0
    for (K, L), c in H.terms.items():
        d = sum(K) + sum(L)
        total += abs(to_complex(c)) * d * R ** (d - 1)
    return total


def nonlinear_poly(phi: np.ndarray, h: float, sigma: int, exact: bool = False, chop: float = 1e-12) -> Poly:
    """(1/(sigma+1)) int |sum_k zeta_k phi_k|^(2 sigma + 2) dx as a polynomial.

    ``phi`` holds real eigenfunctions as columns. Coefficients with modulus
    below ``chop`` times the largest one are parity zeros and are dropped.
    """
    phi = np.asarray(phi, dtype=float)
    M = phi.shape[1]
    idx = list(multi_indices(M, sigma + 1))
    prods = np.array([np.prod(phi ** np.array(e), axis=1) for e in idx])
    ints = prods @ prods.T * h
    mult = np.array([multinomial(e) for e in idx], dtype=float)
    coef = ints * mult[:, None] * mult[None, :] / (sigma + 1)
    coef = 0.5 * (coef + coef.T)
    cut = chop * np.abs(coef).max()
    terms = {}
    for a, K in enumerate(idx):
        for b, L in enumerate(idx):
            if abs(coef[a, b]) > cut:
                terms[(K, L)] = float(coef[a, b])
    return Poly(M, terms, exact)


def energy_series(truncation: ModeTruncation, P0: Poly, eps, exact: bool = False) -> dict:
    """{0: H0, 1: P_eps} for eps != 0."""
    if eps == 0:
        raise ConfigError("the eps series is undefined at eps = 0")
    e = to_exact(Fraction(eps)) if exact else complex(eps)
    shift = truncation.shift(exact)
    P = shift.scale(1 / e if not exact else to_exact(1) / e) + (P0.to_exact() if exact else P0.to_float())
    return {0: truncation.h0(exact), 1: P}


def _coupling_part(H: Poly, bands: BandDecomposition) -> Poly:
    return H.filter(lambda K, L: is_coupling(K, L, bands))


def _bracket_capped(A: Poly, G: Poly, D: int) -> Poly:
    """{A, G} keeping degrees <= D; pairs that cannot fit are skipped early."""
    if not A or not G:
        return Poly.zero(A.M, A.exact)
    gdeg = {}
    for key, c in G.terms.items():
        gdeg.setdefault(sum(key[0]) + sum(key[1]), {})[key] = c
    adeg = {}
    for key, c in A.terms.items():
        adeg.setdefault(sum(key[0]) + sum(key[1]), {})[key] = c
    out = Poly.zero(A.M, A.exact)
    dropped = False
    for da, at in adeg.items():
        for dg, gt in gdeg.items():
            if da + dg - 2 > D:
                dropped = True
                continue
            out = out + poisson_bracket(Poly._raw(A.M, at, A.exact), Poly._raw(G.M, gt, G.exact))
    out.truncated = dropped
    return out


def lie_series(series: dict, G: Poly, g_order: int, p_max: int, D: int, k_max: int) -> tuple:
    """Compose the series with the time eps^g_order flow of G.

    Returns:
        (new series, truncated flag).
    """
    new = {p: P for p, P in series.items()}
    term = dict(series)
    truncated = False
    for k in range(1, k_max + 1):
        inv_k = to_exact(Fraction(1, k)) if G.exact else 1.0 / k
        nxt = {}
        for p, P in term.items():
            q = p + g_order
            if q > p_max:
                continue
            B = _bracket_capped(P, G, D)
            truncated = truncated or B.truncated
            B = B.scale(inv_k)
            if B:
                nxt[q] = nxt[q] + B if q in nxt else B
        term = nxt
        if not term:
            break
        for q, B in term.items():
            new[q] = new[q] + B if q in new else B
    else:
        if term:
            worst = max(term)
            raise NumericalError(f"series cap {k_max} reached with nonzero terms at eps order {worst}")
    return new, truncated


@dataclass
class StepRecord:
    order: int
    generator: Poly
    removed: Poly
    alpha: float


def lie_transform_step(
    series: dict,
    r: int,
    truncation: ModeTruncation,
    bands: BandDecomposition,
    p_max: int,
    max_degree: int,
    series_cap: int = 6,
) -> tuple:
    """Remove the coupling part at eps order r + 1.

    Returns:
        (new series, StepRecord, truncated flag).
    """
    target = series.get(r + 1)
    if target is None:
        M = series[0].M
        target = Poly.zero(M, series[0].exact)
    if not target.is_gauge_invariant():
        raise ConfigError(f"order {r + 1} term is not Gauge invariant")
    F = _coupling_part(target, bands)
    G, alpha = solve_homological(F, truncation, bands, sign=-1)
    if not G:
        return dict(series), StepRecord(r + 1, G, F, alpha), False
    new, trunc = lie_series(series, G, r + 1, p_max, max_degree, series_cap)
    return new, StepRecord(r + 1, G, F, alpha), trunc


@dataclass
class NormalFormResult:
    """Output of the finite-order normal form.

    ``series[p]`` is the eps^p coefficient of E o T. Orders 1..r are free of
    coupling monomials and form Z; orders above r form R.
    """

    truncation: ModeTruncation
    bands: BandDecomposition
    eps: float
    r: int
    series: dict
    steps: list
    constants: dict
    truncated: bool
    shift: Poly
    exact: bool
    sigma: int

    @property
    def generators(self) -> list:
        return [s.generator for s in self.steps]

    @property
    def H0(self) -> Poly:
        return self.series[0] if self.series else self.truncation.h0(self.exact)

    def Z_orders(self) -> dict:
        return {p: P for p, P in self.series.items() if 1 <= p <= self.r}

    def R_orders(self) -> dict:
        return {p: P for p, P in self.series.items() if p > self.r}

    def _sum(self, orders: dict) -> Poly:
        out = Poly.zero(self.truncation.M)
        for p, P in orders.items():
            out = out + P.to_float().scale(self.eps**p)
        return out

    def Z(self) -> Poly:
        """Noncoupling part sum_{p<=r} eps^p Z_p as a floating polynomial."""
        if self.eps == 0 or self.r == 0:
            return self.shift.to_float()
        return self._sum(self.Z_orders())

    def total(self) -> Poly:
        """sum_{p>=1} eps^p E_p, i.e. everything except H0."""
        if self.eps == 0:
            return self.shift.to_float()
        return self._sum({p: P for p, P in self.series.items() if p >= 1})

    def R(self) -> Poly:
        if self.eps == 0:
            return Poly.zero(self.truncation.M)
        if self.r == 0:
            return (self.total() - self.shift.to_float()).chop(0.0)
        return self._sum(self.R_orders())

    def K(self) -> Poly:
        """Z restricted to z = 0, as a polynomial in the n u-modes."""
        n = self.truncation.n
        M = self.truncation.M
        restricted = self.Z().filter(lambda K, L: not any(K[n:]) and not any(L[n:]))
        terms = {(K[:n], L[:n]): c for (K, L), c in restricted.terms.items()}
        return Poly._raw(n, terms, False)

    def exactness_report(self) -> dict:
        """Residual checks: coupling content at orders 1..r, Gauge brackets, homological residuals."""
        M = self.truncation.M
        N = number_operator(M, exact=self.exact)
        coupling = {p: len(_coupling_part(P, self.bands)) for p, P in self.Z_orders().items()}
        gauge_Z = all(not poisson_bracket(N, P) for P in self.Z_orders().values())
        gauge_R = all(not poisson_bracket(N, P) for P in self.R_orders().values())
        H0 = self.truncation.h0(self.exact)
        homological = []
        for s in self.steps:
            res = poisson_bracket(H0, s.generator) + s.removed
            homological.append(0.0 if not res else res.max_abs())
        gens_coupling = all(
            all(is_coupling(K, L, self.bands) for K, L in s.generator.terms) for s in self.steps
        )
        return {
            "coupling_terms": coupling,
            "gauge_Z": gauge_Z,
            "gauge_R": gauge_R,
            "homological_residual": homological,
            "generators_coupling": gens_coupling,
        }

    def transformation(self, zeta, substeps: int = 20) -> np.ndarray:
        """Numerical T = Phi_{G_1}^{eps} o ... o Phi_{G_r}^{eps^r} (innermost applied first)."""
        z = np.array(zeta, dtype=complex)
        for s in reversed(self.steps):
            if not s.generator:
                continue
            f = s.generator.compile()
            t = self.eps**s.order
            dt = t / substeps
            for _ in range(substeps):
                k1 = f.vector_field(z)
                k2 = f.vector_field(z + 0.5 * dt * k1)
                k3 = f.vector_field(z + 0.5 * dt * k2)
                k4 = f.vector_field(z + dt * k3)
                z = z + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return z

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "r": self.r,
            "M": self.truncation.M,
            "n": self.truncation.n,
            "sigma": self.sigma,
            "eigenvalues": list(self.truncation.eigenvalues),
            "band_edges": list(self.bands.edges),
            "constants": self.constants,
            "truncated": self.truncated,
            "series": {str(p): P.to_json(eps_order=p) for p, P in self.series.items()},
            "generators": [s.generator.to_json(eps_order=s.order) for s in self.steps],
        }


def _coupling_alpha(P: Poly, truncation: ModeTruncation, bands: BandDecomposition) -> float:
    F = _coupling_part(P, bands)
    if not F:
        return np.inf
    _, alpha = solve_homological(F.to_float(), truncation, bands)
    return alpha


def normal_form(
    truncation: ModeTruncation,
    eps: float,
    P0: Poly,
    config: NormalFormConfig = NormalFormConfig(),
    bands: BandDecomposition | None = None,
) -> NormalFormResult:
    """Run r Lie steps on the truncated energy and record the constants.

    Raises:
        ConfigError: mu = omega + |eps| / hbar^sigma is not below
            mu_star hbar^(3/2) / 2.
    """
    if bands is None:
        bands = build_bands(truncation)
    exact = config.exact
    hbar = truncation.hbar
    mu = truncation.omega + abs(eps) / hbar**config.sigma
    threshold = config.mu_star * hbar**1.5 / 2
    if mu >= threshold:
        raise ConfigError(f"mu = {mu:.4g} is not below the threshold {threshold:.4g}")
    shift = truncation.shift(exact)
    constants = {"mu": mu, "mu_threshold": threshold, "R": config.R, "delta": config.delta}
    if eps == 0:
        constants.update(alpha=np.inf, P=0.0, P_star=0.0, eps0=np.inf, eps_star=np.inf, r_star=0)
        return NormalFormResult(
            truncation, bands, 0.0, 0, {0: truncation.h0(exact)}, [], constants, False, shift, exact, config.sigma
        )
    series = energy_series(truncation, P0, eps, exact)
    P_eps = series[1].to_float()
    P = majorant_norm(P_eps, config.R)
    P_star = majorant_norm(P_eps, config.R + config.delta)
    alpha0 = _coupling_alpha(P_eps, truncation, bands)
    eps0 = alpha0 * config.delta / (75 * P)
    eps_star = alpha0 * config.R / (150 * math.e * P)
    r_star = math.ceil(eps_star / abs(eps)) if np.isfinite(eps_star) else config.r_auto_cap
    r = max(1, min(r_star, config.r_auto_cap)) if config.r_max == "auto" else int(config.r_max)
    p_max = config.p_max if config.p_max is not None else r + 1
    steps, truncated = [], False
    for k in range(r):
        series, rec, tr = lie_transform_step(series, k, truncation, bands, p_max, config.max_degree, config.series_cap)
        steps.append(rec)
        truncated = truncated or tr
    alpha = min([s.alpha for s in steps] + [np.inf])
    constants.update(
        alpha=float(alpha),
        alpha_first_order=float(alpha0),
        P=P,
        P_star=P_star,
        eps0=float(eps0),
        eps_star=float(eps_star),
        r_star=int(r_star),
        p_max=p_max,
    )
    return NormalFormResult(truncation, bands, float(eps), r, series, steps, constants, truncated, shift, exact, config.sigma)


def truncation_from_spectral(spectral, n: int, M: int) -> ModeTruncation:
    if spectral.K < M:
        raise ConfigError(f"spectral data has {spectral.K} modes, need {M}")
    return ModeTruncation(tuple(spectral.eigenvalues[:M]), n, spectral.hbar)


def normal_form_from_spectral(spectral, n: int, M: int, eps: float, config: NormalFormConfig = NormalFormConfig()):
    truncation = truncation_from_spectral(spectral, n, M)
    P0 = nonlinear_poly(spectral.eigenvectors[:, :M], spectral.grid.h, config.sigma, config.exact, config.chop)
    return normal_form(truncation, eps, P0, config)


def substitute_linear(P: Poly, W: np.ndarray) -> Poly:
    """P(W psi) for a real n x n matrix W, as a polynomial in psi."""
    W = np.asarray(W, dtype=float)
    n = P.M
    one = Poly.monomial(n, (0,) * n, (0,) * n, 1.0)
    lin, linc = [], []
    for a in range(n):
        terms = {}
        cterms = {}
        for b in range(n):
            e = tuple(int(i == b) for i in range(n))
            z = (0,) * n
            terms[(e, z)] = W[a, b]
            cterms[(z, e)] = W[a, b]
        lin.append(Poly(n, terms))
        linc.append(Poly(n, cterms))
    out = Poly.zero(n)
    cache = {}

    def power(base, a, k):
        key = (id(base), a, k)
        if key not in cache:
            cache[key] = one if k == 0 else power(base, a, k - 1).multiply(base[a])
        return cache[key]

    for (K, L), c in P.to_float().terms.items():
        term = one.scale(c)
        for a in range(n):
            if K[a]:
                term = term.multiply(power(lin, a, K[a]))
            if L[a]:
                term = term.multiply(power(linc, a, L[a]))
        out = out + term
    return out.chop(0.0)


def dnls_poly(model) -> Poly:
    """omega K0 as a polynomial in the well amplitudes (absolute energy units, frame shifted by Omega)."""
    n, sig = model.n, model.sigma
    terms = {}
    for j in range(n):
        e = tuple(int(i == j) for i in range(n))
        terms[(e, e)] = model.omega * model.delta[j]
        big = tuple((sig + 1) * x for x in e)
        terms[(big, big)] = model.omega * model.eta / (sig + 1)
    for j in range(n - 1):
        a = tuple(int(i == j) for i in range(n))
        b = tuple(int(i == j + 1) for i in range(n))
        terms[(a, b)] = model.omega * model.hopping[j + 1]
        terms[(b, a)] = model.omega * model.hopping[j + 1]
    return Poly(n, terms)


def compare_k_k0(result: NormalFormResult, W: np.ndarray, model) -> dict:
    """Coefficient table of K(W psi) against omega K0(psi).

    Reports the relative deviation of the hopping and on-site nonlinear
    coefficients and the largest coefficient K0 does not contain, relative
    to the on-site nonlinear one.
    """
    Kpsi = substitute_linear(result.K(), W)
    K0 = dnls_poly(model)
    rows = []
    keys = sorted(set(Kpsi.terms) | set(K0.terms))
    for key in keys:
        a = to_complex(Kpsi.terms.get(key, 0.0))
        b = to_complex(K0.terms.get(key, 0.0))
        rows.append({"K": list(key[0]), "L": list(key[1]), "normal_form": [a.real, a.imag], "dnls": [b.real, b.imag]})
    n, sig = model.n, model.sigma
    e1 = tuple(int(i == 0) for i in range(n))
    e2 = tuple(int(i == 1) for i in range(n))
    big = tuple((sig + 1) * x for x in e1)
    hop_key, nl_key = (e1, e2), (big, big)

    def rel(key):
        a = to_complex(Kpsi.terms.get(key, 0.0))
        b = to_complex(K0.terms.get(key, 0.0))
        return abs(a - b) / abs(b) if b else np.inf

    nl = abs(to_complex(K0.terms[nl_key]))
    dropped = max(
        (abs(to_complex(c)) for k, c in Kpsi.terms.items() if k not in K0.terms and sum(k[0]) > 1),
        default=0.0,
    )
    return {
        "rows": rows,
        "hopping_rel": rel(hop_key) if n > 1 else 0.0,
        "onsite_rel": rel(nl_key),
        "dropped_rel": dropped / nl if nl else np.inf,
    }
