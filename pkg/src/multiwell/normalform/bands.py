"""Mode truncation, band decomposition of the high modes, coupling classification."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ConfigError
from .poly import Poly, to_exact


@dataclass(frozen=True)
class ModeTruncation:
    """Galerkin truncation to M eigenmodes; the first n are the low (u) modes.

    ``Omega`` defaults to the mean of the first n eigenvalues.
    """

    eigenvalues: tuple
    n: int
    hbar: float
    Omega: float | None = None

    def __post_init__(self):
        lam = tuple(float(x) for x in self.eigenvalues)
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise ConfigError("eigenvalues must be strictly ascending")
        if not 1 <= self.n < len(lam):
            raise ConfigError(f"need 1 <= n < M, got n = {self.n}, M = {len(lam)}")
        object.__setattr__(self, "eigenvalues", lam)
        if self.Omega is None:
            object.__setattr__(self, "Omega", float(np.mean(lam[: self.n])))

    @property
    def M(self) -> int:
        return len(self.eigenvalues)

    @property
    def omega(self) -> float:
        return 0.5 * (self.eigenvalues[self.n - 1] - self.eigenvalues[0])

    def frequencies(self, exact: bool = False) -> list:
        """Frequencies of H0: Omega on the u-modes, lambda_j on the z-modes.

        In exact mode Omega is the exact rational mean of the exactly
        converted eigenvalues.
        """
        if exact:
            lam = [Fraction(x) for x in self.eigenvalues]
            Om = sum(lam[: self.n], Fraction(0)) / self.n if self.Omega == float(np.mean(self.eigenvalues[: self.n])) else Fraction(self.Omega)
            return [Om] * self.n + lam[self.n :]
        return [self.Omega] * self.n + list(self.eigenvalues[self.n :])

    def h0(self, exact: bool = False) -> Poly:
        return Poly.quadratic([to_exact(f) if exact else f for f in self.frequencies(exact)], exact)

    def shift(self, exact: bool = False) -> Poly:
        """sum_{j <= n} (lambda_j - Omega) |u_j|^2 (zero on the z-modes)."""
        freq = self.frequencies(exact)
        lam = [Fraction(x) for x in self.eigenvalues] if exact else list(self.eigenvalues)
        diag = [lam[j] - freq[j] if j < self.n else 0 for j in range(self.M)]
        return Poly.quadratic([to_exact(d) if exact else d for d in diag], exact)


@dataclass(frozen=True)
class BandDecomposition:
    """Band edges E_0 < E_1 < ... and the z-mode index sets between them.

    ``band_of[j]`` gives the band of mode j (None for u-modes); ``members[g]``
    lists the modes with E_{g-1} < lambda_j < E_g.
    """

    edges: tuple
    gaps: tuple
    band_of: tuple
    members: tuple
    n: int

    @property
    def gap(self) -> float:
        return min(self.gaps)

    def weight(self, j: int, s: int) -> float:
        g = self.band_of[j]
        if g is None:
            raise ConfigError(f"mode {j} is not a z-mode")
        return self.edges[g] ** s


def _best_point(lam: np.ndarray, lo: float, hi: float) -> tuple:
    pad = 1e-9 * (hi - lo)
    a, b = lo + pad, hi - pad
    pts = np.concatenate([[-np.inf], lam, [np.inf]])
    best, where = -1.0, None
    for left, right in zip(pts[:-1], pts[1:]):
        if right < a or left > b:
            continue
        if np.isinf(left) and np.isinf(right):
            x = 0.5 * (a + b)
        elif np.isinf(left):
            x = a
        elif np.isinf(right):
            x = b
        else:
            x = 0.5 * (left + right)
        x = min(max(x, a), b)
        d = np.min(np.abs(lam - x))
        if d > best:
            best, where = d, x
    return where, best


def build_bands(truncation: ModeTruncation, min_gap: float = 1e-12) -> BandDecomposition:
    """Pick E_g in (2g, 2g + 1) as far as possible from the computed spectrum.

    Windows are added until the last edge lies above every eigenvalue.
    """
    lam = np.asarray(truncation.eigenvalues)
    edges, gaps = [], []
    g = 0
    while not edges or edges[-1] <= lam[-1]:
        x, d = _best_point(lam, 2.0 * g, 2.0 * g + 1.0)
        if x is None or d <= min_gap:
            raise ConfigError(f"no spectral gap point in window {g}: ({2 * g}, {2 * g + 1})")
        edges.append(float(x))
        gaps.append(float(d))
        g += 1
    band_of = [None] * truncation.M
    members = [[] for _ in edges]
    for j in range(truncation.n, truncation.M):
        g = int(np.searchsorted(edges, lam[j]))
        band_of[j] = g
        members[g].append(j)
    return BandDecomposition(
        tuple(edges), tuple(gaps), tuple(band_of), tuple(tuple(m) for m in members), truncation.n
    )


def classify_monomial(K, L, bands: BandDecomposition, n: int | None = None) -> str:
    """'coupling' or 'noncoupling' for a Gauge-invariant monomial."""
    n = bands.n if n is None else n
    if sum(K) != sum(L):
        raise ConfigError("monomial is not Gauge invariant")
    m, nn = K[n:], L[n:]
    deg = sum(m) + sum(nn)
    if deg not in (1, 2):
        return "noncoupling"
    if sum(m) == 1 and sum(nn) == 1:
        i = n + next(k for k, v in enumerate(m) if v)
        j = n + next(k for k, v in enumerate(nn) if v)
        return "coupling" if bands.band_of[i] != bands.band_of[j] else "noncoupling"
    return "coupling"


def is_coupling(K, L, bands: BandDecomposition) -> bool:
    return classify_monomial(K, L, bands) == "coupling"


def decompose(H: Poly, bands: BandDecomposition) -> tuple:
    """(F, Z) with F the coupling part and Z the rest; F + Z == H."""
    if not H.is_gauge_invariant():
        raise ConfigError("decompose needs a Gauge-invariant polynomial")
    F = H.filter(lambda K, L: is_coupling(K, L, bands))
    Z = H.filter(lambda K, L: not is_coupling(K, L, bands))
    return F, Z


def e_norm(z, bands: BandDecomposition, s: int = 1) -> float:
    """sum_g E_g^s sum_{j in J_g} |z_j|^2; ``z`` holds the z-mode coordinates in order."""
    z = np.asarray(z)
    modes = [j for j, g in enumerate(bands.band_of) if g is not None]
    if len(z) != len(modes):
        raise ConfigError(f"expected {len(modes)} z coordinates, got {len(z)}")
    w = np.array([bands.edges[bands.band_of[j]] ** s for j in modes])
    return float(np.sum(w * np.abs(z) ** 2))


def e_norm_poly(bands: BandDecomposition, s: int = 1, exact: bool = False) -> Poly:
    """The E-norm as a quadratic polynomial in all M variables."""
    diag = []
    for g in bands.band_of:
        w = 0.0 if g is None else bands.edges[g] ** s
        diag.append(to_exact(w) if exact else w)
    return Poly.quadratic(diag, exact)


def band_counts(bands: BandDecomposition) -> list:
    return [len(m) for m in bands.members]
