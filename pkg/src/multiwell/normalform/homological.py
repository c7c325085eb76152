"""Homological equation {H0, G} = sign * F and the matrix small-divisor check."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, NumericalError
from .bands import BandDecomposition, ModeTruncation, is_coupling
from .poly import I_EXACT, Poly, to_exact


def divisor(K, L, freqs) -> object:
    """sum_k freqs[k] (K_k - L_k)."""
    return sum((f * (a - b) for f, a, b in zip(freqs, K, L) if a != b), 0)


def solve_homological(
    F: Poly,
    truncation: ModeTruncation,
    bands: BandDecomposition,
    sign: int = 1,
    check_coupling: bool = True,
) -> tuple:
    """Solve {H0, G} = sign * F for coupling F, monomial by monomial.

    Each coefficient is divided by i d with d = freq . (K - L); the u-modes
    carry frequency Omega.

    Returns:
        (G, smallest |d| used, or inf when F = 0).
    """
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    freqs = truncation.frequencies(F.exact)
    if F.exact:
        freqs = [to_exact(f) for f in freqs]
    unit = I_EXACT if F.exact else 1j
    out = {}
    alpha = np.inf
    for (K, L), c in F.terms.items():
        if check_coupling and not is_coupling(K, L, bands):
            raise ConfigError(f"noncoupling monomial {(K, L)} passed to the homological solver")
        d = divisor(K, L, freqs)
        if not d:
            raise NumericalError(f"zero divisor for monomial K={K}, L={L}")
        alpha = min(alpha, abs(complex(float(d.x), float(d.y))) if F.exact else abs(d))
        out[(K, L)] = c * sign / (unit * d)
    return Poly._raw(F.M, out, F.exact), alpha


def small_divisor_bound_check(F: np.ndarray, eigenvalues, bands: BandDecomposition, modes=None) -> dict:
    """Operator norms of F and of G_jl = F_jl / (i (lambda_l - lambda_j)).

    ``F`` is indexed by the z-modes listed in ``modes`` (all z-modes of
    ``bands`` by default); entries joining modes of the same band must vanish.
    """
    F = np.asarray(F, dtype=complex)
    lam = np.asarray(eigenvalues, dtype=float)
    if modes is None:
        modes = [j for j, g in enumerate(bands.band_of) if g is not None]
    if F.shape != (len(modes), len(modes)):
        raise ConfigError(f"F must be {len(modes)} x {len(modes)}")
    band = np.array([bands.band_of[j] for j in modes])
    same = band[:, None] == band[None, :]
    if np.any(F[same] != 0):
        raise ConfigError("F has entries inside a band")
    lm = lam[list(modes)]
    d = lm[None, :] - lm[:, None]
    G = np.zeros_like(F)
    mask = ~same
    G[mask] = F[mask] / (1j * d[mask])
    nF = float(np.linalg.norm(F, 2)) if F.size else 0.0
    nG = float(np.linalg.norm(G, 2)) if G.size else 0.0
    return {
        "norm_F": nF,
        "norm_G": nG,
        "ratio": nG / nF if nF > 0 else 0.0,
        "min_divisor": float(np.min(np.abs(d[mask]))) if mask.any() else np.inf,
    }


def random_band_sparse(bands: BandDecomposition, rng: np.random.Generator, modes=None) -> np.ndarray:
    """Hermitian Gaussian matrix on the z-modes with the within-band blocks zeroed."""
    if modes is None:
        modes = [j for j, g in enumerate(bands.band_of) if g is not None]
    m = len(modes)
    A = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    A = 0.5 * (A + A.conj().T)
    band = np.array([bands.band_of[j] for j in modes])
    A[band[:, None] == band[None, :]] = 0.0
    return A
