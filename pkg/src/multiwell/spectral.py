"""Discretized linear Schrodinger operator, well basis, projectors and graded norms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import ConfigError, NumericalError, ResolutionError
from .grid import Grid
from .potential import PotentialSpec, default_threshold, modified_potential

__all__ = [
    "Grid",
    "SpectralData",
    "WellBasis",
    "eigensolve",
    "single_well_basis",
    "splitting",
    "spectral_gap",
    "project",
    "xs_norm",
    "alt_norm",
    "algebra_check",
]


def _samples(potential, grid: Grid) -> np.ndarray:
    if isinstance(potential, np.ndarray):
        if potential.shape != grid.x.shape:
            raise ConfigError("potential samples do not match the grid")
        return potential.astype(float)
    return np.asarray(potential(grid.x), dtype=float)


def kinetic(psi: np.ndarray, grid: Grid, hbar: float, method: str) -> np.ndarray:
    """-hbar^2 psi'' in the given discretization (along axis 0)."""
    h2 = hbar * hbar
    if method == "fd":
        out = 2.0 * psi.copy()
        out[1:] -= psi[:-1]
        out[:-1] -= psi[1:]
        return h2 * out / grid.h**2
    if method == "fourier":
        k2 = grid.k**2
        shape = (-1,) + (1,) * (psi.ndim - 1)
        out = h2 * np.fft.ifft(k2.reshape(shape) * np.fft.fft(psi, axis=0), axis=0)
        return out if np.iscomplexobj(psi) else out.real
    raise ConfigError(f"unknown discretization {method!r}")


@dataclass(frozen=True)
class SpectralData:
    """Lowest K eigenpairs of H0 = -hbar^2 d^2/dx^2 + V on a grid.

    Eigenvectors are real, L2-normalized with grid quadrature and signed so
    that their leftmost significant lobe is positive.
    """

    hbar: float
    grid: Grid
    V: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    method: str = "fd"

    @property
    def K(self) -> int:
        return len(self.eigenvalues)

    def apply_h0(self, psi: np.ndarray) -> np.ndarray:
        V = self.V.reshape((-1,) + (1,) * (np.ndim(psi) - 1))
        return kinetic(psi, self.grid, self.hbar, self.method) + V * psi

    def coefficients(self, psi: np.ndarray) -> np.ndarray:
        """Mode coordinates zeta_k = <phi_k, psi> for the stored modes."""
        return self.eigenvectors.T @ psi * self.grid.h

    def synthesize(self, zeta: np.ndarray) -> np.ndarray:
        return self.eigenvectors[:, : len(zeta)] @ zeta

    def residuals(self) -> np.ndarray:
        r = self.apply_h0(self.eigenvectors) - self.eigenvectors * self.eigenvalues
        return np.sqrt(np.sum(r * r, axis=0) * self.grid.h)


def _fix_signs(vecs: np.ndarray, rel: float = 1e-3) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        v = out[:, j]
        first = np.flatnonzero(np.abs(v) > rel * np.max(np.abs(v)))[0]
        if v[first] < 0:
            out[:, j] = -v
    return out


def eigensolve(
    potential: PotentialSpec | Callable | np.ndarray,
    grid: Grid,
    hbar: float,
    K: int,
    method: str = "fd",
    margin: float = 1.0,
    residual_tol: float = 1e-8,
) -> SpectralData:
    """K lowest eigenpairs of the symmetric discretization of -hbar^2 d^2 + V.

    Args:
        potential: a ``PotentialSpec``, any callable V(x), or samples on ``grid``.
        grid: uniform grid.
        hbar: semiclassical parameter.
        K: number of eigenpairs.
        method: ``"fd"`` for second-order finite differences (tridiagonal)
            or ``"fourier"`` for the pseudospectral Laplacian.
        margin: required excess of V at the grid edges over the largest
            eigenvalue.
        residual_tol: bound on ||H0 phi - lambda phi|| relative to max(1, lambda).
    """
    if hbar <= 0:
        raise ConfigError(f"hbar must be positive, got {hbar}")
    if K < 1 or K > grid.N // 4:
        raise ConfigError(f"K = {K} outside 1..N/4 = {grid.N // 4}")
    V = _samples(potential, grid)
    h2 = hbar * hbar / grid.h**2
    try:
        if method == "fd":
            d = 2.0 * h2 + V
            e = -h2 * np.ones(grid.N - 1)
            lam, vec = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, K - 1))
        elif method == "fourier":
            lam, vec = _fourier_eigs(V, grid, hbar, K)
        else:
            raise ConfigError(f"unknown discretization {method!r}")
    except (linalg.LinAlgError, ArithmeticError) as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(lam)
    lam, vec = lam[order], vec[:, order]
    vec = vec / np.sqrt(np.sum(vec * vec, axis=0) * grid.h)
    vec = _fix_signs(vec)
    if np.any(np.diff(lam) <= 0):
        raise NumericalError("eigenvalues are not strictly ascending")
    edge = min(V[0], V[-1])
    if edge < lam[-1] + margin:
        raise ResolutionError(
            f"V at the grid edge ({edge:.4g}) does not exceed lambda_K = {lam[-1]:.4g} by {margin}"
        )
    for arr in (lam, vec, V):
        arr.setflags(write=False)
    data = SpectralData(float(hbar), grid, V, lam, vec, method)
    res = data.residuals()
    bad = res > residual_tol * np.maximum(1.0, np.abs(lam))
    if np.any(bad):
        raise NumericalError(f"eigen-residual {res.max():.3g} exceeds tolerance")
    return data


def _fourier_eigs(V, grid, hbar, K):
    h2 = hbar * hbar
    k2 = (2.0 * np.pi * np.fft.rfftfreq(grid.N, d=grid.h)) ** 2
    if grid.N <= 2048 or K > grid.N // 16:
        eye = np.eye(grid.N)
        T = h2 * np.fft.irfft(k2[:, None] * np.fft.rfft(eye, axis=0), n=grid.N, axis=0)
        H = 0.5 * (T + T.T) + np.diag(V)
        return linalg.eigh(H, subset_by_index=[0, K - 1])

    def matvec(v):
        v = np.ravel(v)
        return h2 * np.fft.irfft(k2 * np.fft.rfft(v), n=grid.N) + V * v

    op = LinearOperator((grid.N, grid.N), matvec=matvec, dtype=float)
    v0 = np.exp(-0.5 * (grid.x / max(grid.L / 8.0, 1.0)) ** 2)
    lam, vec = eigsh(op, k=K, which="SA", tol=1e-14, v0=v0, ncv=max(4 * K + 1, 40), maxiter=20000)
    return lam, vec


def splitting(spectral: SpectralData, n: int) -> tuple:
    """(omega, Omega) = ((lambda_n - lambda_1)/2, mean of lambda_1..lambda_n)."""
    if n < 1:
        raise ConfigError("well count must be positive")
    if spectral.K < n + 1 and n > 1:
        raise ConfigError(f"need at least n + 1 = {n + 1} eigenvalues, have {spectral.K}")
    lam = spectral.eigenvalues
    return 0.5 * float(lam[n - 1] - lam[0]), float(np.mean(lam[:n]))


def spectral_gap(spectral: SpectralData, n: int) -> float:
    """Distance of the lowest cluster lambda_1..lambda_n from the rest of the computed spectrum."""
    if spectral.K < n + 1:
        raise ConfigError(f"need at least n + 1 = {n + 1} eigenvalues")
    return float(spectral.eigenvalues[n] - spectral.eigenvalues[n - 1])


def project(spectral: SpectralData, n: int, psi: np.ndarray) -> tuple:
    """Split psi into its component in span(phi_1..phi_n) and the complement.

    Returns:
        (Pi psi, Pi_c psi, zeta) with zeta the coordinates on all stored modes.
    """
    psi = np.asarray(psi)
    if psi.shape[0] != spectral.grid.N:
        raise ConfigError("state does not live on the spectral grid")
    zeta = spectral.coefficients(psi)
    low = spectral.eigenvectors[:, :n] @ zeta[:n]
    return low, psi - low, zeta


def alt_norm(psi: np.ndarray, s: int, hbar: float, potential, grid: Grid) -> float:
    """(||(-hbar^2 Laplacian)^(s/2) psi||^2 + ||V^(s/2) psi||^2)^(1/2).

    The fractional Laplacian is the Fourier multiplier |hbar k|^s.
    """
    if s < 0:
        raise ConfigError("s must be nonnegative")
    V = _samples(potential, grid)
    psi = np.asarray(psi)
    mult = np.abs(hbar * grid.k) ** s if s else np.ones(grid.N)
    kin = np.fft.ifft(mult * np.fft.fft(psi))
    pot = V ** (0.5 * s) * psi
    return float(np.sqrt((np.sum(np.abs(kin) ** 2) + np.sum(np.abs(pot) ** 2)) * grid.h))


def xs_norm(
    spectral: SpectralData, psi: np.ndarray, s: int, strict: bool = True, rel_tol: float = 1e-8
) -> float:
    """Graph norm (sum_k lambda_k^s |zeta_k|^2 + tail)^(1/2).

    The part of psi outside the stored modes is bounded by ``alt_norm`` of
    the residual. With ``strict`` set, a tail exceeding ``rel_tol`` times the
    resolved part raises ``ResolutionError``.
    """
    if s < 0:
        raise ConfigError("s must be nonnegative")
    zeta = spectral.coefficients(psi)
    resolved = float(np.sum(spectral.eigenvalues**s * np.abs(zeta) ** 2))
    rest = np.asarray(psi) - spectral.synthesize(zeta)
    tail = alt_norm(rest, s, spectral.hbar, spectral.V, spectral.grid) ** 2
    if strict and tail > rel_tol * resolved:
        raise ResolutionError(
            f"unresolved spectral tail {tail:.3g} vs resolved {resolved:.3g}; increase K"
        )
    return float(np.sqrt(resolved + tail))


def algebra_check(spectral: SpectralData, states, s: int) -> float:
    """max ||f g||_s hbar^(1/2) / (||f||_s ||g||_s) over pairs from ``states``.

    Zero states are skipped; returns 0.0 when nothing is left.
    """
    if s < 1:
        raise ConfigError("the algebra property is stated for s >= 1")
    states = [np.asarray(f) for f in states]
    norms = [xs_norm(spectral, f, s) for f in states]
    best = 0.0
    for i, f in enumerate(states):
        for j in range(i, len(states)):
            if norms[i] == 0.0 or norms[j] == 0.0:
                continue
            prod = xs_norm(spectral, f * states[j], s)
            best = max(best, prod * np.sqrt(spectral.hbar) / (norms[i] * norms[j]))
    return best


@dataclass(frozen=True)
class WellBasis:
    """Single-well ground states and the orthonormal frame built from them.

    Attributes:
        lam_hat: lowest eigenvalue of each modified operator H_j.
        phi_hat: corresponding normalized ground states (columns).
        a_thr: threshold used for the modified potentials.
        c: least-squares coefficients phi_j ~ sum_k c[k, j] phi_hat_k.
        c_residual: L2 residual of that fit for each j.
        overlap: Gram matrix <phi_hat_i, phi_hat_j>.
        W: orthogonal n x n matrix; ``frame[:, j] = sum_k W[k, j] phi_k``.
        frame: symmetric orthonormalization of the projections of phi_hat_j
            onto span(phi_1..phi_n); column j is localized in well j.
    """

    hbar: float
    a_thr: float
    lam_hat: np.ndarray
    phi_hat: np.ndarray = field(repr=False)
    c: np.ndarray
    c_residual: np.ndarray
    overlap: np.ndarray
    W: np.ndarray
    frame: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.lam_hat)

    def amplitudes(self, grid: Grid, psi: np.ndarray) -> np.ndarray:
        """Well amplitudes <frame_j, psi>."""
        return self.frame.T @ psi * grid.h


def single_well_basis(
    spec: PotentialSpec,
    grid: Grid,
    hbar: float,
    a_thr: float | None = None,
    spectral: SpectralData | None = None,
    method: str = "fd",
    cond_max: float = 1e10,
) -> WellBasis:
    """Ground states of the modified single-well operators H_j and derived frame."""
    n = spec.n
    if a_thr is None:
        a_thr = default_threshold(spec)
    if spectral is None:
        spectral = eigensolve(spec, grid, hbar, n + 1, method=method)
    lam_hat = np.empty(n)
    phi_hat = np.empty((grid.N, n))
    for j in range(1, n + 1):
        Vj = modified_potential(spec, j, a_thr, grid.x)
        sd = eigensolve(Vj, grid, hbar, 1, method=spectral.method)
        lam_hat[j - 1] = sd.eigenvalues[0]
        v = sd.eigenvectors[:, 0]
        phi_hat[:, j - 1] = v if v[np.argmax(np.abs(v))] > 0 else -v
    S = phi_hat.T @ phi_hat * grid.h
    if np.linalg.cond(S) > cond_max:
        raise NumericalError("single-well states are nearly linearly dependent")
    phi = spectral.eigenvectors[:, :n]
    c = np.linalg.solve(S, phi_hat.T @ phi * grid.h)
    resid = np.sqrt(np.sum((phi - phi_hat @ c) ** 2, axis=0) * grid.h)
    B = phi.T @ phi_hat * grid.h
    U, _, Vt = np.linalg.svd(B)
    W = U @ Vt
    frame = phi @ W
    for arr in (lam_hat, phi_hat, c, resid, S, W, frame):
        arr.setflags(write=False)
    return WellBasis(float(hbar), float(a_thr), lam_hat, phi_hat, c, resid, S, W, frame)
