"""Gross-Pitaevskii integration: i hbar psi_t = H0 psi + eps |psi|^(2 sigma) psi."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError, ResolutionError
from .spectral import SpectralData, WellBasis, splitting, xs_norm

METHODS = ("eigen", "fourier")


@dataclass(frozen=True)
class GpeRunConfig:
    """Parameters of one field run.

    ``dt=None`` selects T/2000 with T = pi hbar / omega for the lowest ``n``
    levels. ``stride`` controls field snapshots, ``obs_stride`` observables.
    """

    hbar: float
    eps: float
    sigma: int = 2
    t_end: float = 1.0
    dt: float | None = None
    n: int = 2
    stride: int = 0
    obs_stride: int = 1
    method: str = "eigen"
    K: int = 64
    s: int = 1
    tail_tol: float = 1e-5
    init_tail_tol: float = 1e-8

    def __post_init__(self):
        if self.hbar <= 0:
            raise ConfigError("hbar must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_end <= 0:
            raise ConfigError("t_end must be positive")
        if int(self.sigma) != self.sigma or self.sigma < 1:
            raise ConfigError("sigma must be a positive integer")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.obs_stride < 1 or self.stride < 0:
            raise ConfigError("strides must be nonnegative (observables at least 1)")

    def mu(self, omega: float) -> float:
        return omega + abs(self.eps) / self.hbar**self.sigma

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GpeTrajectory:
    times: np.ndarray
    N: np.ndarray
    E: np.ndarray
    x_mean: np.ndarray
    populations: np.ndarray
    amplitudes: np.ndarray
    picnorm: np.ndarray
    xsnorm: np.ndarray
    tail: np.ndarray
    field_times: np.ndarray
    fields: np.ndarray
    dt: float
    mu: float
    meta: dict = field(default_factory=dict)

    def table(self) -> np.ndarray:
        """Columns t, N, E, x_mean, p_1..p_n, picnorm."""
        return np.column_stack([self.times, self.N, self.E, self.x_mean, self.populations, self.picnorm])


def energy(spectral: SpectralData, psi: np.ndarray, eps: float, sigma: int) -> float:
    h = spectral.grid.h
    lin = np.vdot(psi, spectral.apply_h0(psi)).real * h
    return float(lin + eps / (sigma + 1) * np.sum(np.abs(psi) ** (2 * sigma + 2)) * h)


def observables(
    spectral: SpectralData,
    basis: WellBasis | None,
    psi: np.ndarray,
    s: int = 1,
    eps: float = 0.0,
    sigma: int = 2,
    n: int | None = None,
) -> dict:
    """Norm, energy, mean position, well amplitudes and populations, ||Pi_c psi||_s.

    Populations are |<chi_j, psi>|^2 on the orthonormal well frame, so they
    sum to the weight of psi in span(phi_1..phi_n).
    """
    grid = spectral.grid
    h = grid.h
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (grid.N,):
        raise ConfigError("state does not live on the spectral grid")
    if n is None:
        n = basis.n if basis is not None else 2
    dens = np.abs(psi) ** 2
    N = float(np.sum(dens) * h)
    low = spectral.eigenvectors[:, :n] @ spectral.coefficients(psi)[:n]
    amps = basis.amplitudes(grid, psi) if basis is not None else np.empty(0, dtype=complex)
    return {
        "N": N,
        "E": energy(spectral, psi, eps, sigma),
        "x_mean": float(np.sum(grid.x * dens) * h),
        "populations": np.abs(amps) ** 2,
        "amplitudes": amps,
        "picnorm": xs_norm(spectral, psi - low, s, strict=False),
        "xsnorm": xs_norm(spectral, psi, s, strict=False),
    }


def gpe_integrate(
    spectral: SpectralData,
    config: GpeRunConfig,
    psi0: np.ndarray,
    basis: WellBasis | None = None,
) -> GpeTrajectory:
    """Strang splitting: nonlinear half step, exact linear step, nonlinear half step.

    With ``method="eigen"`` the linear flow is applied exactly to the first
    K stored eigenmodes; the orthogonal remainder is left unchanged and its
    norm is monitored. Both substeps are exactly norm preserving.
    ``method="fourier"`` uses the usual kinetic/potential split with FFTs.
    """
    grid = spectral.grid
    h, hbar, eps, sig = grid.h, config.hbar, config.eps, config.sigma
    if abs(spectral.hbar - hbar) > 1e-14 * hbar:
        raise ConfigError("config hbar differs from the spectral data")
    omega, _ = splitting(spectral, config.n)
    dt = config.dt if config.dt is not None else np.pi * hbar / omega / 2000.0
    nsteps = max(1, int(round(config.t_end / dt)))
    dt = config.t_end / nsteps
    psi = np.array(psi0, dtype=complex)
    norm0 = np.sqrt(np.sum(np.abs(psi) ** 2) * h)
    if abs(norm0 - 1.0) > 1e-8:
        raise ConfigError(f"initial state has norm {norm0:.12g}, expected 1")

    K = min(config.K, spectral.K)
    Phi = spectral.eigenvectors[:, :K]
    lin_phase = np.exp(-1j * spectral.eigenvalues[:K] * dt / hbar)

    def tail_of(f):
        return f - Phi @ (Phi.T @ f * h)

    def tail_norm(f):
        return float(np.sqrt(np.sum(np.abs(tail_of(f)) ** 2) * h))

    if config.method == "eigen":
        t0 = tail_norm(psi)
        if t0 > config.init_tail_tol:
            raise ResolutionError(f"initial state has tail {t0:.3g} beyond {K} modes; increase K")

        def linear(f):
            zeta = Phi.T @ f * h
            return f + Phi @ ((lin_phase - 1.0) * zeta)

    else:
        kin = np.exp(-1j * hbar * grid.k**2 * dt)
        pot_half = np.exp(-0.5j * spectral.V * dt / hbar)

        def linear(f):
            return pot_half * np.fft.ifft(kin * np.fft.fft(pot_half * f))

    def nonlinear(f, tau):
        if eps == 0.0:
            return f
        return f * np.exp(-1j * eps * np.abs(f) ** (2 * sig) * tau / hbar)

    rec = {k: [] for k in ("t", "N", "E", "x", "p", "a", "pic", "xs", "tail")}
    ftimes, fields = [], []

    def record(t, f):
        ob = observables(spectral, basis, f, config.s, eps, sig, config.n)
        rec["t"].append(t)
        rec["N"].append(ob["N"])
        rec["E"].append(ob["E"])
        rec["x"].append(ob["x_mean"])
        rec["p"].append(ob["populations"])
        rec["a"].append(ob["amplitudes"])
        rec["pic"].append(ob["picnorm"])
        rec["xs"].append(ob["xsnorm"])
        rec["tail"].append(tail_norm(f))

    record(0.0, psi)
    if config.stride:
        ftimes.append(0.0)
        fields.append(psi.copy())
    for k in range(1, nsteps + 1):
        psi = nonlinear(psi, 0.5 * dt)
        psi = linear(psi)
        psi = nonlinear(psi, 0.5 * dt)
        if not np.all(np.isfinite(psi)):
            raise NumericalError(f"non-finite field at step {k}")
        if k % config.obs_stride == 0 or k == nsteps:
            record(k * dt, psi)
            if config.method == "eigen" and rec["tail"][-1] > config.tail_tol:
                raise NumericalError(
                    f"tail beyond {K} modes reached {rec['tail'][-1]:.3g} at t = {k * dt:.6g}; increase K"
                )
        if config.stride and (k % config.stride == 0 or k == nsteps):
            ftimes.append(k * dt)
            fields.append(psi.copy())

    return GpeTrajectory(
        times=np.array(rec["t"]),
        N=np.array(rec["N"]),
        E=np.array(rec["E"]),
        x_mean=np.array(rec["x"]),
        populations=np.array(rec["p"]),
        amplitudes=np.array(rec["a"]),
        picnorm=np.array(rec["pic"]),
        xsnorm=np.array(rec["xs"]),
        tail=np.array(rec["tail"]),
        field_times=np.array(ftimes),
        fields=np.array(fields) if fields else np.empty((0, grid.N), dtype=complex),
        dt=dt,
        mu=config.mu(omega),
        meta={"omega": omega, "steps": nsteps, "K": K, "method": config.method},
    )
