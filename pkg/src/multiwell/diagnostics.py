"""Cross-model comparisons, drift monitors, beating detection and scaling fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .dnls import DnlsModel, DnlsTrajectory, dnls_integrate, extract_coefficients, k0_energy
from .errors import ConfigError
from .gpe import GpeRunConfig, GpeTrajectory, gpe_integrate
from .spectral import SpectralData, WellBasis, xs_norm


@dataclass
class ComparisonReport:
    """GPE populations against DNLS populations on the GPE time stamps."""

    times: np.ndarray
    tau: np.ndarray
    gpe: np.ndarray
    dnls: np.ndarray
    sup: float
    l2: float
    omega: float
    Omega: float
    hbar: float

    def to_dict(self) -> dict:
        return {
            "sup": self.sup,
            "l2": self.l2,
            "omega": self.omega,
            "Omega": self.Omega,
            "hbar": self.hbar,
            "t_end": float(self.times[-1]),
        }

    def table(self) -> np.ndarray:
        return np.column_stack([self.times, self.tau, self.gpe, self.dnls])


def _interp_rows(x, xp, fp):
    return np.column_stack([np.interp(x, xp, fp[:, j]) for j in range(fp.shape[1])])


def compare_gpe_dnls(gpe_traj: GpeTrajectory, dnls_traj: DnlsTrajectory, model: DnlsModel, hbar: float) -> ComparisonReport:
    """Discrepancy sup_t max_j |p_j(t) - |psi_j(omega t / hbar)|^2|.

    DNLS populations are interpolated linearly onto tau = omega t / hbar,
    so the DNLS run should be recorded at least as finely as the GPE one.
    """
    tau = model.omega * gpe_traj.times / hbar
    if dnls_traj.times[-1] < tau[-1] * (1 - 1e-12):
        raise ConfigError(f"DNLS window {dnls_traj.times[-1]:.6g} is shorter than the GPE window {tau[-1]:.6g}")
    if gpe_traj.populations.shape[1] != model.n:
        raise ConfigError("population counts differ between the two runs")
    red = _interp_rows(tau, dnls_traj.times, dnls_traj.populations)
    diff = np.max(np.abs(gpe_traj.populations - red), axis=1)
    return ComparisonReport(
        gpe_traj.times,
        tau,
        gpe_traj.populations,
        red,
        float(diff.max()),
        float(np.sqrt(np.mean(diff**2))),
        model.omega,
        model.Omega,
        hbar,
    )


def paired_run(
    spectral: SpectralData,
    basis: WellBasis,
    eps: float,
    sigma: int,
    psi0: np.ndarray,
    t_end: float,
    dt: float | None = None,
    obs_stride: int = 10,
    dtau: float | None = None,
) -> tuple:
    """Run the field equation and the reduced model from the same state and compare.

    The reduced model starts from the well amplitudes of ``psi0``.

    Returns:
        (ComparisonReport, GpeTrajectory, DnlsTrajectory, DnlsModel).
    """
    model = extract_coefficients(spectral, basis, eps, sigma)
    cfg = GpeRunConfig(spectral.hbar, eps, sigma, t_end=t_end, dt=dt, n=basis.n, obs_stride=obs_stride)
    g = gpe_integrate(spectral, cfg, psi0, basis)
    tau_end = model.omega * t_end / spectral.hbar
    if dtau is None:
        dtau = model.omega * g.dt / spectral.hbar
    d = dnls_integrate(model, basis.amplitudes(spectral.grid, psi0), tau_end, dtau)
    return compare_gpe_dnls(g, d, model, spectral.hbar), g, d, model


@dataclass
class DriftReport:
    I_drift: float
    K0_drift: float
    mu: float
    scale: float
    C_I: float
    C_K0: float
    window: float
    budget: float
    I: np.ndarray = field(repr=False)
    K0: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            k: getattr(self, k)
            for k in ("I_drift", "K0_drift", "mu", "scale", "C_I", "C_K0", "window", "budget")
        }


def drift_report(
    gpe_traj: GpeTrajectory,
    model: DnlsModel,
    hbar: float,
    window: float | None = None,
    C: float = 1.0,
    delta: float | None = None,
) -> DriftReport:
    """Drift of I and K0 evaluated on the projected amplitudes of a field run.

    K0 is invariant under the global phase exp(i Omega t / hbar), so no
    Gauge conversion of the amplitudes is needed. ``budget`` is the time
    1/(C hbar mu delta) with delta the initial distance from the low
    eigenspace (``picnorm`` at t = 0) unless given.
    """
    t = gpe_traj.times
    sel = np.ones_like(t, dtype=bool) if window is None else t <= window
    a = gpe_traj.amplitudes[sel]
    inv = np.sum(np.abs(a) ** 2, axis=1)
    K0 = k0_energy(model, a)
    mu = gpe_traj.mu
    scale = mu / hbar**1.5
    dI = float(np.max(np.abs(inv - inv[0])))
    dK = float(np.max(np.abs(K0 - K0[0])))
    if delta is None:
        delta = max(float(gpe_traj.picnorm[0]), np.finfo(float).eps)
    return DriftReport(
        dI, dK, mu, scale, dI / scale, dK / scale, float(t[sel][-1]), 1.0 / (C * hbar * mu * delta), inv, K0
    )


def manifold_distance(
    psi: np.ndarray,
    spectral: SpectralData,
    n: int,
    s: int = 1,
    transform=None,
) -> dict:
    """||Pi_c psi||_s and, given a normal-form result, the distance to T(Phi_0).

    The distance is measured in the weighted norm sum_k lambda_k^s |.|^2 on
    the truncation's modes plus the part of psi beyond them, minimizing
    over u in C^n from the starting point u = Pi psi.
    """
    psi = np.asarray(psi, dtype=complex)
    zeta = spectral.coefficients(psi)
    low = spectral.eigenvectors[:, :n] @ zeta[:n]
    out = {"picnorm": xs_norm(spectral, psi - low, s, strict=False), "dM": None, "converged": None}
    if transform is None:
        return out
    M = transform.truncation.M
    w = spectral.eigenvalues[:M] ** s
    rest = psi - spectral.eigenvectors[:, :M] @ zeta[:M]
    tail2 = xs_norm(spectral, rest, s, strict=False) ** 2
    target = zeta[:M]

    def image(x):
        u = np.zeros(M, dtype=complex)
        u[:n] = x[:n] + 1j * x[n:]
        return transform.transformation(u)

    def cost(x):
        return float(np.sum(w * np.abs(target - image(x)) ** 2))

    x0 = np.concatenate([zeta[:n].real, zeta[:n].imag])
    res = optimize.minimize(cost, x0, method="BFGS", options={"gtol": 1e-12})
    out["dM"] = float(np.sqrt(res.fun + tail2))
    out["converged"] = bool(res.success or res.fun < 1e-24)
    if not out["converged"]:
        out["dM"] = None
    return out


def beating_detector(times, x, expected_period: float | None = None, noise: float = 1e-8) -> dict:
    """Period and amplitude of a sign-alternating series.

    Crossing times are found by linear interpolation between samples of
    opposite sign; the period is twice the mean spacing of crossings.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(t) != len(x) or len(t) < 3:
        raise ConfigError("need at least three samples of matching length")
    amp = float(np.max(np.abs(x)))
    if expected_period is not None and t[-1] - t[0] < 2 * expected_period:
        return {"status": "inconclusive", "is_beating": False, "period": None, "amplitude": amp, "crossings": []}
    # samples inside the noise band are skipped, crossings interpolate across them
    keep = np.flatnonzero(np.abs(x) > noise)
    tk, xk = t[keep], x[keep]
    idx = np.flatnonzero(np.sign(xk[:-1]) != np.sign(xk[1:]))
    cross = tk[idx] - xk[idx] * (tk[idx + 1] - tk[idx]) / (xk[idx + 1] - xk[idx])
    is_beating = len(cross) >= 2 and amp > noise
    period = float(2.0 * np.mean(np.diff(cross))) if len(cross) >= 2 else None
    return {
        "status": "beating" if is_beating else "not-beating",
        "is_beating": bool(is_beating),
        "period": period,
        "amplitude": amp,
        "crossings": cross.tolist(),
    }


def scaling_fit(x, y, semilog: bool = False) -> dict:
    """Least-squares line through (log x, log y), or (x, log y) when ``semilog``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3 or len(x) != len(y):
        raise ConfigError("need at least three matching points")
    if np.any(y <= 0) or (not semilog and np.any(x <= 0)):
        raise ConfigError("scaling fits need positive data")
    X = x if semilog else np.log(x)
    Y = np.log(y)
    A = np.column_stack([X, np.ones_like(X)])
    coef, res, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - Y) ** 2)))
    return {"slope": float(coef[0]), "intercept": float(coef[1]), "residual": resid}
