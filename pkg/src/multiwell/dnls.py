"""Discrete nonlinear Schrodinger model on n sites: coefficients, integration, phase portraits.

Time is the rescaled time tau = omega t / hbar in the frame rotating with
exp(i Omega t / hbar). The equations of motion are

    i dpsi_j/dtau = delta_j psi_j + Lambda_j psi_{j+1} + Lambda_{j-1} psi_{j-1}
                    + eta |psi_j|^(2 sigma) psi_j,

generated by the Hamiltonian ``k0_energy`` through dpsi_j/dtau = -i dK0/dconj(psi_j),
so the on-site term of K0 carries eta / (sigma + 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConfigError, NumericalError
from .spectral import SpectralData, WellBasis, splitting

OMEGA_FLOOR = 1e-11


@dataclass(frozen=True)
class DnlsModel:
    """Reduced-model coefficients.

    Attributes:
        sigma: nonlinearity power.
        delta: on-site detunings delta_j = nu_j / omega.
        hopping: length n + 1, ``hopping[j]`` couples sites j and j + 1
            (1-based); ``hopping[0] = hopping[n] = 0``.
        eta: nonlinear coefficient of the equations of motion.
        omega, Omega: half-spread and mean of the lowest n levels.
        eps: nonlinearity strength of the parent field equation.
        nu, c, c_hop: unscaled coefficients (c includes the 1/(sigma+1) factor).
        far_coupling: largest |H_ij| / omega with |i - j| > 1 dropped by the model.
    """

    sigma: int
    delta: np.ndarray
    hopping: np.ndarray
    eta: float
    omega: float = 1.0
    Omega: float = 0.0
    eps: float = 0.0
    nu: np.ndarray | None = None
    c: float = 0.0
    c_hop: np.ndarray | None = None
    far_coupling: float = 0.0
    frame: str = "scaled"

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        hop = np.asarray(self.hopping, dtype=float)
        if int(self.sigma) != self.sigma or self.sigma < 1:
            raise ConfigError(f"sigma must be a positive integer, got {self.sigma}")
        if hop.shape != (len(delta) + 1,):
            raise ConfigError("hopping must have length n + 1")
        if hop[0] != 0 or hop[-1] != 0:
            raise ConfigError("boundary hopping coefficients must vanish")
        for name, arr in (("delta", delta), ("hopping", hop)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_scaled(cls, delta, bonds, eta: float, sigma: int = 2) -> "DnlsModel":
        """Model from scaled coefficients; ``bonds[j-1]`` couples sites j and j + 1."""
        bonds = np.atleast_1d(np.asarray(bonds, dtype=float))
        hop = np.concatenate([[0.0], bonds, [0.0]])
        return cls(int(sigma), np.asarray(delta, dtype=float), hop, float(eta))

    @property
    def n(self) -> int:
        return len(self.delta)

    def linear_matrix(self) -> np.ndarray:
        bonds = self.hopping[1:-1]
        return np.diag(self.delta) + np.diag(bonds, 1) + np.diag(bonds, -1)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "sigma": int(self.sigma),
            "delta": self.delta.tolist(),
            "hopping": self.hopping.tolist(),
            "eta": float(self.eta),
            "omega": float(self.omega),
            "Omega": float(self.Omega),
            "eps": float(self.eps),
            "nu": None if self.nu is None else np.asarray(self.nu).tolist(),
            "c": float(self.c),
            "c_hop": None if self.c_hop is None else np.asarray(self.c_hop).tolist(),
            "far_coupling": float(self.far_coupling),
            "frame": self.frame,
        }


def extract_coefficients(
    spectral: SpectralData,
    basis: WellBasis,
    eps: float,
    sigma: int,
    frame: str = "lowdin",
) -> DnlsModel:
    """Reduced-model coefficients from the single-well basis.

    With ``frame="raw"`` the matrix elements are taken between the single-well
    ground states themselves. The default ``"lowdin"`` frame uses the
    orthonormal well-localized basis of span(phi_1..phi_n) stored in
    ``basis.frame``; the linear part of the reduced model is then exact.
    """
    n = basis.n
    omega, Omega = splitting(spectral, n)
    if omega < OMEGA_FLOOR * max(1.0, abs(Omega)):
        raise ConfigError(f"splitting omega = {omega:.3g} is below the noise floor; use a larger hbar")
    h = spectral.grid.h
    if frame == "lowdin":
        lam = spectral.eigenvalues[:n]
        Hm = basis.W.T @ np.diag(lam) @ basis.W
        states = basis.frame
    elif frame == "raw":
        states = basis.phi_hat
        Hm = states.T @ spectral.apply_h0(states) * h
        Hm = 0.5 * (Hm + Hm.T)
    else:
        raise ConfigError(f"unknown frame {frame!r}")
    nu = np.diag(Hm) - Omega
    c_hop = np.zeros(n + 1)
    c_hop[1:n] = np.diag(Hm, 1)
    far = np.abs(np.triu(Hm, 2)).max() / omega if n > 2 else 0.0
    moments = np.sum(np.abs(states) ** (2 * sigma + 2), axis=0) * h
    c = float(np.mean(moments)) / (sigma + 1)
    eta = (sigma + 1) * eps * c / omega
    return DnlsModel(
        int(sigma), nu / omega, c_hop / omega, eta, omega, Omega, float(eps), nu, c, c_hop, far, frame
    )


def k0_energy(model: DnlsModel, psi) -> np.ndarray:
    """Reduced Hamiltonian; works on the last axis of ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    a2 = np.abs(psi) ** 2
    bonds = model.hopping[1:-1]
    hop = 2.0 * np.sum(bonds * np.real(np.conj(psi[..., 1:]) * psi[..., :-1]), axis=-1)
    onsite = np.sum(model.delta * a2, axis=-1)
    nonlin = model.eta / (model.sigma + 1) * np.sum(a2 ** (model.sigma + 1), axis=-1)
    return onsite + nonlin + hop


def dnls_rhs(model: DnlsModel, psi) -> np.ndarray:
    """-i dK0/dconj(psi)."""
    psi = np.asarray(psi, dtype=complex)
    lin = psi @ model.linear_matrix().T
    return -1j * (lin + model.eta * np.abs(psi) ** (2 * model.sigma) * psi)


@dataclass
class DnlsTrajectory:
    """Recorded states with the invariant I and the energy K0."""

    times: np.ndarray
    states: np.ndarray
    I: np.ndarray
    K0: np.ndarray
    max_newton: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2


class MidpointStepper:
    """Batched implicit midpoint steps for the reduced model.

    The midpoint value m solves ``m = psi - i h A(m) m`` with h = dtau/2 and
    A(m) = linear part + eta diag(|m|^(2 sigma)); it is found by Newton's
    method on the real 2n-dimensional system. The step is then completed
    in Cayley form ``psi' = (1 + i h A(m))^-1 (1 - i h A(m)) psi``, which
    equals 2m - psi at convergence and is unitary for any real symmetric A,
    so the quadratic invariant is preserved to rounding.
    """

    def __init__(self, model: DnlsModel, dtau: float, tol: float = 1e-12, max_iter: int = 50):
        self.model = model
        self.h = 0.5 * dtau
        self.tol = tol
        self.max_iter = max_iter
        self.A = model.linear_matrix()
        self.eye = np.eye(model.n)
        self.iterations = 0

    def _A_of(self, m):
        mod = self.model
        return self.A + (mod.eta * np.abs(m) ** (2 * mod.sigma))[:, :, None] * self.eye

    def step(self, psi: np.ndarray, guess: np.ndarray) -> np.ndarray:
        mod, h, n = self.model, self.h, self.model.n
        eta, sig = mod.eta, mod.sigma
        eye2 = np.eye(2 * n)
        m = guess.copy()
        for it in range(1, self.max_iter + 1):
            a2 = np.abs(m) ** 2
            p = a2**sig
            G = m - psi + 1j * h * (m @ self.A.T + eta * p * m)
            I1 = h * (self.A + (eta * (sig + 1) * p)[:, :, None] * self.eye)
            q = h * eta * sig * a2 ** (sig - 1) * m * m
            R2 = -q.imag[:, :, None] * self.eye
            I2 = q.real[:, :, None] * self.eye
            J = np.empty((len(m), 2 * n, 2 * n))
            J[:, :n, :n] = R2
            J[:, :n, n:] = -I1 + I2
            J[:, n:, :n] = I1 + I2
            J[:, n:, n:] = -R2
            J += eye2
            rhs = -np.concatenate([G.real, G.imag], axis=1)
            d = np.linalg.solve(J, rhs[:, :, None])[:, :, 0]
            dm = d[:, :n] + 1j * d[:, n:]
            m = m + dm
            if np.max(np.abs(dm)) <= self.tol:
                break
        else:
            raise NumericalError(f"midpoint solver did not converge in {self.max_iter} iterations")
        self.iterations = max(self.iterations, it)
        A = self._A_of(m)
        lhs = self.eye + 1j * h * A
        rhs = psi - 1j * h * np.einsum("bij,bj->bi", A, psi)
        return np.linalg.solve(lhs, rhs[:, :, None])[:, :, 0], m


def _run(model, psi0, tau_end, dtau, stride=1, on_step=None, tol=1e-12, max_iter=50):
    """Integrate a batch (B, n); returns recorded times and states (T, B, n)."""
    if dtau <= 0:
        raise ConfigError("dtau must be positive")
    nsteps = max(1, int(round(abs(tau_end) / dtau)))
    step = tau_end / nsteps
    stepper = MidpointStepper(model, step, tol, max_iter)
    psi = np.array(psi0, dtype=complex)
    times, states = [0.0], [psi.copy()]
    # first guess: explicit half step
    guess = psi + 0.5 * step * dnls_rhs(model, psi)
    for k in range(1, nsteps + 1):
        new, m = stepper.step(psi, guess)
        guess = new + (new - m)
        psi = new
        if on_step is not None:
            on_step(psi)
        if k % stride == 0 or k == nsteps:
            times.append(k * step)
            states.append(psi.copy())
    return np.array(times), np.array(states), stepper.iterations


def dnls_integrate(
    model: DnlsModel,
    state0,
    tau_end: float,
    dtau: float,
    stride: int = 1,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> DnlsTrajectory:
    """Implicit-midpoint trajectory from ``state0`` to ``tau_end``.

    ``tau_end`` may be negative to integrate backwards. The step is
    adjusted so that an integer number of steps lands on ``tau_end``.
    """
    psi0 = np.asarray(state0, dtype=complex).reshape(1, -1)
    if psi0.shape[1] != model.n:
        raise ConfigError(f"state has {psi0.shape[1]} components, model has {model.n}")
    times, states, iters = _run(model, psi0, tau_end, dtau, stride, None, tol, max_iter)
    states = states[:, 0, :]
    inv = np.sum(np.abs(states) ** 2, axis=1)
    return DnlsTrajectory(times, states, inv, k0_energy(model, states), iters)


def sample_sphere(n: int, M: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """M points uniform on the unit sphere of C^n restricted to |psi_j| > rho."""
    if rho * np.sqrt(n) >= 1:
        raise ConfigError(f"rho sqrt(n) = {rho * np.sqrt(n):.3g} must be < 1")
    out = []
    while len(out) < M:
        z = rng.standard_normal((4 * M, n)) + 1j * rng.standard_normal((4 * M, n))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        out.extend(z[np.all(np.abs(z) > rho, axis=1)])
    return np.array(out[:M])


def action_drift_stats(
    model: DnlsModel,
    M: int,
    rho: float,
    horizon: float,
    seed: int = 0,
    dtau: float | None = None,
) -> dict:
    """Sup-in-time population drift for an ensemble drawn on the rho-restricted sphere.

    Returns per-trajectory drifts ``sup_tau max_j | |psi_j(tau)|^2 - |psi_j(0)|^2 |``
    together with their median, 90th percentile and the largest invariant error.
    """
    if dtau is None:
        dtau = min(0.02, 0.2 / max(1.0, abs(model.eta)))
    rng = np.random.default_rng(seed)
    psi0 = sample_sphere(model.n, M, rho, rng)
    p0 = np.abs(psi0) ** 2
    I0 = p0.sum(axis=1)
    drift = np.zeros(M)
    ierr = np.zeros(M)

    def track(psi):
        p = np.abs(psi) ** 2
        np.maximum(drift, np.max(np.abs(p - p0), axis=1), out=drift)
        np.maximum(ierr, np.abs(p.sum(axis=1) - I0), out=ierr)

    _run(model, psi0, horizon, dtau, stride=10**12, on_step=track)
    return {
        "drift": drift,
        "median": float(np.median(drift)),
        "p90": float(np.quantile(drift, 0.9)),
        "max_invariant_error": float(ierr.max()),
        "eta": float(model.eta),
        "dtau": float(dtau),
    }


def _dimer_energy(p, phase, eta, sigma, hop, d1, d2):
    return (
        2.0 * hop * np.sqrt(p * (1.0 - p)) * np.cos(phase)
        + eta / (sigma + 1) * (p ** (sigma + 1) + (1.0 - p) ** (sigma + 1))
        + d1 * p
        + d2 * (1.0 - p)
    )


def _dimer_slope(p, phase, eta, sigma, hop, d1, d2):
    return (
        hop * np.cos(phase) * (1.0 - 2.0 * p) / np.sqrt(p * (1.0 - p))
        + eta * (p**sigma - (1.0 - p) ** sigma)
        + d1
        - d2
    )


def double_well_analysis(
    eta: float, sigma: int = 2, hopping: float = 1.0, delta=(0.0, 0.0), resolution: int = 200000
) -> dict:
    """Equilibria of the two-site model on the sphere I = 1.

    With p = |psi_1|^2 and relative phase phi the energy is
    ``2 Lambda sqrt(p(1-p)) cos(phi) + eta/(sigma+1) (p^(sigma+1) + (1-p)^(sigma+1))``;
    equilibria have phi in {0, pi} and dE/dp = 0. Stability follows from the
    sign of E_pp * E_phiphi (positive means elliptic).

    Returns:
        dict with ``equilibria`` (list of dicts with p, phase, energy, stable,
        localized), ``count``, ``bifurcated`` (localized equilibria exist) and
        ``homoclinic_level`` (energy of the saddle, or None).
    """
    if sigma != 2:
        raise ConfigError("the phase-portrait analysis is specialized to sigma = 2")
    d1, d2 = delta
    args = (eta, sigma, hopping, d1, d2)
    p = np.linspace(0.0, 1.0, resolution + 1)[1:-1]
    eqs = []
    for phase in (0.0, np.pi):
        g = _dimer_slope(p, phase, *args)
        roots = list(p[g == 0.0])
        idx = np.flatnonzero(g[:-1] * g[1:] < 0)
        for i in idx:
            roots.append(optimize.brentq(_dimer_slope, p[i], p[i + 1], args=(phase, *args), xtol=1e-15))
        for r in sorted(roots):
            if eqs and eqs[-1]["phase"] == phase and abs(eqs[-1]["p"] - r) < 1e-9:
                continue
            hh = 1e-6 * min(r, 1.0 - r, 1e-2) / 1e-2
            epp = (_dimer_slope(r + hh, phase, *args) - _dimer_slope(r - hh, phase, *args)) / (2 * hh)
            eff = -2.0 * hopping * np.cos(phase) * np.sqrt(r * (1.0 - r))
            eqs.append(
                {
                    "p": float(r),
                    "phase": float(phase),
                    "energy": float(_dimer_energy(r, phase, *args)),
                    "stable": bool(epp * eff > 0),
                    "localized": bool(abs(r - 0.5) > 1e-6),
                }
            )
    saddles = [e for e in eqs if not e["stable"]]
    return {
        "eta": float(eta),
        "equilibria": eqs,
        "count": len(eqs),
        "bifurcated": any(e["localized"] for e in eqs),
        "homoclinic_level": saddles[0]["energy"] if saddles else None,
    }


def bifurcation_scan(etas, sigma: int = 2, hopping: float = 1.0) -> dict:
    """Equilibrium counts along ``etas`` and the first value where localized states exist."""
    counts, birth = [], None
    for e in etas:
        res = double_well_analysis(e, sigma, hopping)
        counts.append(res["count"])
        if birth is None and res["bifurcated"]:
            birth = float(e)
    return {"eta": [float(e) for e in etas], "count": counts, "birth": birth}


def classify_trajectory(
    model: DnlsModel,
    state0,
    horizon: float,
    dtau: float = 0.01,
    trap_threshold: float = 0.75,
    homoclinic_tol: float = 1e-3,
) -> dict:
    """Label a two-site trajectory as beating, self-trapped or near-homoclinic.

    The dominant initial site is followed so the label does not depend on
    the well numbering. Horizons shorter than one linear beat period pi/|Lambda|
    give ``"inconclusive"``.
    """
    if model.n != 2:
        raise ConfigError("trajectory classification needs a two-site model")
    psi0 = np.asarray(state0, dtype=complex)
    hop = model.hopping[1]
    e0 = float(k0_energy(model, psi0))
    level = None
    if model.sigma == 2 and hop != 0:
        level = double_well_analysis(model.eta, 2, hop, tuple(model.delta))["homoclinic_level"]
    out = {"K0": e0, "homoclinic_level": level}
    if level is not None and abs(e0 - level) < homoclinic_tol:
        return {**out, "status": "near-homoclinic"}
    if hop == 0 or horizon < np.pi / abs(hop):
        return {**out, "status": "inconclusive"}
    traj = dnls_integrate(model, psi0, horizon, dtau)
    k = int(np.argmax(np.abs(psi0)))
    pk = traj.populations[:, k] / traj.I
    above = pk > 0.5
    crossings = int(np.count_nonzero(above[1:] != above[:-1]))
    out.update(min_population=float(pk.min()), crossings=crossings)
    if pk.min() > trap_threshold:
        return {**out, "status": "self-trapped"}
    if crossings >= 2:
        return {**out, "status": "beating"}
    return {**out, "status": "inconclusive"}
