"""Multi-well potential families, hypothesis checks and modified single-well potentials."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline

from .errors import ConfigError, ResolutionError
from .grid import Grid

FAMILIES = ("symmetric-double-well", "polynomial-n-well", "tabulated")


def _flat(u):
    """exp(-1/u) for u > 0, zero otherwise (C-infinity, all derivatives vanish at 0)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def smooth_step(u):
    """C-infinity step rising from 0 at u <= 0 to 1 at u >= 1."""
    a = _flat(u)
    b = _flat(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


@dataclass(frozen=True)
class PotentialSpec:
    """A trapping potential V with n nondegenerate minima V(x_j) = 1.

    Attributes:
        family: one of ``FAMILIES``.
        params: family parameters. ``(a, b)`` for the symmetric double well,
            ``(n, spacing, curvature, confinement)`` for the n-well family and
            unused for tabulated potentials.
        wells: well locations x_1 < ... < x_n.
        r: order up to which derivatives at the wells are required to agree.
        m: growth exponent, |V^(k)(x)| <= C_k <x>^(m - k).
        table: ``(x, V)`` samples for tabulated potentials.
    """

    family: str
    params: tuple = ()
    wells: tuple = ()
    r: int = 4
    m: float = 2.0
    table: tuple | None = field(default=None, repr=False)
    _fn: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown potential family {self.family!r}")
        wells = tuple(float(w) for w in self.wells)
        if len(wells) < 1 or any(b <= a for a, b in zip(wells, wells[1:])):
            raise ConfigError("wells must be a nonempty strictly increasing sequence")
        if self.r < 4:
            raise ConfigError(f"smoothness-match order r must be >= 4, got {self.r}")
        if self.m < 2:
            raise ConfigError(f"growth exponent m must be >= 2, got {self.m}")
        object.__setattr__(self, "wells", wells)
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "_fn", self._build())

    def _build(self):
        if self.family == "symmetric-double-well":
            a, b = self.params
            return lambda x: 1.0 + b * (x * x - a * a) ** 2
        if self.family == "polynomial-n-well":
            n, s, curv, conf = self.params
            amp = curv * s * s / (2.0 * np.pi**2)
            x1 = self.wells[0]
            edge = 0.5 * (n - 1) * s + 0.25 * s

            def v(x):
                t = np.maximum(np.abs(x) - edge, 0.0)
                S = smooth_step(t / s)
                core = amp * np.sin(np.pi * (x - x1) / s) ** 2
                return 1.0 + core * (1.0 - S) + conf * S * (1.0 + t * t)

            return v
        if self.table is None:
            raise ConfigError("tabulated potential requires a table")
        xs, vs = (np.asarray(c, dtype=float) for c in self.table)
        return CubicSpline(xs, vs)

    @property
    def n(self) -> int:
        return len(self.wells)

    @property
    def analytic(self) -> bool:
        return self.family != "tabulated"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._fn(x), dtype=float)

    def derivative(self, x, k: int, step: float = 0.05):
        """k-th derivative at x.

        Tabulated potentials use exact spline derivatives (zero beyond order 3).
        Analytic families use central differences with two Richardson levels;
        the returned error estimate is the change between the last two levels.
        """
        x = np.asarray(x, dtype=float)
        if k == 0:
            return self(x), np.zeros_like(x)
        if not self.analytic:
            return np.asarray(self._fn(x, k), dtype=float), np.zeros_like(x)
        d = [_central_difference(self, x, k, step / 2**i) for i in range(3)]
        r1 = [(4.0 * d[i + 1] - d[i]) / 3.0 for i in range(2)]
        r2 = (16.0 * r1[1] - r1[0]) / 15.0
        return r2, np.abs(r2 - r1[1])

    def to_dict(self) -> dict:
        out = {
            "family": self.family,
            "params": list(self.params),
            "wells": list(self.wells),
            "n": self.n,
            "r": int(self.r),
            "m": float(self.m),
        }
        if self.table is not None:
            out["table"] = {"x": list(self.table[0]), "V": list(self.table[1])}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        family = d.get("family")
        if family == "symmetric-double-well":
            a, b = d["params"]
            return make_double_well(a, b)
        if family == "polynomial-n-well":
            n, s, curv, conf = d["params"]
            return make_n_well(int(n), s, curvature=curv, confinement=conf)
        if family == "tabulated":
            t = d["table"]
            return make_tabulated(t["x"], t["V"], d["wells"], r=d.get("r", 4), m=d.get("m", 2.0))
        raise ConfigError(f"unknown potential family {family!r}")


def _central_difference(f, x, k, h):
    """Central k-th difference of f at x with step h (half steps for odd k)."""
    acc = np.zeros_like(x, dtype=float)
    for i in range(k + 1):
        acc += (-1) ** i * comb(k, i) * f(x + (0.5 * k - i) * h)
    return acc / h**k


def make_double_well(a: float, b: float) -> PotentialSpec:
    """V(x) = 1 + b (x^2 - a^2)^2 with minima at -a and a."""
    if a <= 0 or b <= 0:
        raise ConfigError(f"double well needs a > 0 and b > 0, got a={a}, b={b}")
    return PotentialSpec("symmetric-double-well", (a, b), (-a, a), r=4, m=4.0)


def make_n_well(
    n: int,
    spacing: float,
    curvature: float = 8.0,
    confinement: float | None = None,
    grid: Grid | None = None,
) -> PotentialSpec:
    """n identical wells on a periodic modulation, windowed into a quadratic trap.

    The wells sit at ``x_j = (j - (n+1)/2) * spacing``. Inside the window
    ``|x| <= (n-1)/2 * spacing + spacing/4`` the potential is exactly
    ``1 + A sin^2(pi (x - x_1)/spacing)`` with ``A`` chosen so that
    ``V''(x_j) = curvature``; outside, a smooth step blends it into
    ``1 + confinement * (1 + t^2)`` where ``t`` is the distance past the window.
    Every well therefore has identical Taylor coefficients to all orders.

    The result is checked with :func:`validate_hypothesis1` and rejected if
    any clause fails.
    """
    if int(n) != n or n < 2:
        raise ConfigError(f"n-well family needs integer n >= 2, got {n}")
    if spacing <= 0 or curvature <= 0:
        raise ConfigError("spacing and curvature must be positive")
    amp = curvature * spacing**2 / (2.0 * np.pi**2)
    if confinement is None:
        confinement = amp
    if confinement <= 0:
        raise ConfigError("confinement must be positive")
    wells = tuple((j - 0.5 * (n + 1)) * spacing for j in range(1, n + 1))
    spec = PotentialSpec("polynomial-n-well", (n, spacing, curvature, confinement), wells, r=4, m=2.0)
    if grid is None:
        half = abs(wells[0]) + 3.0 * spacing + 2.0
        grid = Grid(L=half, N=int(2 ** np.ceil(np.log2(half * 400))))
    report = validate_hypothesis1(spec, grid)
    if not report.passed:
        raise ConfigError(f"n-well parameters violate clause(s) {report.failed()}")
    return spec


def make_tabulated(x, v, wells, r: int = 4, m: float = 2.0) -> PotentialSpec:
    """Cubic-spline potential through samples (x, V)."""
    x = tuple(float(t) for t in np.asarray(x, dtype=float))
    v = tuple(float(t) for t in np.asarray(v, dtype=float))
    if len(x) != len(v) or len(x) < 4:
        raise ConfigError("table needs matching x and V with at least 4 samples")
    return PotentialSpec("tabulated", (), tuple(wells), r=r, m=m, table=(x, v))


@dataclass
class ClauseResult:
    passed: bool
    detail: str = ""
    worst_x: float | None = None


@dataclass
class ValidationReport:
    """Per-clause outcome with fitted constants.

    ``constants`` holds the fitted growth constant ``C`` (clause ii), the
    derivative constants ``C_k`` (clause iii) and the derivatives at the
    wells. ``clause_v_mode`` is ``"translation"`` when derivatives agree
    literally and ``"reflection"`` when they agree up to mirror symmetry.
    """

    clauses: dict
    constants: dict
    clause_v_mode: str | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    def failed(self) -> list:
        return [k for k, c in self.clauses.items() if not c.passed]


def validate_hypothesis1(
    spec: PotentialSpec, grid: Grid, tol: float = 1e-8, deriv_tol: float = 1e-6
) -> ValidationReport:
    """Evaluate the five hypothesis clauses on grid samples.

    Args:
        spec: potential to check.
        grid: sample grid; must contain every well with margin.
        tol: tolerance for V(x_j) = 1.
        deriv_tol: relative tolerance ``deriv_tol * max(1, |value|)`` for
            derivative comparisons.

    Raises:
        ConfigError: fewer than two wells, or wells outside the grid.
        ResolutionError: the grid is too coarse to resolve the derivatives.
    """
    if spec.n < 2:
        raise ConfigError(f"at least two wells are required, got n = {spec.n}")
    x = grid.x
    sep = min(np.diff(spec.wells))
    margin = 0.5 * sep
    if spec.wells[0] - margin < x[0] or spec.wells[-1] + margin > x[-1]:
        raise ConfigError("grid does not cover all wells with margin")
    if grid.h > 0.05 * sep:
        raise ResolutionError(f"grid spacing {grid.h:.3g} too coarse for well separation {sep:.3g}")
    step = min(max(16.0 * grid.h, 0.02), 0.025 * sep)
    wells = np.asarray(spec.wells)
    kmax = spec.r if spec.analytic else 3
    dw = {}
    for k in range(1, kmax + 1):
        val, err = spec.derivative(wells, k, step)
        scale = deriv_tol * np.maximum(1.0, np.abs(val))
        if np.any(err > scale):
            raise ResolutionError(f"order-{k} derivative unresolved at step {step:.3g}")
        dw[k] = val

    clauses = {}
    v = spec(x)
    vw = spec(wells)
    bad = np.flatnonzero(np.abs(vw - 1.0) > tol)
    if bad.size:
        j = bad[0]
        clauses["i"] = ClauseResult(False, f"V(x_{j + 1}) = {vw[j]:.12g} != 1", float(wells[j]))
    else:
        near = np.min(np.abs(x[:, None] - wells[None, :]), axis=1) < 0.5 * grid.h
        low = np.flatnonzero((v <= 1.0) & ~near)
        flat = np.flatnonzero(np.abs(dw[1]) > deriv_tol * max(1.0, np.max(np.abs(dw[2]))))
        if low.size:
            clauses["i"] = ClauseResult(False, "V <= 1 away from the wells", float(x[low[0]]))
        elif flat.size:
            j = flat[0]
            clauses["i"] = ClauseResult(False, f"V'(x_{j + 1}) != 0", float(wells[j]))
        else:
            clauses["i"] = ClauseResult(True)

    bracket = 1.0 + x * x
    ratio = bracket / v
    c_fit = float(np.max(ratio)) if np.all(v > 0) else np.inf
    clauses["ii"] = ClauseResult(
        bool(np.isfinite(c_fit) and c_fit < 1e6), f"C = {c_fit:.4g}", float(x[np.argmax(ratio)])
    )

    ck = []
    worst = None
    for k in range(1, kmax + 1):
        val, _ = spec.derivative(x, k, step)
        weight = np.sqrt(bracket) ** (spec.m - k)
        q = np.abs(val) / weight
        ck.append(float(np.max(q)))
        if not np.isfinite(ck[-1]):
            worst = float(x[np.argmax(q)])
    clauses["iii"] = ClauseResult(all(np.isfinite(ck)), f"C_k = {ck}", worst)

    d2 = dw[2]
    if np.any(d2 <= 0):
        j = int(np.argmin(d2))
        clauses["iv"] = ClauseResult(False, "degenerate or maximum at well", float(wells[j]))
    elif np.any(np.abs(d2 - d2[0]) > deriv_tol * max(1.0, abs(d2[0]))):
        j = int(np.argmax(np.abs(d2 - d2[0])))
        clauses["iv"] = ClauseResult(False, f"V''(x_{j + 1}) = {d2[j]:.10g} != {d2[0]:.10g}", float(wells[j]))
    else:
        clauses["iv"] = ClauseResult(True, f"V'' = {d2[0]:.10g}")

    mode, worst_v = _match_mode(dw, range(2, kmax + 1), deriv_tol)
    clauses["v"] = ClauseResult(
        mode is not None,
        f"derivatives 2..{kmax} agree ({mode})" if mode else "derivatives differ between wells",
        None if worst_v is None else float(wells[worst_v]),
    )
    constants = {"C": c_fit, "C_k": ck, "well_derivatives": {k: dw[k].tolist() for k in dw}}
    return ValidationReport(clauses, constants, mode)


def _match_mode(dw, orders, deriv_tol):
    """Return ('translation' | 'reflection' | None, index of a violating well)."""

    def close(a, b):
        return np.abs(a - b) <= deriv_tol * np.maximum(1.0, np.abs(b))

    if all(np.all(close(dw[k], dw[k][0])) for k in orders):
        return "translation", None
    # orientation of each well from the first odd derivative that is not zero
    orient = np.ones(len(dw[2]))
    for k in orders:
        if k % 2 and np.any(np.abs(dw[k]) > deriv_tol):
            ref = dw[k][0]
            orient = np.where(close(dw[k], -ref) & ~close(dw[k], ref), -1.0, 1.0)
            break
    for k in orders:
        target = dw[k][0] * orient**k
        ok = close(dw[k], target)
        if not np.all(ok):
            return None, int(np.flatnonzero(~ok)[0])
    return "reflection", None


def agmon_distance(spec: PotentialSpec, j: int) -> float:
    """Barrier integral of sqrt(max(V - 1, 0)) between wells j and j+1 (1-based)."""
    if not 1 <= j <= spec.n - 1:
        raise ConfigError(f"well index j must lie in 1..{spec.n - 1}, got {j}")
    a, b = spec.wells[j - 1], spec.wells[j]
    val, _ = integrate.quad(
        lambda t: np.sqrt(max(float(spec(t)) - 1.0, 0.0)), a, b, epsabs=0.0, epsrel=1e-11, limit=400
    )
    return float(val)


def barrier_maxima(spec: PotentialSpec) -> list:
    """(location, height) of the maximum of V between each pair of neighbouring wells."""
    out = []
    for a, b in zip(spec.wells, spec.wells[1:]):
        xs = np.linspace(a, b, 2001)
        i = int(np.argmax(spec(xs)))
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        res = optimize.minimize_scalar(
            lambda t: -float(spec(t)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
        )
        out.append((float(res.x), float(-res.fun)))
    return out


def default_threshold(spec: PotentialSpec) -> float:
    """Halfway up the lowest barrier."""
    return 1.0 + 0.5 * (min(h for _, h in barrier_maxima(spec)) - 1.0)


def well_component(spec: PotentialSpec, j: int, a_thr: float) -> tuple:
    """Interval U_j of the sublevel set {V < a_thr} containing x_j (1-based j)."""
    if a_thr <= 1.0:
        raise ConfigError(f"threshold must exceed the minimum value 1, got {a_thr}")
    if not 1 <= j <= spec.n:
        raise ConfigError(f"well index must lie in 1..{spec.n}, got {j}")
    bars = barrier_maxima(spec)
    for i, (_, h) in enumerate(bars):
        if h <= a_thr:
            raise ConfigError(
                f"threshold {a_thr} merges wells {i + 1} and {i + 2} (barrier top {h:.6g})"
            )
    f = lambda t: float(spec(t)) - a_thr
    xj = spec.wells[j - 1]
    if j > 1:
        left = optimize.brentq(f, bars[j - 2][0], xj, xtol=1e-13)
    else:
        lo = xj - 1.0
        while f(lo) < 0:
            lo = xj - 2.0 * (xj - lo)
        left = optimize.brentq(f, lo, xj, xtol=1e-13)
    if j < spec.n:
        right = optimize.brentq(f, xj, bars[j - 1][0], xtol=1e-13)
    else:
        hi = xj + 1.0
        while f(hi) < 0:
            hi = xj + 2.0 * (hi - xj)
        right = optimize.brentq(f, xj, hi, xtol=1e-13)
    return float(left), float(right)


def modified_potential(spec: PotentialSpec, j: int, a_thr: float, x) -> np.ndarray:
    """V_j sampled at x: V on U_j and max(a_thr, V) elsewhere."""
    left, right = well_component(spec, j, a_thr)
    x = np.asarray(x, dtype=float)
    v = spec(x)
    inside = (x > left) & (x < right)
    return np.where(inside, v, np.maximum(a_thr, v))
