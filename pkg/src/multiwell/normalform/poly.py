"""Sparse polynomials in (zeta, conj(zeta)) with exact or floating coefficients.

A monomial zeta^K conj(zeta)^L is keyed by the pair of exponent tuples (K, L).
Exact polynomials carry Gaussian rationals from sympy's ``QQ_I`` domain;
floating ones carry Python complex numbers.

The Poisson bracket is

    {F, G} = i sum_k (dF/dconj(zeta_k) dG/dzeta_k - dF/dzeta_k dG/dconj(zeta_k)),

for which {H0, zeta^K conj(zeta)^L} = i (lambda . (K - L)) zeta^K conj(zeta)^L
with H0 = sum_k lambda_k |zeta_k|^2, and Hamilton's equations read
d zeta/dt = {zeta, H} = -i dH/dconj(zeta).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from sympy.polys.domains import QQ, QQ_I

from ..errors import ConfigError

I_EXACT = QQ_I(0, 1)
ZERO_EXACT = QQ_I(0, 0)


def _rational(x) -> object:
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, (int, np.integer)):
        return QQ(int(x))
    f = Fraction(float(x))
    return QQ(f.numerator, f.denominator)


def to_exact(c):
    """Convert a scalar to a Gaussian rational; floats are converted without rounding."""
    if type(c).__name__ == "GaussianRational":
        return c
    if isinstance(c, (complex, np.complexfloating)):
        return QQ_I(_rational(c.real), _rational(c.imag))
    return QQ_I(_rational(c), 0)


def to_complex(c) -> complex:
    if type(c).__name__ == "GaussianRational":
        return complex(float(c.x), float(c.y))
    return complex(c)


def conj(c):
    if type(c).__name__ == "GaussianRational":
        return QQ_I(c.x, -c.y)
    return complex(c).conjugate()


def multi_indices(M: int, degree: int):
    """All exponent tuples of length M with the given total degree."""
    for combo in itertools.combinations_with_replacement(range(M), degree):
        e = [0] * M
        for k in combo:
            e[k] += 1
        yield tuple(e)


def multinomial(e) -> int:
    out = math.factorial(sum(e))
    for k in e:
        out //= math.factorial(k)
    return out


class Poly:
    """Sparse polynomial; immutable by convention (operations return new objects).

    Attributes:
        M: number of complex variables.
        terms: mapping (K, L) -> coefficient, with no stored zeros.
        exact: whether coefficients are Gaussian rationals.
        truncated: set when a product or bracket dropped terms above a degree cap.
    """

    __slots__ = ("M", "terms", "exact", "truncated")

    def __init__(self, M: int, terms: dict | None = None, exact: bool = False, truncated: bool = False):
        self.M = int(M)
        self.exact = bool(exact)
        self.truncated = truncated
        conv = to_exact if exact else complex
        out = {}
        for (K, L), c in (terms or {}).items():
            K, L = tuple(int(k) for k in K), tuple(int(k) for k in L)
            if len(K) != self.M or len(L) != self.M:
                raise ConfigError(f"exponent length differs from M = {self.M}")
            c = conv(c)
            if c:
                out[(K, L)] = c
        self.terms = out

    @classmethod
    def _raw(cls, M, terms, exact, truncated=False):
        p = cls.__new__(cls)
        p.M, p.exact, p.truncated = M, exact, truncated
        p.terms = {k: v for k, v in terms.items() if v}
        return p

    @classmethod
    def zero(cls, M: int, exact: bool = False) -> "Poly":
        return cls._raw(M, {}, exact)

    @classmethod
    def monomial(cls, M: int, K, L, coeff=1, exact: bool = False) -> "Poly":
        return cls(M, {(tuple(K), tuple(L)): coeff}, exact)

    @classmethod
    def quadratic(cls, diag, exact: bool = False) -> "Poly":
        """sum_k diag[k] |zeta_k|^2."""
        M = len(diag)
        terms = {}
        for k, d in enumerate(diag):
            e = tuple(int(i == k) for i in range(M))
            terms[(e, e)] = d
        return cls(M, terms, exact)

    def _coerce(self, c):
        return to_exact(c) if self.exact else complex(c)

    def _check(self, other: "Poly"):
        if other.M != self.M:
            raise ConfigError(f"variable counts differ: {self.M} vs {other.M}")
        if other.exact != self.exact:
            raise ConfigError("cannot mix exact and floating polynomials")

    # arithmetic

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return Poly._raw(self.M, out, self.exact, self.truncated or other.truncated)

    def __neg__(self) -> "Poly":
        return Poly._raw(self.M, {k: -v for k, v in self.terms.items()}, self.exact, self.truncated)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = self._coerce(c)
        return Poly._raw(self.M, {k: v * c for k, v in self.terms.items()}, self.exact, self.truncated)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        return self.multiply(other)

    __rmul__ = __mul__

    def multiply(self, other: "Poly", max_degree: int | None = None) -> "Poly":
        self._check(other)
        out = {}
        dropped = False
        for (Ka, La), ca in self.terms.items():
            da = sum(Ka) + sum(La)
            for (Kb, Lb), cb in other.terms.items():
                if max_degree is not None and da + sum(Kb) + sum(Lb) > max_degree:
                    dropped = True
                    continue
                key = (tuple(a + b for a, b in zip(Ka, Kb)), tuple(a + b for a, b in zip(La, Lb)))
                v = ca * cb
                out[key] = out[key] + v if key in out else v
        return Poly._raw(self.M, out, self.exact, dropped or self.truncated or other.truncated)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.M == other.M and self.terms == other.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        return f"Poly(M={self.M}, terms={len(self.terms)}, {kind})"

    # structure

    def conj(self) -> "Poly":
        return Poly._raw(self.M, {(L, K): conj(c) for (K, L), c in self.terms.items()}, self.exact)

    def is_real(self, tol: float = 0.0) -> bool:
        diff = self - self.conj()
        if self.exact or tol == 0.0:
            return not diff
        return diff.max_abs() <= tol

    def is_gauge_invariant(self) -> bool:
        return all(sum(K) == sum(L) for K, L in self.terms)

    def degree(self) -> int:
        return max((sum(K) + sum(L) for K, L in self.terms), default=0)

    def filter(self, pred) -> "Poly":
        return Poly._raw(self.M, {k: v for k, v in self.terms.items() if pred(*k)}, self.exact)

    def truncate(self, max_degree: int) -> "Poly":
        return self.filter(lambda K, L: sum(K) + sum(L) <= max_degree)

    def to_float(self) -> "Poly":
        if not self.exact:
            return self
        return Poly._raw(self.M, {k: to_complex(v) for k, v in self.terms.items()}, False, self.truncated)

    def to_exact(self) -> "Poly":
        if self.exact:
            return self
        return Poly._raw(self.M, {k: to_exact(v) for k, v in self.terms.items()}, True, self.truncated)

    def max_abs(self) -> float:
        return max((abs(to_complex(v)) for v in self.terms.values()), default=0.0)

    def chop(self, tol: float) -> "Poly":
        """Drop floating coefficients with modulus at most ``tol``."""
        if self.exact:
            return self
        return Poly._raw(self.M, {k: v for k, v in self.terms.items() if abs(v) > tol}, False, self.truncated)

    def embed(self, M: int, modes) -> "Poly":
        """Relabel variable k as ``modes[k]`` in a space of M variables."""
        out = {}
        for (K, L), c in self.terms.items():
            K2, L2 = [0] * M, [0] * M
            for k, m in enumerate(modes):
                K2[m], L2[m] = K[k], L[k]
            out[(tuple(K2), tuple(L2))] = c
        return Poly._raw(M, out, self.exact)

    # numerics

    def compile(self) -> "CompiledPoly":
        return CompiledPoly(self)

    def evaluate(self, zeta) -> complex:
        return self.compile().value(zeta)

    # serialization

    def to_json(self, eps_order: int | None = None) -> list:
        out = []
        for (K, L), c in sorted(self.terms.items()):
            z = to_complex(c)
            rec = {"K": list(K), "L": list(L), "re": z.real, "im": z.imag}
            if self.exact:
                rec["exact"] = [str(c.x), str(c.y)]
            if eps_order is not None:
                rec["eps_order"] = eps_order
            out.append(rec)
        return out

    @classmethod
    def from_json(cls, M: int, records: list, exact: bool = False) -> "Poly":
        terms = {}
        for r in records:
            if exact and "exact" in r:
                c = QQ_I(QQ(*Fraction(r["exact"][0]).as_integer_ratio()), QQ(*Fraction(r["exact"][1]).as_integer_ratio()))
            else:
                c = complex(r["re"], r["im"])
            terms[(tuple(r["K"]), tuple(r["L"]))] = c
        return cls(M, terms, exact)


class CompiledPoly:
    """Array form of a polynomial for fast evaluation and conjugate gradients."""

    def __init__(self, poly: Poly):
        self.M = poly.M
        keys = list(poly.terms)
        self.K = np.array([k[0] for k in keys], dtype=int).reshape(-1, poly.M)
        self.L = np.array([k[1] for k in keys], dtype=int).reshape(-1, poly.M)
        self.c = np.array([to_complex(poly.terms[k]) for k in keys], dtype=complex)
        self._grad = []
        for k in range(self.M):
            sel = self.L[:, k] > 0
            Lk = self.L[sel].copy()
            Lk[:, k] -= 1
            self._grad.append((self.c[sel] * self.L[sel, k], self.K[sel], Lk))

    def value(self, zeta) -> complex:
        z = np.asarray(zeta, dtype=complex)
        if not len(self.c):
            return 0j
        mon = np.prod(z**self.K * np.conj(z) ** self.L, axis=-1)
        return complex(np.sum(self.c * mon))

    def grad_conj(self, zeta) -> np.ndarray:
        """dP/dconj(zeta_k) for each k."""
        z = np.asarray(zeta, dtype=complex)
        zb = np.conj(z)
        out = np.zeros(self.M, dtype=complex)
        for k, (c, K, L) in enumerate(self._grad):
            if len(c):
                out[k] = np.sum(c * np.prod(z**K * zb**L, axis=-1))
        return out

    def vector_field(self, zeta) -> np.ndarray:
        """d zeta/dt = -i dP/dconj(zeta)."""
        return -1j * self.grad_conj(zeta)


def poisson_bracket(A: Poly, B: Poly, max_degree: int | None = None, truncate: bool = False) -> Poly:
    """{A, B} in sparse arithmetic.

    Terms whose degree would exceed ``max_degree`` raise ``ConfigError``
    unless ``truncate`` is set, in which case they are dropped and the
    result is flagged ``truncated``.
    """
    A._check(B)
    M = A.M
    unit = I_EXACT if A.exact else 1j
    out = {}
    dropped = False
    btab = [(Kb, Lb, cb, sum(Kb) + sum(Lb)) for (Kb, Lb), cb in B.terms.items()]
    for (Ka, La), ca in A.terms.items():
        da = sum(Ka) + sum(La)
        base_a = ca * unit
        for Kb, Lb, cb, db in btab:
            contrib = [(k, La[k] * Kb[k] - Ka[k] * Lb[k]) for k in range(M) if (La[k] and Kb[k]) or (Ka[k] and Lb[k])]
            contrib = [(k, w) for k, w in contrib if w]
            if not contrib:
                continue
            if max_degree is not None and da + db - 2 > max_degree:
                if not truncate:
                    raise ConfigError(f"bracket degree {da + db - 2} exceeds cap {max_degree}")
                dropped = True
                continue
            base = base_a * cb
            Ks = [a + b for a, b in zip(Ka, Kb)]
            Ls = [a + b for a, b in zip(La, Lb)]
            for k, w in contrib:
                Ks[k] -= 1
                Ls[k] -= 1
                key = (tuple(Ks), tuple(Ls))
                Ks[k] += 1
                Ls[k] += 1
                v = base * w
                out[key] = out[key] + v if key in out else v
    return Poly._raw(M, out, A.exact, dropped)


def number_operator(M: int, modes=None, weights=None, exact: bool = False) -> Poly:
    """sum_{k in modes} w_k |zeta_k|^2 (all modes with unit weights by default)."""
    modes = range(M) if modes is None else modes
    diag = [0] * M
    for i, k in enumerate(modes):
        diag[k] = 1 if weights is None else weights[i]
    return Poly.quadratic(diag, exact)


def gauge_monomials(M: int, max_degree: int, min_degree: int = 2):
    """All Gauge-invariant exponent pairs (|K| = |L|) with degree in [min_degree, max_degree]."""
    for half in range(max(1, (min_degree + 1) // 2), max_degree // 2 + 1):
        idx = list(multi_indices(M, half))
        for K in idx:
            for L in idx:
                yield K, L
