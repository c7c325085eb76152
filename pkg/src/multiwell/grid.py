"""Uniform one-dimensional grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L) with N points and spacing h = 2L/N.

    The abscissas are ``x_i = -L + i*h`` for ``i = 0..N-1``, which is the
    natural periodic grid for Fourier methods and, with Dirichlet conditions
    outside the sampled range, for finite differences.
    """

    L: float = 8.0
    N: int = 1024
    x: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.L <= 0:
            raise ConfigError(f"grid half-width must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 256 or self.N % 2:
            raise ConfigError(f"grid size must be an even integer >= 256, got {self.N}")
        x = -self.L + self.h * np.arange(self.N)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """L2 inner product <f, g> = sum conj(f) g h."""
        return np.vdot(f, g) * self.h

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(f) ** 2) * self.h))

    def to_dict(self) -> dict:
        return {"L": float(self.L), "N": int(self.N)}
