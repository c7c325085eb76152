"""Experiment configuration: dataclass blocks loaded from versioned JSON."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PotentialConfig:
    family: str = "symmetric-double-well"
    a: float = 1.0
    b: float = 1.0
    n: int = 2
    spacing: float = 2.0
    curvature: float = 8.0
    confinement: float | None = None

    def __post_init__(self):
        if self.family not in ("symmetric-double-well", "polynomial-n-well"):
            raise ConfigError(f"unsupported potential family {self.family!r} in configs")
        if self.a <= 0 or self.b <= 0 or self.spacing <= 0 or self.curvature <= 0:
            raise ConfigError("potential parameters must be positive")

    def build(self):
        from .potential import make_double_well, make_n_well

        if self.family == "symmetric-double-well":
            return make_double_well(self.a, self.b)
        return make_n_well(self.n, self.spacing, self.curvature, self.confinement)


@dataclass(frozen=True)
class GridConfig:
    L: float = 6.0
    N: int = 1024

    def build(self):
        from .grid import Grid

        return Grid(self.L, self.N)


@dataclass(frozen=True)
class PhysicsConfig:
    """``eta`` (when set) fixes eps through the reduced-model coefficient."""

    hbar: float = 0.2
    eps: float = 0.0
    eta: float | None = None
    sigma: int = 2
    s: int = 1

    def __post_init__(self):
        if self.hbar <= 0:
            raise ConfigError("hbar must be positive")
        if self.sigma < 1 or self.s < 0:
            raise ConfigError("sigma must be >= 1 and s >= 0")


@dataclass(frozen=True)
class RunConfig:
    """Integration settings.

    ``beats`` gives the window in beat periods pi hbar / omega when
    ``t_end`` is unset. ``state`` is ``"well:j"`` (well-localized frame
    vector), ``"eigen:k"`` or ``"dnls:a1,a2,..."`` for explicit reduced amplitudes.
    """

    method: str = "eigen"
    spectral_method: str = "fd"
    K: int = 64
    dt: float | None = None
    t_end: float | None = None
    beats: float = 2.0
    obs_stride: int = 10
    stride: int = 0
    state: str = "well:1"
    dtau: float = 0.01
    tau_end: float = 100.0

    def __post_init__(self):
        if self.method not in ("eigen", "fourier") or self.spectral_method not in ("fd", "fourier"):
            raise ConfigError("unknown integration or eigensolver method")
        if self.K < 2 or self.beats <= 0 or self.dtau <= 0:
            raise ConfigError("K >= 2, beats > 0 and dtau > 0 are required")


@dataclass(frozen=True)
class NormalFormBlock:
    M: int = 6
    max_degree: int | None = None
    r_max: int | str = 2
    exact: bool = False
    mu_star: float = 2.0


@dataclass(frozen=True)
class ExperimentConfig:
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    run: RunConfig = field(default_factory=RunConfig)
    normal_form: NormalFormBlock = field(default_factory=NormalFormBlock)
    sweep: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0
    version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, path: str, value) -> "ExperimentConfig":
        """Copy with the dotted parameter ``path`` (e.g. ``physics.hbar``) set to ``value``."""
        block, _, key = path.partition(".")
        if not key:
            if block not in self.to_dict():
                raise ConfigError(f"unknown config key {path!r}")
            return from_dict({**self.to_dict(), block: value})
        d = self.to_dict()
        if block not in d or not isinstance(d[block], dict) or key not in d[block]:
            raise ConfigError(f"unknown sweep parameter {path!r}")
        d[block] = {**d[block], key: value}
        return from_dict(d)


_BLOCKS = {
    "potential": PotentialConfig,
    "grid": GridConfig,
    "physics": PhysicsConfig,
    "run": RunConfig,
    "normal_form": NormalFormBlock,
}


def _build(cls, data: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys for {cls.__name__}: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    data = dict(data)
    version = data.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config version {version}; expected {SCHEMA_VERSION}")
    for key, cls in _BLOCKS.items():
        if key in data:
            if not isinstance(data[key], dict):
                raise ConfigError(f"block {key!r} must be an object")
            data[key] = _build(cls, data[key])
    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict) or not all(isinstance(v, list) and v for v in sweep.values()):
        raise ConfigError("sweep must map parameter paths to nonempty lists")
    if not isinstance(data.get("seed", 0), int):
        raise ConfigError("seed must be an integer")
    return _build(ExperimentConfig, data)


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read a JSON config; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return from_dict(data)
