"""YAML run configuration with strict keys and documented defaults.

Grammar (every key optional)::

    grid:       {L: 32pi, N: 16384}
    besov:      {s: 2.0, r: 2.0}
    evolution:  {dt: null, cfl: 0.25, T: null, dealias: 0.6667, stride: 10, form: nonlocal}
    initial:    {kind: random, seed: 0, max_freq: 1.5, norm: 1.0}
    experiment: {alpha_list: [...], n_list: [4, 5, 6, 7, 8], t_grid: null, T0: null,
                 cutoff: 0, alpha: 0.1, tolerance: 1e-3, samples: 8, gamma: null,
                 t_fractions: [0.125, 0.25, 0.5, 1.0]}
    output:     {dir: ., format: csv, jobs: null}

``L`` accepts numbers or strings such as ``32pi``, ``32*pi`` and ``pi``.
``r`` accepts ``inf``.
"""
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import yaml

from .errors import ConfigurationError
from .experiments import SimConfig
from .littlewood_paley import BesovParams
from .spectral import DEFAULT_DEALIAS, Grid

THEOREM_COMMANDS = {"theorem1", "theorem2", "decomposition", "expansion", "uniform-bound"}
_PI = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$")


def parse_length(value) -> float:
    if isinstance(value, bool):
        raise ConfigurationError(f"L must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI.match(value)
        if m:
            coef = m.group(1)
            try:
                return (float(coef) if coef else 1.0) * math.pi
            except ValueError:
                pass
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigurationError(f"cannot read L = {value!r}; use a number or a form like '32pi'")


def _float(value, name, allow_inf=False) -> float:
    if isinstance(value, str) and allow_inf and value.strip().lower() in {"inf", "infinity"}:
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{name} must be a number, got {value!r}")
    return float(value)


def _float_list(value, name):
    if not isinstance(value, (list, tuple)):
        raise ConfigurationError(f"{name} must be a list")
    return [_float(v, name) for v in value]


@dataclass(frozen=True)
class GridConfig:
    L: float = 32 * math.pi
    N: int = 16384


@dataclass(frozen=True)
class BesovConfig:
    s: float = 2.0
    r: float = 2.0


@dataclass(frozen=True)
class EvolutionConfig:
    dt: Optional[float] = None
    cfl: float = 0.25
    T: Optional[float] = None
    dealias: float = DEFAULT_DEALIAS
    stride: int = 10
    form: str = "nonlocal"


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "random"
    seed: int = 0
    max_freq: float = 1.5
    norm: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    alpha_list: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625)
    n_list: tuple = (4, 5, 6, 7, 8)
    t_grid: Optional[tuple] = None
    T0: Optional[float] = None
    t_fractions: tuple = (0.125, 0.25, 0.5, 1.0)
    cutoff: int = 0
    alpha: float = 0.1
    tolerance: float = 1e-3
    samples: int = 8
    gamma: Optional[float] = None


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "."
    format: str = "csv"
    jobs: Optional[int] = None


@dataclass(frozen=True)
class Config:
    grid: GridConfig = field(default_factory=GridConfig)
    besov: BesovConfig = field(default_factory=BesovConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def jobs(self) -> int:
        return self.output.jobs or os.cpu_count() or 1

    @property
    def params(self) -> BesovParams:
        return BesovParams(self.besov.s, self.besov.r)

    def sim_config(self) -> SimConfig:
        ev = self.evolution
        return SimConfig(L=self.grid.L, N=self.grid.N, dealias=ev.dealias, dt=ev.dt, cfl=ev.cfl, T=ev.T,
                         stride=ev.stride, form=ev.form, jobs=self.jobs)

    def echo(self) -> dict:
        out = asdict(self)
        # where reports land does not affect their content
        del out["output"]["dir"]
        out["besov"]["r"] = "inf" if math.isinf(self.besov.r) else self.besov.r
        return out

    def validate_for(self, command: str) -> "Config":
        """Checks that depend on the experiment being run."""
        if command in THEOREM_COMMANDS:
            if self.besov.s <= 1.5:
                raise ConfigurationError(
                    f"s = {self.besov.s:g} is not allowed for {command}: the convergence "
                    f"statements require s > 3/2")
            if math.isinf(self.besov.r):
                raise ConfigurationError(f"{command} requires a finite r (1 <= r < inf)")
        return self


_SECTIONS = {f.name: f.type for f in fields(Config)}
_SECTION_TYPES = {"grid": GridConfig, "besov": BesovConfig, "evolution": EvolutionConfig,
                  "initial": InitialConfig, "experiment": ExperimentConfig, "output": OutputConfig}


def _coerce(section: str, key: str, value):
    name = f"{section}.{key}"
    if value is None:
        default = getattr(_SECTION_TYPES[section](), key)
        if default is not None:
            raise ConfigurationError(f"{name} cannot be null")
        return None
    if (section, key) == ("grid", "L"):
        return parse_length(value)
    if key in {"N", "stride", "seed", "cutoff", "samples", "jobs"}:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        return value
    if key in {"alpha_list", "t_grid", "t_fractions"}:
        return tuple(_float_list(value, name))
    if key == "n_list":
        if not isinstance(value, (list, tuple)) or not all(isinstance(v, int) and not isinstance(v, bool)
                                                           for v in value):
            raise ConfigurationError(f"{name} must be a list of integers")
        return tuple(value)
    if key in {"kind", "form", "format", "dir"}:
        if not isinstance(value, str):
            raise ConfigurationError(f"{name} must be a string")
        return value
    return _float(value, name, allow_inf=(key == "r"))


def _validate(cfg: Config) -> Config:
    try:
        Grid(cfg.grid.L, cfg.grid.N)
        BesovParams(cfg.besov.s, cfg.besov.r)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    ev = cfg.evolution
    if not 0 < ev.dealias <= 1:
        raise ConfigurationError("evolution.dealias must lie in (0, 1]")
    if ev.form not in {"nonlocal", "transport"}:
        raise ConfigurationError("evolution.form must be 'nonlocal' or 'transport'")
    for name, v in (("dt", ev.dt), ("T", ev.T), ("cfl", ev.cfl)):
        if v is not None and v <= 0:
            raise ConfigurationError(f"evolution.{name} must be positive")
    if ev.stride < 1:
        raise ConfigurationError("evolution.stride must be >= 1")
    if cfg.initial.kind not in {"random", "zero"}:
        raise ConfigurationError("initial.kind must be 'random' or 'zero'")
    if cfg.output.format not in {"csv", "json"}:
        raise ConfigurationError("output.format must be 'csv' or 'json'")
    if cfg.output.jobs is not None and cfg.output.jobs < 1:
        raise ConfigurationError("output.jobs must be >= 1")
    return cfg


def from_mapping(data: dict) -> Config:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError("top level of the config must be a mapping")
    sections = {}
    for name, body in data.items():
        if name not in _SECTIONS:
            raise ConfigurationError(f"unknown section {name!r}; known: {sorted(_SECTIONS)}")
        body = body or {}
        if not isinstance(body, dict):
            raise ConfigurationError(f"section {name!r} must be a mapping")
        cls = _SECTION_TYPES[name]
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in body.items():
            if key not in known:
                raise ConfigurationError(f"unknown key {name}.{key}; known: {sorted(known)}")
            values[key] = _coerce(name, key, value)
        sections[name] = cls(**values)
    return _validate(Config(**sections))


def parse_config(text: str) -> Config:
    """Parse and validate a YAML config; empty text gives all defaults."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigurationError(f"config syntax error at {where}{problem}") from exc
    return from_mapping(data)


def load_config(path) -> Config:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text)


def with_overrides(cfg: Config, **overrides) -> Config:
    """Apply command-line overrides (``None`` means not given)."""
    ex, bs, ev, init, out = cfg.experiment, cfg.besov, cfg.evolution, cfg.initial, cfg.output
    if overrides.get("alpha_list") is not None:
        ex = replace(ex, alpha_list=tuple(overrides["alpha_list"]))
    if overrides.get("n_list") is not None:
        ex = replace(ex, n_list=tuple(overrides["n_list"]))
    if overrides.get("s") is not None:
        bs = replace(bs, s=float(overrides["s"]))
    if overrides.get("r") is not None:
        bs = replace(bs, r=float(overrides["r"]))
    if overrides.get("T") is not None:
        ev = replace(ev, T=float(overrides["T"]))
    if overrides.get("seed") is not None:
        init = replace(init, seed=int(overrides["seed"]))
    if overrides.get("jobs") is not None:
        out = replace(out, jobs=int(overrides["jobs"]))
    if overrides.get("format") is not None:
        out = replace(out, format=overrides["format"])
    if overrides.get("out") is not None:
        out = replace(out, dir=str(overrides["out"]))
    return _validate(replace(cfg, experiment=ex, besov=bs, evolution=ev, initial=init, output=out))
