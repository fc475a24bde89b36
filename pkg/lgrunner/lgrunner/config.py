"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import hashlib
import json
import logging
import os
import types
import typing
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lgcore.errors import ConfigError
from lgcore.models.domain import BoxDomain
from lgcore.models.noise import JumpSpec, NoiseModel, WienerDirection, WienerSpec
from lgcore.models.simulation import ForcingStep, SimConfig
from lgcore.models.system import SystemSpec, SystemTag

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = 'LEVYLAB_OUTPUT_ROOT'
DEFAULT_OUTPUT_ROOT = 'runs'
FAULTS = ('skip_compensation', 'break_antisymmetry')


def shipped_wiener() -> WienerSpec:
    """Two gradient directions (coercivity a = 2 - 0.09 * Re) with a zero-order part and additive forcing.

    The additive parts and the jump offset reach into the second and third shells, so the
    convection term sees energy at every level of the default sweep.
    """
    return WienerSpec(directions=[
        WienerDirection(c=0.3, b=(0.3, 0.0), additive={0: 0.3, 5: 0.15}),
        WienerDirection(c=0.3, b=(0.0, 0.3), additive={1: 0.3, 9: 0.15}),
    ])


def shipped_jumps() -> JumpSpec:
    return JumpSpec(rate=20.0, mark_scale=1.0, p_plus=0.9, mark_dim=1, y0_radius=2.0,
                    h0={0: 0.6 / 2 ** 0.5, 1: 0.6 / 2 ** 0.5, 6: 0.15, 10: 0.15}, contraction=-0.2,
                    gamma=2.0)


class Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')


class DomainSection(Section):
    sides: tuple[float, ...] | None = None
    resolution: tuple[int, ...] | int = 16


class PhysicsSection(Section):
    re: float = 1.0
    rm: float = 1.0
    hartmann: float = 1.0
    kappa: float = 1.0
    buoyancy_axis: int | None = None


class SimulationSection(Section):
    dt: float = 1e-3
    horizon: float = 1.0
    initial: str | dict[int, float] = 'low_modes'
    forcing: list[ForcingStep] = Field(default_factory=list)
    r_stop: float = 100.0
    cutoff_level: float | None = None
    cutoff_enabled: bool = True
    semi_implicit: bool = False


class NoiseSection(NoiseModel):
    """Noise model whose omitted parts fall back to the shipped Wiener and jump defaults."""

    wiener: WienerSpec = Field(default_factory=shipped_wiener)
    jumps: JumpSpec = Field(default_factory=shipped_jumps)

    def model(self) -> NoiseModel:
        return NoiseModel(wiener=self.wiener, jumps=self.jumps)


class ChecksSection(Section):
    trials: int = 1000
    noise_probes: int = 200
    lipschitz_radius: float = 1.0
    isometry_samples: int = 2000
    independence_intervals: int = 2000
    symmetric_defect: float = 1e-3

    @field_validator('noise_probes')
    @classmethod
    def _probes(cls, v):
        if v < 100:
            raise ValueError("noise certificates need at least 100 probes")
        return v


class EnsembleSection(Section):
    paths: int = 200
    n_sweep: list[int] = Field(default_factory=lambda: [4, 8, 16])
    ratio_limit: float = 1.5
    growth_limit: float = 10.0
    martingale_level: float = 3.0
    ledger_paths: int = 8
    ledger_refinements: int = 2
    ledger_ratio_band: tuple[float, float] = (1.5, 2.5)

    @field_validator('paths')
    @classmethod
    def _paths(cls, v):
        if v < 50:
            raise ValueError("ensembles need at least 50 paths")
        return v


class DiagnosticsSection(Section):
    paths: int = 50
    deltas: list[float] = Field(default_factory=lambda: [0.01, 0.02, 0.05, 0.1, 0.2, 0.5])
    thetas: list[float] = Field(default_factory=lambda: [0.005, 0.01, 0.02, 0.05, 0.1])
    etas: list[float] = Field(default_factory=lambda: [0.001, 0.01, 0.1])
    alpha: float = 1.0
    fixed_times: list[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5])
    hit_levels: list[float] = Field(default_factory=lambda: [0.8, 1.2])
    windows: int = 3
    modulus_paths: int = 4
    continuity_scales: list[float] = Field(default_factory=lambda: [1e-1, 1e-2, 1e-3])


class OutputSection(Section):
    root: str | None = None
    export_paths: int = 4
    include_coefficients: bool = False


class RunConfig(Section):
    """Resolved configuration of one run; every field has a default."""

    system: SystemTag = SystemTag.NSE
    n: int = 8
    d: int = 2
    seed: int = 0
    basis_size: int | None = None
    sobolev_order: int | None = None
    domain: DomainSection = Field(default_factory=DomainSection)
    physics: PhysicsSection = Field(default_factory=PhysicsSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    noise: NoiseSection = Field(default_factory=NoiseSection)
    checks: ChecksSection = Field(default_factory=ChecksSection)
    ensemble: EnsembleSection = Field(default_factory=EnsembleSection)
    diagnostics: DiagnosticsSection = Field(default_factory=DiagnosticsSection)
    output: OutputSection = Field(default_factory=OutputSection)
    inject: list[str] = Field(default_factory=list)

    @field_validator('inject')
    @classmethod
    def _faults(cls, v):
        unknown = [f for f in v if f not in FAULTS]
        if unknown:
            raise ValueError(f"unknown fault {unknown[0]!r}, expected one of {FAULTS}")
        return sorted(set(v))

    @model_validator(mode='after')
    def _levels(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.basis_size is not None and self.basis_size < self.max_level:
            raise ValueError(f"basis_size {self.basis_size} below the largest level {self.max_level}")
        return self

    @property
    def max_level(self) -> int:
        return max([self.n, *self.ensemble.n_sweep])

    @property
    def resolved_basis_size(self) -> int:
        return self.basis_size if self.basis_size is not None else self.max_level

    def box(self) -> BoxDomain:
        return BoxDomain(d=self.d, sides=self.domain.sides, resolution=self.domain.resolution)

    def system_spec(self) -> SystemSpec:
        return SystemSpec(system=self.system, **self.physics.model_dump())

    def noise_model(self) -> NoiseModel:
        return self.noise.model()

    def sim_config(self, n: int | None = None) -> SimConfig:
        s = self.simulation
        return SimConfig(
            n=self.n if n is None else n, dt=s.dt, horizon=s.horizon, initial=s.initial, forcing=s.forcing,
            r_stop=s.r_stop, cutoff_level=s.cutoff_level, cutoff_enabled=s.cutoff_enabled,
            semi_implicit=s.semi_implicit, skip_compensation='skip_compensation' in self.inject, seed=self.seed,
        )

    def with_faults(self, faults: list[str]) -> 'RunConfig':
        return self.model_validate({**self.model_dump(mode='json'), 'inject': [*self.inject, *faults]})

    def output_root(self) -> Path:
        """LEVYLAB_OUTPUT_ROOT, else output.root, else runs/."""
        return Path(os.environ.get(OUTPUT_ROOT_ENV) or self.output.root or DEFAULT_OUTPUT_ROOT)


def digest(config: RunConfig) -> str:
    """sha256 of the canonical JSON of the resolved config; the output root does not enter it."""
    payload = config.model_dump(mode='json', exclude={'output': {'root'}})
    blob = json.dumps(payload, sort_keys=True, separators=(',', ':'), ensure_ascii=True).encode('utf-8')
    return hashlib.sha256(blob).hexdigest()


def _model_types(annotation) -> list[type[BaseModel]]:
    """BaseModel classes reachable through Optional/Union/list annotations."""
    if isinstance(annotation, type) and issubclass(annotation, BaseModel):
        return [annotation]
    origin = typing.get_origin(annotation)
    if origin in (typing.Union, types.UnionType, list):
        return [m for arg in typing.get_args(annotation) for m in _model_types(arg)]
    return []


def _prune(model: type[BaseModel], data, prefix: str = ''):
    """Drop keys the models do not know, warning once per dropped key."""
    if not isinstance(data, dict):
        return data
    out = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        field = model.model_fields.get(key)
        if field is None:
            logger.warning("Ignoring unknown config key: %s", dotted)
            continue
        nested = _model_types(field.annotation)
        if nested and isinstance(value, dict):
            value = _prune(nested[0], value, f"{dotted}.")
        elif nested and isinstance(value, list):
            value = [_prune(nested[0], v, f"{dotted}[{i}].") for i, v in enumerate(value)]
        out[key] = value
    return out


def _config_error(err: ValidationError) -> ConfigError:
    problems = err.errors()
    for problem in problems:
        logger.error("Config %s: %s", '.'.join(str(p) for p in problem['loc']) or '<root>', problem['msg'])
    first = problems[0]
    key = '.'.join(str(p) for p in first['loc']) or '<root>'
    constraint = 'unknown key' if first['type'] == 'extra_forbidden' else first['msg']
    return ConfigError(key, constraint)


def resolve_config(data: dict, strict: bool = False) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError('<root>', 'configuration must be a JSON object')
    if not strict:
        data = _prune(RunConfig, data)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as err:
        raise _config_error(err) from err


def load_config(path: str | Path, strict: bool = False) -> RunConfig:
    """Read and resolve a JSON run configuration."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(str(path), 'file not found')
    try:
        with open(path, encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as err:
        raise ConfigError(str(path), f"parse error: {err}") from err
    config = resolve_config(data, strict)
    logger.info("Loaded config %s (%s, n=%d)", path, config.system.value, config.n)
    return config
