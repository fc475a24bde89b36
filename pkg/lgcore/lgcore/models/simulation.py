"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .noise import JumpEvent

if TYPE_CHECKING:
    from .basis import SpectralBasis


class ForcingStep(BaseModel):
    """Deterministic forcing coefficients held from time t until the next step."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    t: float = 0.0
    coefficients: dict[int, float] = Field(default_factory=dict)


INITIAL_PRESETS = ('low_modes', 'first_mode', 'zero')


class SimConfig(BaseModel):
    """Galerkin level, time grid, initial state, forcing, stopping threshold and cutoff."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    n: int
    dt: float = 1e-3
    horizon: float = 1.0
    initial: str | dict[int, float] = 'low_modes'
    forcing: list[ForcingStep] = Field(default_factory=list)
    r_stop: float = 100.0
    cutoff_level: float | None = None
    cutoff_enabled: bool = True
    semi_implicit: bool = False
    skip_compensation: bool = False
    seed: int = 0

    @field_validator('n')
    @classmethod
    def _level(cls, v):
        if v < 1:
            raise ValueError("Galerkin level n must be >= 1")
        return v

    @field_validator('dt', 'r_stop')
    @classmethod
    def _positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f"{info.field_name} must be > 0")
        return v

    @field_validator('initial')
    @classmethod
    def _preset(cls, v):
        if isinstance(v, str) and v not in INITIAL_PRESETS:
            raise ValueError(f"unknown initial preset {v!r}, expected one of {INITIAL_PRESETS}")
        return v

    @model_validator(mode='after')
    def _horizon(self):
        if self.horizon < self.dt:
            raise ValueError(f"horizon {self.horizon} shorter than dt {self.dt}")
        return self

    @property
    def level(self) -> float:
        return float(self.n) if self.cutoff_level is None else self.cutoff_level

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass
class NoiseSkeleton:
    """Brownian path and jump events on the fine grid united with the jump times.

    Any run whose step is an integer multiple of fine_dt can be driven by the same skeleton.
    """
    fine_dt: float
    horizon: float
    times: np.ndarray
    fine_index: np.ndarray
    W: np.ndarray
    events: dict[int, list[JumpEvent]] = field(default_factory=dict)

    def indices_for(self, dt: float) -> np.ndarray:
        """Skeleton points on the grid of step dt plus every jump time."""
        ratio = dt / self.fine_dt
        factor = int(round(ratio))
        if factor < 1 or abs(ratio - factor) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"dt={dt!r} is not a multiple of the skeleton step {self.fine_dt!r}")
        on_grid = (self.fine_index >= 0) & (self.fine_index % factor == 0)
        has_jump = np.zeros(self.times.size, dtype=bool)
        has_jump[list(self.events)] = True
        return np.nonzero(on_grid | has_jump)[0]

    def all_events(self) -> list[JumpEvent]:
        return [e for i in sorted(self.events) for e in self.events[i]]


class TrajectoryRecord:
    """Càdlàg path on a jump-adapted grid.

    states[a] is the right value at times[a]; left_states[a] differs from it only where
    jump_flags[a] is set. wiener_increments[a] is the increment over (times[a-1], times[a]].
    """

    def __init__(self, basis: SpectralBasis, config: SimConfig, times: np.ndarray, states: np.ndarray,
                 left_states: np.ndarray, jump_flags: np.ndarray, events: dict[int, list[JumpEvent]],
                 wiener_increments: np.ndarray, stopped: bool, tau: float, cutoff_activations: int = 0,
                 path_index: int = 0):
        self.basis = basis
        self.config = config
        self.times = times
        self.states = states
        self.left_states = left_states
        self.jump_flags = jump_flags
        self.events = events
        self.wiener_increments = wiener_increments
        self.stopped = stopped
        self.tau = tau
        self.cutoff_activations = cutoff_activations
        self.path_index = path_index

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def coefficients(self) -> np.ndarray:
        return self.states

    def norms_h(self) -> np.ndarray:
        return np.sqrt(np.einsum('ai,ai->a', self.states, self.states))

    def norms_v(self) -> np.ndarray:
        lam = self.basis.eigenvalues[:self.n]
        return np.sqrt(np.einsum('ai,ai->a', self.states, self.states)
                       + np.einsum('ai,i,ai->a', self.states, lam, self.states))

    def jump_events(self) -> list[JumpEvent]:
        return [e for a in sorted(self.events) for e in self.events[a]]

    def export_lines(self, include_coefficients: bool = False) -> list[str]:
        """Line records `t, |u|_H, ||u||_V, jump_flag[, coefficients...]`."""
        lines = []
        for a, (h, v) in enumerate(zip(self.norms_h(), self.norms_v(), strict=True)):
            parts = [repr(float(self.times[a])), repr(float(h)), repr(float(v)), str(int(self.jump_flags[a]))]
            if include_coefficients:
                parts.extend(repr(float(c)) for c in self.states[a])
            lines.append(', '.join(parts))
        return lines

    def __repr__(self) -> str:
        return (f"TrajectoryRecord(n={self.n}, points={self.times.size}, jumps={int(self.jump_flags.sum())}, "
                f"stopped={self.stopped}, tau={self.tau!r})")
