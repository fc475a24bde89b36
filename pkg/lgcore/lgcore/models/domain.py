"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import math
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class BoxDomain(BaseModel):
    """Periodic box [0, L_1) x ... x [0, L_d) with a uniform quadrature grid."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    d: int = 2
    sides: tuple[float, ...] | None = None
    resolution: tuple[int, ...] | int = 16

    @field_validator('d')
    @classmethod
    def _check_dimension(cls, v):
        if v not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {v}")
        return v

    @model_validator(mode='after')
    def _fill_defaults(self):
        sides = self.sides if self.sides is not None else (2.0 * math.pi,) * self.d
        resolution = self.resolution
        if isinstance(resolution, int):
            resolution = (resolution,) * self.d
        if len(sides) != self.d or len(resolution) != self.d:
            raise ValueError(f"sides and resolution need {self.d} entries")
        if any(s <= 0.0 for s in sides):
            raise ValueError("side lengths must be positive")
        for m in resolution:
            if m < 4 or m & (m - 1):
                raise ValueError(f"resolution must be a power of two >= 4, got {m}")
        # frozen model: bypass __setattr__ for normalized values
        object.__setattr__(self, 'sides', tuple(float(s) for s in sides))
        object.__setattr__(self, 'resolution', tuple(int(m) for m in resolution))
        return self

    @property
    def volume(self) -> float:
        return math.prod(self.sides)

    @property
    def cell_volume(self) -> float:
        return math.prod(s / m for s, m in zip(self.sides, self.resolution, strict=True))

    @property
    def point_count(self) -> int:
        return math.prod(self.resolution)

    def dealias_limits(self) -> tuple[int, ...]:
        """Largest integer wavenumber per axis whose triple products integrate exactly."""
        return tuple((m - 1) // 3 for m in self.resolution)

    @cached_property
    def points(self) -> np.ndarray:
        """Grid coordinates, shape (d, P) with P flattened grid points in C order."""
        axes = [np.arange(m) * (s / m) for s, m in zip(self.sides, self.resolution, strict=True)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.stack([g.ravel() for g in mesh])

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Rectangle rule over the last axis of flattened grid values."""
        return values.sum(axis=-1) * self.cell_volume


class LocalWindow(BaseModel):
    """Axis-aligned sub-box O_R of the periodic box."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    R: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @model_validator(mode='after')
    def _check_bounds(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper bounds differ in dimension")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper, strict=True)):
            raise ValueError("window bounds must satisfy lower < upper")
        return self

    @classmethod
    def nested(cls, domain: BoxDomain, count: int) -> list['LocalWindow']:
        """Centered sub-boxes with side fraction R/count; the last window is the whole box."""
        if count < 1:
            raise ValueError("need at least one window")
        windows = []
        for R in range(1, count + 1):
            fraction = R / count
            lower = tuple(0.5 * s * (1.0 - fraction) for s in domain.sides)
            upper = tuple(0.5 * s * (1.0 + fraction) for s in domain.sides)
            windows.append(cls(R=R, lower=lower, upper=upper))
        return windows

    def contains(self, other: 'LocalWindow') -> bool:
        return all(a <= b for a, b in zip(self.lower, other.lower, strict=True)) and \
            all(a >= b for a, b in zip(self.upper, other.upper, strict=True))

    def mask(self, domain: BoxDomain) -> np.ndarray:
        """Grid points x with lower <= x < upper."""
        pts = domain.points
        lo = np.asarray(self.lower)[:, None]
        hi = np.asarray(self.upper)[:, None]
        return np.all((pts >= lo - 1e-12) & (pts < hi - 1e-12), axis=0)

    def volume(self, domain: BoxDomain) -> float:
        """Quadrature volume of the window, i.e. the window snapped to grid cells."""
        return float(self.mask(domain).sum()) * domain.cell_volume
