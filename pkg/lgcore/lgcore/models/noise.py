"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..rng import SEED_RULE


def coercivity_lower_bound(gamma: float) -> float:
    """Open lower end of the admissible window (2 - 2/(3+gamma), 2] for a."""
    return 2.0 - 2.0 / (3.0 + gamma)


class CoercivityConstants(BaseModel):
    """(a, lambda, kappa) with 2<Au,u> - ||G(u)||^2_HS >= a||u||^2 - lambda|u|^2 - kappa."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    a: float
    lam: float = 0.0
    kappa: float = 0.0


class WienerDirection(BaseModel):
    """One Wiener direction: G_i(u) = (b . grad) u + c u + g, with constant b and c."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    c: float = 0.0
    b: tuple[float, ...] = ()
    additive: dict[int, float] = Field(default_factory=dict)

    @field_validator('additive')
    @classmethod
    def _nonnegative_indices(cls, v):
        if any(i < 0 for i in v):
            raise ValueError("additive mode indices must be nonnegative")
        return v


class WienerSpec(BaseModel):
    """Truncated cylindrical Wiener part with K directions."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    directions: list[WienerDirection] = Field(default_factory=list)
    coercivity: CoercivityConstants | None = None

    @property
    def K(self) -> int:
        return len(self.directions)


class JumpSpec(BaseModel):
    """Finite-activity Poisson random measure with marks y = m * (+-e_j) in R^q.

    The magnitude m is exponential with the given scale; direction +e_j has probability
    p_plus/q and -e_j has (1-p_plus)/q. Y0 = {|y| < y0_radius}. F(t,u;y) = sigma(y)(h0 + Gamma u)
    with sigma(y) = <w, y> and Gamma = contraction * identity.
    """

    model_config = ConfigDict(frozen=True, extra='forbid')

    rate: float = 0.0
    mark_scale: float = 1.0
    p_plus: float = 0.5
    mark_dim: int = 1
    weights: tuple[float, ...] | None = None
    y0_radius: float = 1.0
    h0: dict[int, float] = Field(default_factory=dict)
    contraction: float = 0.0
    gamma: float = 2.0

    @field_validator('rate')
    @classmethod
    def _rate(cls, v):
        if v < 0.0 or not math.isfinite(v):
            raise ValueError("jump rate must be finite and >= 0")
        return v

    @field_validator('mark_scale', 'y0_radius', 'gamma')
    @classmethod
    def _positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f"{info.field_name} must be > 0")
        return v

    @field_validator('p_plus')
    @classmethod
    def _probability(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError("p_plus must lie in [0, 1]")
        return v

    @model_validator(mode='after')
    def _check_weights(self):
        if self.mark_dim < 1:
            raise ValueError("mark_dim must be >= 1")
        if self.weights is not None and len(self.weights) != self.mark_dim:
            raise ValueError(f"weights need {self.mark_dim} entries")
        return self

    @property
    def sigma_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.mark_dim, 1.0 / math.sqrt(self.mark_dim))
        return np.asarray(self.weights, dtype=float)

    @property
    def rate_small(self) -> float:
        return self.rate * (1.0 - math.exp(-self.y0_radius / self.mark_scale))

    @property
    def rate_large(self) -> float:
        return self.rate * math.exp(-self.y0_radius / self.mark_scale)

    def moment_orders(self) -> list[float]:
        g = self.gamma
        return [1.0, 2.0, 2.0 + g, 4.0, 4.0 + 2.0 * g]


class NoiseModel(BaseModel):
    """Wiener part plus jump part; the two are driven by independent streams."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    wiener: WienerSpec = Field(default_factory=WienerSpec)
    jumps: JumpSpec = Field(default_factory=JumpSpec)

    @model_validator(mode='after')
    def _check_window(self):
        cert = self.wiener.coercivity
        if cert is not None:
            lower = coercivity_lower_bound(self.jumps.gamma)
            if not lower < cert.a <= 2.0:
                raise ValueError(
                    f"(G.2) coercivity a={cert.a!r} outside ({lower!r}, 2] for gamma={self.jumps.gamma!r}")
        return self

    @property
    def seed_rule(self) -> str:
        return SEED_RULE

    @property
    def is_silent(self) -> bool:
        wiener_off = all(d.c == 0.0 and not any(d.b) and not any(d.additive.values())
                         for d in self.wiener.directions)
        return wiener_off and self.jumps.rate == 0.0


SMALL = 'small'
LARGE = 'large'


@dataclass(frozen=True)
class JumpEvent:
    time: float
    mark: tuple[float, ...]
    region: str

    @property
    def magnitude(self) -> float:
        return math.sqrt(sum(y * y for y in self.mark))


@dataclass(frozen=True)
class MarkQuadrature:
    """Nodes and mu-weights (rate included) for integrals over the mark space."""
    marks: np.ndarray
    sigma: np.ndarray
    weights: np.ndarray
    small: np.ndarray

    def integrate(self, values: np.ndarray, region: str | None = None) -> np.ndarray:
        """Sum of weights * values over nodes (first axis), optionally restricted to a region."""
        w = self.weights
        if region == SMALL:
            w = np.where(self.small, w, 0.0)
        elif region == LARGE:
            w = np.where(self.small, 0.0, w)
        return np.tensordot(w, values, axes=([0], [0]))

    def sigma_moment(self, power: float, region: str | None = None, absolute: bool = False) -> float:
        base = np.abs(self.sigma) if absolute else self.sigma
        return float(self.integrate(base ** power, region))
