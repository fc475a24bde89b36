"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, field_validator


class SystemTag(str, Enum):
    """Shipped hydrodynamic systems."""
    NSE = "nse"
    MHD = "mhd"
    BOUSSINESQ = "boussinesq"


class Block(str, Enum):
    """Physical block a basis mode belongs to."""
    VELOCITY = "u"
    MAGNETIC = "b"
    TEMPERATURE = "theta"

    @property
    def order(self) -> int:
        return _BLOCK_ORDER[self]


_BLOCK_ORDER = {Block.VELOCITY: 0, Block.MAGNETIC: 1, Block.TEMPERATURE: 2}


class SystemSpec(BaseModel):
    """System tag plus the physical constants that enter A, B and R."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    system: SystemTag = SystemTag.NSE
    re: float = 1.0
    rm: float = 1.0
    hartmann: float = 1.0
    kappa: float = 1.0
    buoyancy_axis: int | None = None

    @field_validator('re', 'rm', 'hartmann', 'kappa')
    @classmethod
    def _positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f"{info.field_name} must be strictly positive, got {v}")
        return v

    def blocks(self) -> list[Block]:
        if self.system == SystemTag.MHD:
            return [Block.VELOCITY, Block.MAGNETIC]
        if self.system == SystemTag.BOUSSINESQ:
            return [Block.VELOCITY, Block.TEMPERATURE]
        return [Block.VELOCITY]

    def layout(self, d: int) -> dict[Block, slice]:
        """Component slices of each block in the stacked field."""
        slices = {}
        start = 0
        for block in self.blocks():
            width = 1 if block == Block.TEMPERATURE else d
            slices[block] = slice(start, start + width)
            start += width
        return slices

    def component_count(self, d: int) -> int:
        return sum(s.stop - s.start for s in self.layout(d).values())

    def block_weight(self, block: Block) -> float:
        """Weight of the block in the H inner product; the magnetic block carries s."""
        return self.hartmann if block == Block.MAGNETIC else 1.0

    def diffusivity(self, block: Block) -> float:
        if block == Block.VELOCITY:
            return 1.0 / self.re
        if block == Block.MAGNETIC:
            return 1.0 / self.rm
        return self.kappa

    def buoyancy(self, d: int) -> int:
        """Index of the canonical unit vector e_d the buoyancy acts along."""
        axis = self.buoyancy_axis if self.buoyancy_axis is not None else d - 1
        if not 0 <= axis < d:
            raise ValueError(f"buoyancy axis {axis} outside 0..{d - 1}")
        return axis
