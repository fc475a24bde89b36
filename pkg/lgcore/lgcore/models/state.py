"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from __future__ import annotations

from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from ..errors import ContractViolation

if TYPE_CHECKING:
    from .basis import SpectralBasis


class GalerkinState:
    """Coordinates of a state in H_n = span{e_1..e_n} at time t."""

    def __init__(self, basis: SpectralBasis, coeffs, t: float = 0.0):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.ndim != 1:
            raise ContractViolation(f"coefficients must be a vector, got shape {coeffs.shape}")
        if coeffs.size > basis.size:
            raise ContractViolation(f"level {coeffs.size} exceeds basis size {basis.size}")
        coeffs.flags.writeable = False
        self.basis = basis
        self.coeffs = coeffs
        self.t = float(t)

    @property
    def n(self) -> int:
        return self.coeffs.size

    @cached_property
    def norm_h(self) -> float:
        return float(np.sqrt(np.dot(self.coeffs, self.coeffs)))

    @cached_property
    def norm_v(self) -> float:
        lam = self.basis.eigenvalues[:self.n]
        return float(np.sqrt(np.dot(self.coeffs, self.coeffs) + np.dot(lam * self.coeffs, self.coeffs)))

    def require_compatible(self, other: GalerkinState) -> None:
        if self.basis.key != other.basis.key:
            raise ContractViolation("states belong to different bases")
        if self.n != other.n:
            raise ContractViolation(f"states live at different levels ({self.n} vs {other.n})")

    def with_coeffs(self, coeffs, t: float | None = None) -> GalerkinState:
        return GalerkinState(self.basis, coeffs, self.t if t is None else t)

    def __add__(self, other: GalerkinState) -> GalerkinState:
        self.require_compatible(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: GalerkinState) -> GalerkinState:
        self.require_compatible(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> GalerkinState:
        return self.with_coeffs(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"GalerkinState(n={self.n}, t={self.t!r}, |u|_H={self.norm_h!r})"
