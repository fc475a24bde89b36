"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from functools import cached_property

import numpy as np

from .domain import BoxDomain
from .state import GalerkinState
from .system import Block, SystemSpec

COS = 0
SIN = 1


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class SpectralBasis:
    """H-orthonormal trigonometric eigenbasis of the block Stokes/Laplace operator.

    Mode i is amplitudes[i] * cos(k_i . x) or amplitudes[i] * sin(k_i . x), where the
    amplitude vector spans all stacked components and is nonzero only on its block.
    Instances are immutable and safe to share between workers.
    """

    def __init__(self, domain: BoxDomain, spec: SystemSpec, sobolev_order: int,
                 wavenumbers: np.ndarray, blocks: list[Block], trig: np.ndarray,
                 polarization: np.ndarray, amplitudes: np.ndarray, eigenvalues: np.ndarray):
        self.domain = domain
        self.spec = spec
        self.sobolev_order = int(sobolev_order)
        self.wavenumbers = _frozen(np.asarray(wavenumbers, dtype=int))
        self.blocks = tuple(blocks)
        self.trig = _frozen(np.asarray(trig, dtype=int))
        self.polarization = _frozen(np.asarray(polarization, dtype=int))
        self.amplitudes = _frozen(np.asarray(amplitudes, dtype=float))
        self.eigenvalues = _frozen(np.asarray(eigenvalues, dtype=float))
        layout = spec.layout(domain.d)
        weights = np.ones(spec.component_count(domain.d))
        for block, sl in layout.items():
            weights[sl] = spec.block_weight(block)
        self.component_weights = _frozen(weights)

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    @property
    def key(self) -> tuple:
        return (self.domain, self.spec, self.sobolev_order, self.size)

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """Physical wavevectors 2*pi*n/L, shape (N, d)."""
        scale = 2.0 * np.pi / np.asarray(self.domain.sides)
        return _frozen(self.wavenumbers * scale)

    @cached_property
    def values(self) -> np.ndarray:
        """Mode values on the grid, shape (N, C, P)."""
        phase = self.wavevectors @ self.domain.points
        trig = np.where(self.trig[:, None] == COS, np.cos(phase), np.sin(phase))
        return _frozen(self.amplitudes[:, :, None] * trig[:, None, :])

    @cached_property
    def gradients(self) -> np.ndarray:
        """Analytic gradients on the grid, shape (N, C, d, P); entry [i, c, a] is d_a of component c."""
        phase = self.wavevectors @ self.domain.points
        # d/dx cos = -k sin, d/dx sin = k cos
        dtrig = np.where(self.trig[:, None] == COS, -np.sin(phase), np.cos(phase))
        grads = (self.amplitudes[:, :, None, None] * self.wavevectors[:, None, :, None]
                 * dtrig[:, None, None, :])
        return _frozen(grads)

    def block_indices(self, block: Block, n: int | None = None) -> np.ndarray:
        n = self.size if n is None else n
        return np.array([i for i in range(n) if self.blocks[i] == block], dtype=int)

    def inner_fields(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """H inner product of stacked fields shaped (..., C, P) by quadrature."""
        weighted = (f * g) * self.component_weights[:, None]
        return self.domain.integrate(weighted).sum(axis=-1)

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        """Field of a coordinate vector (or a stack of them), shape (..., C, P)."""
        coeffs = np.asarray(coeffs, dtype=float)
        n = coeffs.shape[-1]
        return np.tensordot(coeffs, self.values[:n], axes=([-1], [0]))

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix <e_i, e_j>_H."""
        weighted = self.values * self.component_weights[None, :, None]
        flat = weighted.reshape(self.size, -1)
        return flat @ self.values.reshape(self.size, -1).T * self.domain.cell_volume

    def divergence(self) -> np.ndarray:
        """Max abs divergence per mode over vector blocks, zero for scalar modes."""
        layout = self.spec.layout(self.domain.d)
        out = np.zeros(self.size)
        for i, block in enumerate(self.blocks):
            if block == Block.TEMPERATURE:
                continue
            sl = layout[block]
            comps = range(sl.start, sl.stop)
            div = sum(self.gradients[i, c, a] for a, c in enumerate(comps))
            out[i] = np.max(np.abs(div))
        return out

    def u_norms(self) -> np.ndarray:
        """||e_i||_U realized as (1 + lambda_i)^(m/2); only ratios are meaningful."""
        return (1.0 + self.eigenvalues) ** (0.5 * self.sobolev_order)

    def dual_weights(self, norm: str, n: int) -> np.ndarray:
        """Coordinate weights of the squared dual norms: 'h', 'v_dual' or 'u_dual'."""
        lam = self.eigenvalues[:n]
        if norm == 'h':
            return np.ones(n)
        if norm == 'v_dual':
            return 1.0 / (1.0 + lam)
        if norm == 'u_dual':
            return lam ** (-float(self.sobolev_order))
        raise ValueError(f"unknown norm {norm!r}")

    def mode_state(self, index: int, n: int | None = None, t: float = 0.0) -> GalerkinState:
        """Basis vector e_index (0-based) as a state at level n."""
        n = self.size if n is None else n
        coeffs = np.zeros(n)
        if index < n:
            coeffs[index] = 1.0
        return GalerkinState(self, coeffs, t)

    def zero_state(self, n: int, t: float = 0.0) -> GalerkinState:
        return GalerkinState(self, np.zeros(n), t)

    def export_lines(self) -> list[str]:
        """Line records `index, block, wavevector, eigenvalue`."""
        lines = []
        for i in range(self.size):
            vec = ' '.join(str(int(k)) for k in self.wavenumbers[i])
            lines.append(f"{i}, {self.blocks[i].value}, ({vec}), {float(self.eigenvalues[i])!r}")
        return lines

    def __repr__(self) -> str:
        return (f"SpectralBasis(system={self.spec.system.value}, d={self.domain.d}, "
                f"N={self.size}, m={self.sobolev_order})")
