"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import sparse

from .basis import SpectralBasis
from .system import SystemSpec


class TrilinearTensor:
    """Sparse entries B_ijk = <B(e_i, e_j), e_k> of the convection form.

    Entries are kept sorted by max(i, j, k) so that the restriction to level n is a prefix.
    """

    def __init__(self, i, j, k, values, size: int):
        i, j, k = (np.asarray(a, dtype=np.int64) for a in (i, j, k))
        values = np.asarray(values, dtype=float)
        level = np.maximum(np.maximum(i, j), k)
        order = np.lexsort((k, j, i, level))
        self.i, self.j, self.k = i[order], j[order], k[order]
        self.values = values[order]
        self._level = level[order]
        self.size = int(size)
        for a in (self.i, self.j, self.k, self.values, self._level):
            a.flags.writeable = False

    @property
    def nnz(self) -> int:
        return self.values.size

    def truncated(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        stop = int(np.searchsorted(self._level, n, side='left'))
        return self.i[:stop], self.j[:stop], self.k[:stop], self.values[:stop]

    def contract(self, u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
        """Coordinate k of B_n(u, v) = sum_ij B_ijk u_i v_j for i, j, k < n."""
        i, j, k, vals = self.truncated(n)
        return np.bincount(k, weights=vals * u[i] * v[j], minlength=n)

    def dense(self, n: int | None = None) -> np.ndarray:
        n = self.size if n is None else n
        out = np.zeros((n, n, n))
        i, j, k, vals = self.truncated(n)
        np.add.at(out, (i, j, k), vals)
        return out

    def scaled(self, factor: float) -> 'TrilinearTensor':
        return TrilinearTensor(self.i, self.j, self.k, factor * self.values, self.size)

    def with_symmetric_defect(self, epsilon: float) -> 'TrilinearTensor':
        """Add epsilon on every (i, j, j) slot; breaks antisymmetry on purpose."""
        ii, jj = np.meshgrid(np.arange(self.size), np.arange(self.size), indexing='ij')
        ii, jj = ii.ravel(), jj.ravel()
        return TrilinearTensor(
            np.concatenate([self.i, ii]), np.concatenate([self.j, jj]),
            np.concatenate([self.k, jj]), np.concatenate([self.values, np.full(ii.size, epsilon)]),
            self.size,
        )

    def export_lines(self) -> list[str]:
        """Line records `i, j, k, value`."""
        return [f"{a}, {b}, {c}, {float(v)!r}" for a, b, c, v in zip(self.i, self.j, self.k, self.values, strict=True)]


@dataclass(frozen=True)
class OperatorConstants:
    """Empirical certificates of the B and R bounds."""
    c1: float
    c2: float
    c3: float
    lipschitz_ratio: float
    lipschitz_radius: float


@dataclass(frozen=True, eq=False)
class OperatorTriple:
    """(A, B, R) acting on coordinates: diagonal A, tensor B, sparse R."""
    basis: SpectralBasis
    spec: SystemSpec
    tensor: TrilinearTensor
    r_matrix: sparse.csr_array
    a_scale: float = 1.0
    b_scale: float = 1.0
    r_scale: float = 1.0
    constants: OperatorConstants | None = field(default=None)

    def eigenvalues(self, n: int) -> np.ndarray:
        return self.a_scale * self.basis.eigenvalues[:n]

    def apply_a(self, u: np.ndarray) -> np.ndarray:
        return self.eigenvalues(u.size) * u

    def bilinear(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.b_scale == 0.0:
            return np.zeros(u.size)
        out = self.tensor.contract(u, v, u.size)
        return out if self.b_scale == 1.0 else self.b_scale * out

    def coupling(self, u: np.ndarray) -> np.ndarray:
        if self.r_scale == 0.0 or self.r_matrix.nnz == 0:
            return np.zeros(u.size)
        return self.r_scale * (self.r_block(u.size) @ u)

    def r_block(self, n: int) -> np.ndarray:
        return self._r_dense[:n, :n]

    @cached_property
    def _r_dense(self) -> np.ndarray:
        return self.r_matrix.toarray()

    def scaled(self, a_scale: float = 1.0, b_scale: float = 1.0, r_scale: float = 1.0) -> 'OperatorTriple':
        """Triple with A, B, R multiplied by the given factors (0 switches a part off)."""
        return replace(self, a_scale=self.a_scale * a_scale, b_scale=self.b_scale * b_scale,
                       r_scale=self.r_scale * r_scale, constants=None)

    def with_tensor(self, tensor: TrilinearTensor) -> 'OperatorTriple':
        return replace(self, tensor=tensor, constants=None)

    def with_constants(self, constants: OperatorConstants) -> 'OperatorTriple':
        return replace(self, constants=constants)
