"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import itertools
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..errors import AliasingError, ContractViolation
from ..models.basis import COS, SIN, SpectralBasis
from ..models.domain import BoxDomain, LocalWindow
from ..models.state import GalerkinState
from ..models.system import Block, SystemSpec

logger = logging.getLogger(__name__)


def minimal_sobolev_order(d: int) -> int:
    """Smallest integer m with m > d/2 + 1."""
    return math.floor(d / 2 + 1) + 1


def _half_space(n: tuple[int, ...]) -> bool:
    for c in n:
        if c != 0:
            return c > 0
    return False


def _polarizations(k: np.ndarray) -> list[np.ndarray]:
    """Unit vectors orthogonal to k: one in 2D, two in 3D."""
    if k.size == 2:
        p = np.array([-k[1], k[0]])
        return [p / np.linalg.norm(p)]
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(k)))] = 1.0
    p1 = np.cross(k, axis)
    p1 /= np.linalg.norm(p1)
    p2 = np.cross(k / np.linalg.norm(k), p1)
    return [p1, p2 / np.linalg.norm(p2)]


def build_basis(domain: BoxDomain, spec: SystemSpec, N: int, m: int | None = None) -> SpectralBasis:
    """Enumerate the N lowest divergence-free/scalar trigonometric eigenmodes of the system."""
    if N < 1:
        raise ContractViolation(f"basis size must be >= 1, got {N}")
    d = domain.d
    m = minimal_sobolev_order(d) if m is None else m
    if not m > d / 2 + 1:
        raise ContractViolation(f"sobolev order m={m} must exceed d/2+1={d / 2 + 1}")

    limits = domain.dealias_limits()
    scale = 2.0 * np.pi / np.asarray(domain.sides)
    # physical ball inscribed in the dealiased box keeps the eigenvalue ordering exact
    k_ball = min(K * s for K, s in zip(limits, scale, strict=True))
    layout = spec.layout(d)
    C = spec.component_count(d)
    volume = domain.volume

    candidates = []
    ranges = [range(-K, K + 1) for K in limits]
    for n in itertools.product(*ranges):
        if not _half_space(n):
            continue
        k = np.asarray(n) * scale
        k2 = float(k @ k)
        if k2 > k_ball ** 2 * (1.0 + 1e-12):
            continue
        for block in spec.blocks():
            sl = layout[block]
            weight = spec.block_weight(block)
            norm = math.sqrt(2.0 / (volume * weight))
            lam = spec.diffusivity(block) * k2
            directions = [np.ones(1)] if block == Block.TEMPERATURE else _polarizations(k)
            for pol, direction in enumerate(directions):
                amp = np.zeros(C)
                amp[sl] = norm * direction
                for trig in (COS, SIN):
                    sort_key = (round(lam, 12), n, block.order, trig, pol)
                    candidates.append((sort_key, n, block, trig, pol, amp, lam))

    if N > len(candidates):
        raise AliasingError(
            f"requested {N} modes but resolution {domain.resolution} dealiases only {len(candidates)}")
    candidates.sort(key=lambda c: c[0])
    chosen = candidates[:N]
    basis = SpectralBasis(
        domain=domain,
        spec=spec,
        sobolev_order=m,
        wavenumbers=np.array([c[1] for c in chosen]),
        blocks=[c[2] for c in chosen],
        trig=np.array([c[3] for c in chosen]),
        polarization=np.array([c[4] for c in chosen]),
        amplitudes=np.array([c[5] for c in chosen]),
        eigenvalues=np.array([c[6] for c in chosen]),
    )
    logger.info("Built %r (lambda_max=%g)", basis, basis.eigenvalues[-1])
    return basis


def project(basis: SpectralBasis, target, n: int) -> GalerkinState:
    """P_n of a state, a coordinate/functional vector, a grid field or a callable field.

    Coordinate i is the pairing of the target against e_i; beyond the target's level
    the coordinates are zero.
    """
    if not 0 <= n <= basis.size:
        raise ContractViolation(f"level {n} outside 0..{basis.size}")
    t = 0.0
    if isinstance(target, GalerkinState):
        if target.basis.key != basis.key:
            raise ContractViolation("state belongs to a different basis")
        pairing, t = target.coeffs, target.t
    elif callable(target):
        pairing = _pair_field(basis, np.asarray(target(basis.domain.points), dtype=float))
    else:
        array = np.asarray(target, dtype=float)
        pairing = array if array.ndim == 1 else _pair_field(basis, array)
    coeffs = np.zeros(n)
    k = min(n, pairing.size)
    coeffs[:k] = pairing[:k]
    return GalerkinState(basis, coeffs, t)


def _pair_field(basis: SpectralBasis, field: np.ndarray) -> np.ndarray:
    C = basis.component_weights.size
    field = field.reshape(C, -1)
    if field.shape[1] != basis.domain.point_count:
        raise ContractViolation(f"field has {field.shape[1]} grid points, expected {basis.domain.point_count}")
    return basis.inner_fields(basis.values, field[None, :, :])


def _require_pair(x: GalerkinState, y: GalerkinState) -> None:
    x.require_compatible(y)


def inner_h(x: GalerkinState, y: GalerkinState) -> float:
    _require_pair(x, y)
    return float(np.dot(x.coeffs, y.coeffs))


def inner_dirichlet(x: GalerkinState, y: GalerkinState) -> float:
    """((x, y)) = sum lambda_i x_i y_i."""
    _require_pair(x, y)
    lam = x.basis.eigenvalues[:x.n]
    return float(np.dot(lam * x.coeffs, y.coeffs))


def norm_v(x: GalerkinState) -> float:
    return math.sqrt(inner_h(x, x) + inner_dirichlet(x, x))


def dual_norm(x: GalerkinState, norm: str) -> float:
    """|x| in 'h', 'v_dual' (weights (1+lambda)^-1) or 'u_dual' (weights lambda^-m)."""
    w = x.basis.dual_weights(norm, x.n)
    return float(np.sqrt(np.dot(w * x.coeffs, x.coeffs)))


@dataclass(frozen=True)
class FieldPath:
    """Stacked fields sampled at increasing times, shape (M, C, P)."""
    times: np.ndarray
    fields: np.ndarray
    domain: BoxDomain
    component_weights: np.ndarray

    @classmethod
    def from_coefficients(cls, basis: SpectralBasis, times, coeffs) -> 'FieldPath':
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        return cls(np.asarray(times, dtype=float), basis.reconstruct(coeffs), basis.domain,
                   basis.component_weights)

    @classmethod
    def from_function(cls, domain: BoxDomain, times, func: Callable, weights=None) -> 'FieldPath':
        """Sample func(t, points) -> (C, P) at each time."""
        times = np.asarray(times, dtype=float)
        fields = np.stack([np.asarray(func(t, domain.points), dtype=float) for t in times])
        if fields.ndim == 2:
            fields = fields[:, None, :]
        weights = np.ones(fields.shape[1]) if weights is None else np.asarray(weights, dtype=float)
        return cls(times, fields, domain, weights)


def seminorm_local(path: FieldPath, window: LocalWindow, T: float | None = None) -> float:
    """(int_0^T int_{O_R} |u|^2 dx dt)^(1/2): rectangle rule in space, trapezoid in time."""
    times = np.asarray(path.times, dtype=float)
    if times.size == 0:
        raise ContractViolation("empty trajectory")
    T = float(times[-1]) if T is None else float(T)
    mask = window.mask(path.domain)
    density = (path.fields[..., mask] ** 2 * path.component_weights[None, :, None]).sum(axis=(1, 2))
    density *= path.domain.cell_volume
    if times.size == 1:
        return math.sqrt(float(density[0]) * T)
    keep = times <= T + 1e-12
    t, y = times[keep], density[keep]
    if t[-1] < T:
        # hold the last sample up to the horizon
        t = np.append(t, T)
        y = np.append(y, density[np.count_nonzero(keep) - 1])
    return math.sqrt(float(np.trapezoid(y, t)))
