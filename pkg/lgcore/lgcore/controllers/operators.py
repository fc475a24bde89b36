"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import sparse

from ..errors import AliasingError, ContractViolation
from ..models.basis import SpectralBasis
from ..models.operators import OperatorConstants, OperatorTriple, TrilinearTensor
from ..models.reports import AssumptionCertificate, Gate
from ..models.state import GalerkinState
from ..models.system import Block, SystemSpec, SystemTag
from ..rng import StreamRole, stream

logger = logging.getLogger(__name__)

PRUNE_RELATIVE = 1e-12


def _convection_terms(spec: SystemSpec) -> list[tuple[float, Block, Block, Block]]:
    """(coef, X, Y, Z) so that <B(phi, psi), xi> = sum coef * b(phi^X, psi^Y, xi^Z)."""
    u, mag, theta = Block.VELOCITY, Block.MAGNETIC, Block.TEMPERATURE
    if spec.system == SystemTag.MHD:
        s = spec.hartmann
        return [(1.0, u, u, u), (-s, mag, mag, u), (s, u, mag, mag), (-s, mag, u, mag)]
    if spec.system == SystemTag.BOUSSINESQ:
        return [(1.0, u, u, u), (1.0, u, theta, theta)]
    return [(1.0, u, u, u)]


def _require_dealiased(basis: SpectralBasis) -> None:
    limits = np.asarray(basis.domain.dealias_limits())
    if np.any(np.abs(basis.wavenumbers) > limits):
        raise AliasingError(
            f"resolution {basis.domain.resolution} cannot integrate triple products of these modes exactly")


def assemble_tensor(basis: SpectralBasis, spec: SystemSpec) -> TrilinearTensor:
    """Quadrature of the system's trilinear form on every mode triple."""
    if basis.spec.system != spec.system:
        raise ContractViolation(f"basis built for {basis.spec.system.value}, not {spec.system.value}")
    _require_dealiased(basis)
    N = basis.size
    layout = spec.layout(basis.domain.d)
    values = basis.values
    grads = basis.gradients
    dense = np.zeros((N, N, N))
    for coef, X, Y, Z in _convection_terms(spec):
        advecting = values[:, layout[X], :]
        grad_y = grads[:, layout[Y], :, :]
        target = values[:, layout[Z], :].reshape(N, -1)
        for i in range(N):
            # (e_i^X . grad) e_j^Y for all j, shape (N, cY, P)
            conv = np.einsum('ap,jcap->jcp', advecting[i], grad_y)
            dense[i] += coef * (conv.reshape(N, -1) @ target.T)
    dense *= basis.domain.cell_volume
    scale = np.max(np.abs(dense)) if dense.size else 0.0
    keep = np.abs(dense) > PRUNE_RELATIVE * max(scale, 1.0)
    i, j, k = np.nonzero(keep)
    tensor = TrilinearTensor(i, j, k, dense[keep], N)
    logger.info("Assembled %s tensor: N=%d, nnz=%d", spec.system.value, N, tensor.nnz)
    return tensor


def assemble_coupling(basis: SpectralBasis, spec: SystemSpec) -> sparse.csr_array:
    """Matrix of <R e_l, e_k>_H with R(phi) = (-theta e_d, -u_d); zero for NSE and MHD."""
    N = basis.size
    if spec.system != SystemTag.BOUSSINESQ:
        return sparse.csr_array((N, N))
    layout = spec.layout(basis.domain.d)
    c_u = layout[Block.VELOCITY].start + spec.buoyancy(basis.domain.d)
    c_t = layout[Block.TEMPERATURE].start
    vals = basis.values
    cross = vals[:, c_u, :] @ vals[:, c_t, :].T * basis.domain.cell_volume
    matrix = -(cross + cross.T)
    matrix[np.abs(matrix) < PRUNE_RELATIVE] = 0.0
    return sparse.csr_array(matrix)


def build_triple(basis: SpectralBasis, spec: SystemSpec | None = None) -> OperatorTriple:
    spec = basis.spec if spec is None else spec
    return OperatorTriple(basis=basis, spec=spec, tensor=assemble_tensor(basis, spec),
                          r_matrix=assemble_coupling(basis, spec))


def triad_violations(tensor: TrilinearTensor, basis: SpectralBasis) -> int:
    """Stored entries whose wavevectors admit no signed sum k_i +- k_j +- k_k = 0."""
    n = basis.wavenumbers
    a, b, c = n[tensor.i], n[tensor.j], n[tensor.k]
    ok = np.zeros(tensor.nnz, dtype=bool)
    for sj in (1, -1):
        for sk in (1, -1):
            ok |= np.all(a + sj * b + sk * c == 0, axis=1)
    return int(np.count_nonzero(~ok))


def _check_level(u: GalerkinState, v: GalerkinState, n: int) -> None:
    u.require_compatible(v)
    if n > u.n:
        raise ContractViolation(f"level {n} exceeds state level {u.n}")


def apply_B(tensor: TrilinearTensor, u: GalerkinState, v: GalerkinState, n: int | None = None) -> GalerkinState:
    """B_n(u, v): coordinate k is sum_{i,j<n} B_ijk u_i v_j."""
    n = u.n if n is None else n
    _check_level(u, v, n)
    return GalerkinState(u.basis, tensor.contract(u.coeffs[:n], v.coeffs[:n], n), u.t)


@lru_cache(maxsize=8)
def _coupling_for(basis: SpectralBasis, spec: SystemSpec) -> np.ndarray:
    return assemble_coupling(basis, spec).toarray()


def apply_R(spec: SystemSpec, u: GalerkinState) -> GalerkinState:
    """R u as the left-hand operator: (-theta e_d, -u_d) projected on the basis.

    The buoyancy axis is read from `spec`, which may differ from the one the basis was built with.
    """
    if u.basis.spec.system != spec.system:
        raise ContractViolation("state blocks do not match the system")
    if spec.system != SystemTag.BOUSSINESQ:
        return u.with_coeffs(np.zeros(u.n))
    matrix = _coupling_for(u.basis, spec)[:u.n, :u.n]
    return u.with_coeffs(matrix @ u.coeffs)


def apply_A(triple: OperatorTriple, u: GalerkinState) -> GalerkinState:
    return u.with_coeffs(triple.apply_a(u.coeffs))


class CheckTolerances(BaseModel):
    """Pass/fail thresholds of the operator checker."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    antisymmetry: float = 1e-10
    energy: float = 1e-10
    a_form: float = 0.0
    r_slack: float = 1e-12
    lipschitz_slack: float = 1e-9


def _dual(x: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sqrt(np.dot(weights * x, x)))


def check_assumptions(triple: OperatorTriple, trials: int, seed: int, n: int | None = None,
                      radius: float = 1.0, tolerances: CheckTolerances | None = None) -> AssumptionCertificate:
    """Randomized probes of the A, B and R contracts; always returns a report."""
    if trials < 1:
        raise ContractViolation("need at least one trial")
    tol = tolerances or CheckTolerances()
    basis = triple.basis
    n = basis.size if n is None else n
    rng = stream(seed, 0, StreamRole.PROBES)
    lam = triple.eigenvalues(n)
    w_v = basis.dual_weights('v_dual', n)
    w_u = basis.dual_weights('u_dual', n)
    r_block = triple.r_block(n) * triple.r_scale if triple.r_matrix.nnz else np.zeros((n, n))

    def v_norm(x):
        return float(np.sqrt(np.dot(x, x) + np.dot(basis.eigenvalues[:n] * x, x)))

    def c1_ratio(x, y):
        denom = v_norm(x) * v_norm(y)
        return _dual(triple.bilinear(x, y), w_v) / denom if denom > 0.0 else 0.0

    antisym = energy = a_form = 0.0
    c1 = c2 = 0.0
    c3 = -np.inf
    r_violations = 0
    lipschitz = 0.0
    for _ in range(trials):
        u, v, w = rng.standard_normal((3, n))
        buv, buw = triple.bilinear(u, v), triple.bilinear(u, w)
        antisym = max(antisym, abs(np.dot(buv, w) + np.dot(buw, v)))
        energy = max(energy, abs(np.dot(triple.bilinear(u, u), u)))
        a_form = max(a_form, abs(np.dot(triple.apply_a(u), u) - np.dot(lam * u, u)))
        c1 = max(c1, c1_ratio(u, v))
        c2 = max(c2, _dual(buv, w_u) / (np.linalg.norm(u) * np.linalg.norm(v)))
        ru = float(np.dot(r_block @ u, u))
        h2 = float(np.dot(u, u))
        c3 = max(c3, -ru / h2)
        if -ru > h2 * (1.0 + tol.r_slack):
            r_violations += 1
        x, y = (radius * rng.uniform() * z / v_norm(z) for z in rng.standard_normal((2, n)))
        diff = x - y
        dist = v_norm(diff)
        if dist > 0.0:
            ratio = _dual(triple.bilinear(x, x) - triple.bilinear(y, y), w_v) / dist
            lipschitz = max(lipschitz, ratio)
    antisym, energy, a_form, c1, c2, lipschitz = (float(x) for x in (antisym, energy, a_form, c1, c2, lipschitz))
    c3 = max(float(c3), 0.0)
    # c1 comes from the (u, v) draws only, never from the Lipschitz pairs it bounds
    bound = 2.0 * radius * c1
    violations = triad_violations(triple.tensor, basis) if triple.b_scale != 0.0 else 0

    gates = [
        Gate(name='antisymmetry', passed=antisym <= tol.antisymmetry, assumption='B.2',
             detail=f"max |<B(u,v),w>+<B(u,w),v>| = {antisym!r}"),
        Gate(name='energy_neutrality', passed=energy <= tol.energy, assumption='B.2',
             detail=f"max |<B(u,u),u>| = {energy!r}"),
        Gate(name='a_form', passed=a_form <= tol.a_form, assumption='A.1',
             detail=f"max |<Au,u> - ((u,u))| = {a_form!r}"),
        Gate(name='triads', passed=violations == 0, detail=f"{violations} entries off wavevector triads"),
        Gate(name='bilinear_bound', passed=bool(np.isfinite(c1)), assumption='B.1', detail=f"c1 = {c1!r}"),
        Gate(name='dual_bound', passed=bool(np.isfinite(c2)), assumption='B.4', detail=f"c2 = {c2!r}"),
        Gate(name='local_lipschitz', passed=lipschitz <= bound * (1.0 + tol.lipschitz_slack) + 1e-300,
             assumption='B.3', detail=f"L_r = {lipschitz!r} <= 2 r c1 = {bound!r}"),
        Gate(name='coupling_bound', passed=r_violations == 0, assumption='R.1',
             detail=f"c3 = {c3!r}, {r_violations} probes with -<Ru,u> > |u|^2"),
    ]
    cert = AssumptionCertificate(
        system=triple.spec.system.value, n=n, trials=trials, antisymmetry_residual=antisym,
        energy_residual=energy, a_form_residual=a_form, triad_violations=violations, c1=c1, c2=c2, c3=c3,
        r_violations=r_violations, lipschitz_radius=radius, lipschitz_ratio=lipschitz, lipschitz_bound=bound,
        gates=gates,
    )
    logger.info("Operator check %s n=%d: %s", cert.system, n, "pass" if cert.passed else f"fail {cert.failures()}")
    return cert


def constants_from(cert: AssumptionCertificate) -> OperatorConstants:
    return OperatorConstants(c1=cert.c1, c2=cert.c2, c3=cert.c3, lipschitz_ratio=cert.lipschitz_ratio,
                             lipschitz_radius=cert.lipschitz_radius)


def convection_continuity(triple: OperatorTriple, u: np.ndarray, direction: np.ndarray, phi: np.ndarray,
                          scales: list[float]) -> list[tuple[float, float, float]]:
    """Rows (eps, |u_eps - u|_H, |<B(u_eps) - B(u), phi>|) along u_eps = u + eps * direction.

    A finite-window surrogate of weak continuity of B; a diagnostic, not a certificate.
    """
    base = triple.bilinear(u, u)
    rows = []
    for eps in sorted(scales, reverse=True):
        moved = u + eps * direction
        gap = abs(float(np.dot(triple.bilinear(moved, moved) - base, phi)))
        rows.append((float(eps), float(eps * np.linalg.norm(direction)), gap))
    return rows
