"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from numpy.polynomial import laguerre, legendre
from scipy.optimize import linprog

from ..errors import CertificateRejected, ContractViolation
from ..models.basis import COS, SIN, SpectralBasis
from ..models.noise import (
    LARGE,
    SMALL,
    JumpEvent,
    JumpSpec,
    MarkQuadrature,
    NoiseModel,
    WienerSpec,
    coercivity_lower_bound,
)
from ..models.operators import OperatorTriple
from ..models.reports import Gate, IsometryReport, NoiseCertificate
from ..models.state import GalerkinState
from ..rng import PathStreams

logger = logging.getLogger(__name__)

QUADRATURE_NODES = 48


# --- Wiener part ---------------------------------------------------------------

def sample_wiener_increment(spec: WienerSpec, dt: float, rng: np.random.Generator) -> np.ndarray:
    """K independent N(0, dt) draws."""
    if dt < 0.0:
        raise ContractViolation(f"dt must be >= 0, got {dt}")
    if dt == 0.0:
        return np.zeros(spec.K)
    return rng.normal(0.0, math.sqrt(dt), spec.K)


def advection_matrix(basis: SpectralBasis, b: np.ndarray) -> np.ndarray:
    """Coordinates of (b . grad) on the full basis for a constant vector b.

    (b.grad)(a cos(k.x)) = -(b.k) a sin(k.x) and (b.grad)(a sin(k.x)) = (b.k) a cos(k.x),
    so each mode maps onto its trig partner with the same wavevector, block and polarization.
    """
    N = basis.size
    out = np.zeros((N, N))
    if not np.any(b):
        return out
    partner = {}
    for i in range(N):
        partner[(tuple(basis.wavenumbers[i]), basis.blocks[i], int(basis.polarization[i]),
                 int(basis.trig[i]))] = i
    bk = basis.wavevectors @ b
    for i in range(N):
        key = (tuple(basis.wavenumbers[i]), basis.blocks[i], int(basis.polarization[i]))
        if basis.trig[i] == COS:
            j = partner.get(key + (SIN,))
            if j is not None:
                out[j, i] = -bk[i]
        else:
            j = partner.get(key + (COS,))
            if j is not None:
                out[j, i] = bk[i]
    return out


def _padded(coefficients: dict[int, float], N: int) -> np.ndarray:
    out = np.zeros(N)
    for index, value in coefficients.items():
        if index < N:
            out[index] = value
    return out


def wiener_matrices(spec: WienerSpec, basis: SpectralBasis, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(M, g) with M[i] = P_n((b_i . grad) + c_i) P_n and g[i] the projected additive part."""
    K, N = spec.K, basis.size
    M = np.zeros((K, n, n))
    g = np.zeros((K, n))
    d = basis.domain.d
    for i, direction in enumerate(spec.directions):
        b = np.zeros(d)
        b[:len(direction.b)] = direction.b
        M[i] = advection_matrix(basis, b)[:n, :n] + direction.c * np.eye(n)
        g[i] = _padded(direction.additive, N)[:n]
    return M, g


def apply_G(spec: WienerSpec, u: GalerkinState, dW: np.ndarray) -> GalerkinState:
    """sum_i (M_i u + g_i) dW_i in coordinates."""
    dW = np.asarray(dW, dtype=float)
    if dW.size != spec.K:
        raise ContractViolation(f"increment has {dW.size} entries, spec has {spec.K} directions")
    M, g = wiener_matrices(spec, u.basis, u.n)
    columns = np.einsum('kij,j->ki', M, u.coeffs) + g
    return u.with_coeffs(dW @ columns)


# --- Jump part -----------------------------------------------------------------

def sample_marks(spec: JumpSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    magnitude = rng.exponential(spec.mark_scale, count)
    sign = np.where(rng.uniform(size=count) < spec.p_plus, 1.0, -1.0)
    axis = rng.integers(spec.mark_dim, size=count)
    marks = np.zeros((count, spec.mark_dim))
    marks[np.arange(count), axis] = sign * magnitude
    return marks


def sample_jumps(spec: JumpSpec, t: float, dt: float, rng: np.random.Generator) -> list[JumpEvent]:
    """Jumps of the Poisson random measure in (t, t+dt], sorted by time.

    Counts are Poisson(rate*dt) in total; classifying each mark by |y| < y0_radius thins
    this into independent Poisson(rate_small*dt) and Poisson(rate_large*dt) counts.
    """
    if dt <= 0.0:
        raise ContractViolation(f"dt must be > 0, got {dt}")
    if spec.rate == 0.0:
        return []
    count = int(rng.poisson(spec.rate * dt))
    if count == 0:
        return []
    times = np.sort(t + dt * (1.0 - rng.uniform(size=count)))
    marks = sample_marks(spec, count, rng)
    events = []
    for time, mark in zip(times, marks, strict=True):
        region = SMALL if np.linalg.norm(mark) < spec.y0_radius else LARGE
        events.append(JumpEvent(float(time), tuple(float(y) for y in mark), region))
    return events


def mark_sigma(spec: JumpSpec, mark) -> float:
    return float(np.dot(spec.sigma_weights, np.asarray(mark, dtype=float)))


_QUADRATURE_CACHE: dict[tuple, MarkQuadrature] = {}


def mark_quadrature(spec: JumpSpec, nodes: int = QUADRATURE_NODES) -> MarkQuadrature:
    """Gauss-Legendre on [0, r) and shifted Gauss-Laguerre on [r, inf) for the magnitude,
    times the 2q direction atoms."""
    key = (spec.rate, spec.mark_scale, spec.p_plus, spec.mark_dim, spec.weights, spec.y0_radius, nodes)
    if key not in _QUADRATURE_CACHE:
        _QUADRATURE_CACHE[key] = _build_mark_quadrature(spec, nodes)
    return _QUADRATURE_CACHE[key]


def _build_mark_quadrature(spec: JumpSpec, nodes: int) -> MarkQuadrature:
    r, s = spec.y0_radius, spec.mark_scale
    x, w = legendre.leggauss(nodes)
    m_small = 0.5 * r * (x + 1.0)
    w_small = 0.5 * r * w * np.exp(-m_small / s) / s
    x, w = laguerre.laggauss(nodes)
    m_large = r + s * x
    w_large = w * math.exp(-r / s)
    magnitudes = np.concatenate([m_small, m_large])
    density = np.concatenate([w_small, w_large])
    small = np.concatenate([np.ones(nodes, bool), np.zeros(nodes, bool)])
    q = spec.mark_dim
    weights_sigma = spec.sigma_weights
    marks, sigma, weights, region = [], [], [], []
    for sign, prob in ((1.0, spec.p_plus), (-1.0, 1.0 - spec.p_plus)):
        if prob == 0.0:
            continue
        for j in range(q):
            y = np.zeros((magnitudes.size, q))
            y[:, j] = sign * magnitudes
            marks.append(y)
            sigma.append(sign * magnitudes * weights_sigma[j])
            weights.append(spec.rate * prob / q * density)
            region.append(small)
    if not marks:
        return MarkQuadrature(np.zeros((0, q)), np.zeros(0), np.zeros(0), np.zeros(0, bool))
    return MarkQuadrature(np.concatenate(marks), np.concatenate(sigma), np.concatenate(weights),
                          np.concatenate(region))


def jump_amplitude(spec: JumpSpec, sigma: float, u: np.ndarray, h0: np.ndarray) -> np.ndarray:
    """P_n F(t, u; y) = sigma(y) * (h0 + Gamma u)."""
    return sigma * (h0 + spec.contraction * u)


def jump_offset(spec: JumpSpec, basis: SpectralBasis, n: int) -> np.ndarray:
    return _padded(spec.h0, basis.size)[:n]


def compensated_integral_test(spec: JumpSpec, xi: Callable, T: float, paths: int, rng: np.random.Generator,
                              label: str = '') -> IsometryReport:
    """Monte-Carlo check of E|int int xi d(eta~)|^2 = int int |xi|^2 ds dmu.

    xi(t, y) takes times (K,) and marks (K, q) and returns scalar values (K,).
    """
    if paths < 2:
        raise ContractViolation("need at least two paths")
    quad = mark_quadrature(spec)
    tx, tw = legendre.leggauss(16)
    t_nodes = 0.5 * T * (tx + 1.0)
    t_weights = 0.5 * T * tw
    comp = 0.0
    exact = 0.0
    if quad.weights.size:
        for t, wt in zip(t_nodes, t_weights, strict=True):
            vals = np.asarray(xi(np.full(quad.sigma.size, t), quad.marks), dtype=float)
            comp += wt * float(quad.integrate(vals))
            exact += wt * float(quad.integrate(vals ** 2))
    integrals = np.empty(paths)
    for p in range(paths):
        count = int(rng.poisson(spec.rate * T)) if spec.rate > 0.0 else 0
        if count:
            times = T * rng.uniform(size=count)
            marks = sample_marks(spec, count, rng)
            integrals[p] = float(np.sum(xi(times, marks))) - comp
        else:
            integrals[p] = -comp
    squares = integrals ** 2
    report = IsometryReport(
        label=label, paths=paths,
        lhs=float(squares.mean()), lhs_stderr=float(squares.std(ddof=1) / math.sqrt(paths)),
        rhs=exact,
        mean=float(integrals.mean()), mean_stderr=float(integrals.std(ddof=1) / math.sqrt(paths)),
    )
    logger.info("Isometry %s: lhs=%g +- %g, rhs=%g", label or 'xi', report.lhs, report.lhs_stderr, report.rhs)
    return report


def increment_correlation(model: NoiseModel, dt: float, count: int, global_seed: int) -> tuple[float, float]:
    """Correlation of the first Wiener increment with the jump count over `count` disjoint intervals,
    and the 3-sigma threshold 3/sqrt(count)."""
    streams = PathStreams.for_path(global_seed, 0)
    dw = np.empty(count)
    jumps = np.empty(count)
    for i in range(count):
        inc = sample_wiener_increment(model.wiener, dt, streams.wiener)
        dw[i] = inc[0] if inc.size else 0.0
        jumps[i] = len(sample_jumps(model.jumps, i * dt, dt, streams.jumps))
    if dw.std() == 0.0 or jumps.std() == 0.0:
        return 0.0, 3.0 / math.sqrt(count)
    return float(np.corrcoef(dw, jumps)[0, 1]), 3.0 / math.sqrt(count)


def jump_continuity(spec: JumpSpec, h0: np.ndarray, u: np.ndarray, direction: np.ndarray,
                    scales: list[float]) -> list[tuple[float, float, float]]:
    """Rows (eps, |u_eps - u|_H, int |F(u_eps;y) - F(u;y)|^2 mu(dy)); a finite-window surrogate
    of sequential continuity of F, reported as a diagnostic."""
    quad = mark_quadrature(spec)
    base = h0 + spec.contraction * u
    rows = []
    for eps in sorted(scales, reverse=True):
        moved = h0 + spec.contraction * (u + eps * direction)
        gap = float(quad.integrate(quad.sigma ** 2)) * float(np.sum((moved - base) ** 2))
        rows.append((float(eps), float(eps * np.linalg.norm(direction)), gap))
    return rows


def export_jump_log(path_index: int, events: list[JumpEvent]) -> list[str]:
    """Line records `path, t, region, mark...`."""
    return [', '.join([str(path_index), repr(e.time), e.region] + [repr(y) for y in e.mark]) for e in events]


# --- Certificates --------------------------------------------------------------

def certify_noise(model: NoiseModel, basis: SpectralBasis, triple: OperatorTriple, probes: int,
                  rng: np.random.Generator, n: int | None = None, tolerance: float = 1e-9) -> NoiseCertificate:
    """Tightest (a, lambda, kappa) on the probe set, plus L_G, C_p and L.

    The gradient part of G must be dominated by (2 - a)||u||^2 on every probe; the
    zero-order and additive parts are then absorbed by lambda|u|^2 + kappa, fitted by a
    linear program. Rejects when the best a does not exceed 2 - 2/(3+gamma).
    """
    if probes < 100:
        raise ContractViolation(f"need at least 100 probes, got {probes}")
    n = basis.size if n is None else n
    spec = model.wiener
    gamma = model.jumps.gamma
    a_lower = coercivity_lower_bound(gamma)
    lam = triple.eigenvalues(n)
    if np.any(lam <= 0.0):
        raise ContractViolation("coercivity needs a positive Dirichlet form")
    M, g = wiener_matrices(spec, basis, n)
    D = M - np.array([d.c for d in spec.directions])[:, None, None] * np.eye(n) if spec.K else M

    radii = 10.0 ** rng.uniform(-2.0, 2.0, probes)
    random_dirs = rng.standard_normal((probes, n))
    random_dirs /= np.linalg.norm(random_dirs, axis=1)[:, None]
    U = np.vstack([np.eye(n), random_dirs * radii[:, None]])

    dirichlet = np.einsum('pi,i,pi->p', U, lam, U)
    h2 = np.einsum('pi,pi->p', U, U)
    if spec.K:
        grad_part = np.einsum('kij,pj->pki', D, U)
        grad2 = np.einsum('pki,pki->p', grad_part, grad_part)
        full = np.einsum('kij,pj->pki', M, U) + g[None, :, :]
        hs2 = np.einsum('pki,pki->p', full, full)
    else:
        grad2 = np.zeros(U.shape[0])
        hs2 = np.zeros(U.shape[0])

    a_max = float(np.min((2.0 * dirichlet - grad2) / dirichlet))
    a = min(2.0, a_max)
    if a <= a_lower:
        raise CertificateRejected(
            'G.2', f"gradient noise needs a={a!r} <= 2 - 2/(3+gamma) = {a_lower!r} on {U.shape[0]} probes")
    margin = float(np.min(((2.0 - a) * dirichlet - grad2) / dirichlet))

    residual = a * dirichlet - 2.0 * dirichlet + hs2
    fit = linprog(c=[1.0, 1.0], A_ub=np.column_stack([-h2, -np.ones_like(h2)]), b_ub=-residual,
                  bounds=[(0.0, None), (0.0, None)], method='highs')
    if not fit.success:
        raise CertificateRejected('G.2', f"no (lambda, kappa) fits the probes: {fit.message}")
    lam_fit, kappa_fit = (float(v) for v in fit.x)

    diffs = rng.standard_normal((probes, n))
    if spec.K:
        gd = np.einsum('kij,pj->pki', M, diffs)
        lipschitz_g = float(np.max(np.einsum('pki,pki->p', gd, gd) / np.einsum('pi,i,pi->p', diffs, lam, diffs)))
    else:
        lipschitz_g = 0.0

    jumps = model.jumps
    quad = mark_quadrature(jumps)
    h0 = jump_offset(jumps, basis, n)
    bounded = rng.standard_normal((probes, n))
    bounded *= (rng.uniform(size=probes) / np.linalg.norm(bounded, axis=1))[:, None]
    bounded = np.vstack([np.zeros(n), bounded])
    amp = np.linalg.norm(h0[None, :] + jumps.contraction * bounded, axis=1)
    unorm = np.linalg.norm(bounded, axis=1)
    growth = {}
    for p in jumps.moment_orders():
        sigma_p = quad.sigma_moment(p, absolute=True) if quad.weights.size else 0.0
        growth[repr(p)] = float(np.max(sigma_p * amp ** p / (1.0 + unorm ** p)))
    lipschitz_f = (quad.sigma_moment(2.0) if quad.weights.size else 0.0) * jumps.contraction ** 2

    ordered = [growth[repr(p)] for p in sorted(jumps.moment_orders())]
    monotone = all(x <= y * (1.0 + 1e-12) for x, y in zip(ordered, ordered[1:], strict=False))
    gates = [
        Gate(name='coercivity_window', passed=True, assumption='G.2',
             detail=f"a={a!r} in ({a_lower!r}, 2], lambda={lam_fit!r}, kappa={kappa_fit!r}"),
        Gate(name='growth_monotone', passed=monotone, assumption='F.2',
             detail='C_p nondecreasing in p on |u| <= 1 probes'),
        Gate(name='finite_large_jump_rate', passed=math.isfinite(jumps.rate_large), assumption='F.1',
             detail=f"mu(Y \\ Y0) = {jumps.rate_large!r}"),
    ]
    declared = spec.coercivity
    if declared is not None:
        slack = declared.a * dirichlet - declared.lam * h2 - declared.kappa
        worst = float(np.min(2.0 * dirichlet - hs2 - slack))
        gates.append(Gate(name='coercivity_declared', passed=worst >= -tolerance * max(1.0, float(np.max(h2))),
                          assumption='G.2', detail=f"declared a={declared.a!r}: min slack {worst!r}"))
    cert = NoiseCertificate(
        n=n, probes=U.shape[0], gamma=gamma, a=a, lam=lam_fit, kappa=kappa_fit, a_lower=a_lower,
        gradient_margin=margin, lipschitz_g=lipschitz_g, lipschitz_f=lipschitz_f, growth=growth, gates=gates,
    )
    logger.info("Noise certificate n=%d: a=%g lambda=%g kappa=%g", n, a, lam_fit, kappa_fit)
    return cert
