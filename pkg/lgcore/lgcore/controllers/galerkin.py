"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation, PathAbort
from ..models.noise import SMALL, JumpEvent, NoiseModel
from ..models.operators import OperatorTriple
from ..models.simulation import NoiseSkeleton, SimConfig, TrajectoryRecord
from ..models.state import GalerkinState
from ..rng import PathStreams
from .levy_noise import (
    jump_offset,
    mark_quadrature,
    mark_sigma,
    sample_jumps,
    sample_wiener_increment,
    wiener_matrices,
)

logger = logging.getLogger(__name__)

LOW_MODES = 12


def _psi(x: float) -> float:
    return math.exp(-1.0 / x) if x > 0.0 else 0.0


def cutoff_factor(r: float, level: float) -> float:
    """Smooth theta: 1 on [0, level], 0 on [level+1, inf), C-infinity in between."""
    t = r - level
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    tail = _psi(1.0 - t)
    if tail == 0.0:
        return 0.0
    return 1.0 / (1.0 + _psi(t) / tail)


def cutoff(u: GalerkinState, n: int, level: float | None = None) -> GalerkinState:
    """chi_n(u) = theta_n(|u|_{U'}) u."""
    level = float(n) if level is None else level
    w = u.basis.dual_weights('u_dual', u.n)
    r = float(np.sqrt(np.dot(w * u.coeffs, u.coeffs)))
    return u.with_coeffs(cutoff_factor(r, level) * u.coeffs)


def initial_coefficients(config: SimConfig) -> np.ndarray:
    n = config.n
    u0 = np.zeros(n)
    if isinstance(config.initial, dict):
        for index, value in config.initial.items():
            if index < n:
                u0[index] = value
    elif config.initial == 'low_modes':
        # the first LOW_MODES indices reach past the |k|=1 shell of every system
        for i in range(min(LOW_MODES, n)):
            u0[i] = 0.5 / (i + 1)
    elif config.initial == 'first_mode':
        u0[0] = 1.0
    return u0


@dataclass
class GalerkinSystem:
    """Level-n arrays of the Galerkin SDE: drift, Gaussian columns and jump map."""
    config: SimConfig
    triple: OperatorTriple
    noise: NoiseModel
    lam: np.ndarray
    u_dual: np.ndarray
    M: np.ndarray
    g: np.ndarray
    h0: np.ndarray
    small_mean: float
    forcing_times: np.ndarray
    forcing_values: np.ndarray

    @classmethod
    def build(cls, config: SimConfig, triple: OperatorTriple, noise: NoiseModel) -> 'GalerkinSystem':
        basis = triple.basis
        n = config.n
        if n > basis.size:
            raise ContractViolation(f"level {n} exceeds basis size {basis.size}")
        lam = triple.eigenvalues(n)
        if not config.semi_implicit and lam.size and config.dt * float(lam.max()) >= 1.0:
            raise ContractViolation(
                f"explicit step unstable: dt*lambda_max = {config.dt * float(lam.max())!r} >= 1; "
                f"reduce dt or enable semi_implicit")
        M, g = wiener_matrices(noise.wiener, basis, n)
        quad = mark_quadrature(noise.jumps)
        small_mean = quad.sigma_moment(1.0, SMALL) if quad.weights.size else 0.0
        steps = sorted(config.forcing, key=lambda s: s.t)
        f_times = np.array([s.t for s in steps])
        f_values = np.zeros((len(steps), n))
        for row, s in enumerate(steps):
            for index, value in s.coefficients.items():
                if index < n:
                    f_values[row, index] = value
        return cls(config=config, triple=triple, noise=noise, lam=lam,
                   u_dual=basis.dual_weights('u_dual', n), M=M, g=g, h0=jump_offset(noise.jumps, basis, n),
                   small_mean=small_mean, forcing_times=f_times, forcing_values=f_values)

    @property
    def n(self) -> int:
        return self.config.n

    def forcing(self, t: float) -> np.ndarray:
        if self.forcing_times.size == 0:
            return np.zeros(self.n)
        row = int(np.searchsorted(self.forcing_times, t, side='right')) - 1
        return self.forcing_values[row] if row >= 0 else np.zeros(self.n)

    def theta(self, u: np.ndarray) -> float:
        if not self.config.cutoff_enabled:
            return 1.0
        return cutoff_factor(float(np.sqrt(np.dot(self.u_dual * u, u))), self.config.level)

    def convection(self, u: np.ndarray) -> np.ndarray:
        """B_n(u) = P_n B(chi_n(u))."""
        theta = self.theta(u)
        chi = u if theta == 1.0 else theta * u
        return self.triple.bilinear(chi, chi)

    def phi(self, u: np.ndarray, t: float) -> np.ndarray:
        """Phi_n(u) = -A u - B_n(u) - R u + P_n f, without jump compensation."""
        return -self.lam * u - self.convection(u) - self.triple.coupling(u) + self.forcing(t)

    def jump_vector(self, u: np.ndarray) -> np.ndarray:
        return self.h0 + self.noise.jumps.contraction * u

    def compensation(self, u: np.ndarray) -> np.ndarray:
        """int_{Y0} P_n F(u; y) mu(dy); zero when the fault flag skips it."""
        if self.config.skip_compensation or self.small_mean == 0.0:
            return np.zeros(self.n)
        return self.small_mean * self.jump_vector(u)

    def diffusion(self, u: np.ndarray) -> np.ndarray:
        """Columns G_i(u) = M_i u + g_i, shape (K, n)."""
        if self.M.shape[0] == 0:
            return np.zeros((0, self.n))
        return np.einsum('kij,j->ki', self.M, u) + self.g

    def advance(self, u: np.ndarray, t: float, h: float, dW: np.ndarray) -> np.ndarray:
        """Euler-Maruyama over (t, t+h] without jumps."""
        noise = dW @ self.diffusion(u) if dW.size else 0.0
        if self.config.semi_implicit:
            rest = -self.convection(u) - self.triple.coupling(u) + self.forcing(t) - self.compensation(u)
            return (u + h * rest + noise) / (1.0 + h * self.lam)
        return u + h * (self.phi(u, t) - self.compensation(u)) + noise

    def jump(self, u: np.ndarray, event: JumpEvent) -> np.ndarray:
        """u <- u + P_n F(t, u-; y)."""
        return u + mark_sigma(self.noise.jumps, event.mark) * self.jump_vector(u)


def _check_finite(u: np.ndarray, t: float, path_index: int) -> None:
    if not np.all(np.isfinite(u)):
        raise PathAbort(t, path_index)


def step(state: GalerkinState, config: SimConfig, triple: OperatorTriple, noise: NoiseModel,
         rng: PathStreams, system: GalerkinSystem | None = None) -> GalerkinState:
    """One jump-adapted Euler-Maruyama step over [t, t+dt]; returns the right value at t+dt."""
    system = system or GalerkinSystem.build(config, triple, noise)
    if state.n != config.n:
        raise ContractViolation(f"state level {state.n} differs from config level {config.n}")
    t0 = state.t
    events = sample_jumps(noise.jumps, t0, config.dt, rng.jumps) if noise.jumps.rate > 0.0 else []
    u = state.coeffs.copy()
    t = t0
    for event in events + [None]:
        t_next = event.time if event is not None else t0 + config.dt
        dW = sample_wiener_increment(noise.wiener, t_next - t, rng.wiener)
        u = system.advance(u, t, t_next - t, dW)
        if event is not None:
            u = system.jump(u, event)
        _check_finite(u, t_next, 0)
        t = t_next
    return state.with_coeffs(u, t0 + config.dt)


def build_skeleton(noise: NoiseModel, horizon: float, fine_dt: float, streams: PathStreams) -> NoiseSkeleton:
    """Sample the Brownian path and jumps interval by interval on the fine grid.

    A jump that lands on an existing node (the grid point t1, or an earlier jump at the same
    time) is merged into that node's event list instead of opening a zero-length step.
    """
    steps = int(round(horizon / fine_dt))
    K = noise.wiener.K
    times = [0.0]
    fine_index = [0]
    W = [np.zeros(K)]
    events: dict[int, list[JumpEvent]] = {}
    for k in range(steps):
        t0 = k * fine_dt
        t1 = (k + 1) * fine_dt
        batch = sample_jumps(noise.jumps, t0, fine_dt, streams.jumps) if noise.jumps.rate > 0.0 else []
        at_end = []
        for event in batch:
            if event.time >= t1:
                at_end.append(event)
                continue
            if event.time <= times[-1]:
                events.setdefault(len(times) - 1, []).append(event)
                continue
            W.append(W[-1] + sample_wiener_increment(noise.wiener, event.time - times[-1], streams.wiener))
            times.append(event.time)
            fine_index.append(-1)
            events.setdefault(len(times) - 1, []).append(event)
        W.append(W[-1] + sample_wiener_increment(noise.wiener, t1 - times[-1], streams.wiener))
        times.append(t1)
        fine_index.append(k + 1)
        if at_end:
            events[len(times) - 1] = at_end
    return NoiseSkeleton(fine_dt=fine_dt, horizon=steps * fine_dt, times=np.array(times),
                         fine_index=np.array(fine_index), W=np.array(W).reshape(len(times), K), events=events)


def simulate_path(config: SimConfig, triple: OperatorTriple, noise: NoiseModel, streams: PathStreams | None = None,
                  skeleton: NoiseSkeleton | None = None, path_index: int = 0) -> TrajectoryRecord:
    """Full trajectory on [0, T] with stopping at the first recorded |u|_H >= r_stop."""
    system = GalerkinSystem.build(config, triple, noise)
    if skeleton is None:
        streams = streams or PathStreams.for_path(config.seed, path_index)
        skeleton = build_skeleton(noise, config.horizon, config.dt, streams)
    idx = skeleton.indices_for(config.dt)
    times = skeleton.times[idx]
    W = skeleton.W[idx]
    n = config.n
    count = idx.size
    states = np.zeros((count, n))
    left = np.zeros((count, n))
    flags = np.zeros(count, dtype=bool)
    increments = np.zeros((count, noise.wiener.K))
    events: dict[int, list[JumpEvent]] = {}

    u = initial_coefficients(config)
    states[0] = left[0] = u
    activations = 0
    stopped = False
    tau = float(times[-1])
    last = count - 1
    if math.sqrt(float(np.dot(u, u))) >= config.r_stop:
        stopped, tau, last = True, 0.0, 0
    else:
        for a in range(1, count):
            t_prev, t_now = float(times[a - 1]), float(times[a])
            dW = W[a] - W[a - 1]
            if system.theta(u) < 1.0:
                activations += 1
            u = system.advance(u, t_prev, t_now - t_prev, dW)
            _check_finite(u, t_now, path_index)
            left[a] = u
            increments[a] = dW
            batch = skeleton.events.get(int(idx[a]), [])
            for event in batch:
                u = system.jump(u, event)
            if batch:
                _check_finite(u, t_now, path_index)
                flags[a] = True
                events[a] = list(batch)
            states[a] = u
            if math.sqrt(float(np.dot(u, u))) >= config.r_stop:
                stopped, tau, last = True, t_now, a
                break
    keep = slice(0, last + 1)
    record = TrajectoryRecord(
        basis=triple.basis, config=config, times=times[keep].copy(), states=states[keep], left_states=left[keep],
        jump_flags=flags[keep], events={a: e for a, e in events.items() if a <= last},
        wiener_increments=increments[keep], stopped=stopped, tau=tau, cutoff_activations=activations,
        path_index=path_index,
    )
    logger.debug("Simulated path %d: %r", path_index, record)
    return record


def strong_errors(config: SimConfig, triple: OperatorTriple, noise: NoiseModel, paths: int,
                  reference_factor: int = 16) -> tuple[float, float, float]:
    """RMS terminal error at dt and dt/2 against a dt/reference_factor path on the same skeleton.

    Returns (error at dt, error at dt/2, ratio).
    """
    if reference_factor < 2 or reference_factor % 2:
        raise ContractViolation("reference factor must be an even integer >= 2")
    fine = config.dt / reference_factor
    squares: list[list[float]] = [[], []]
    for i in range(paths):
        skeleton = build_skeleton(noise, config.horizon, fine, PathStreams.for_path(config.seed, i))
        reference = simulate_path(config.model_copy(update={'dt': fine}), triple, noise, skeleton=skeleton,
                                  path_index=i)
        for row, dt in enumerate((config.dt, config.dt / 2)):
            record = simulate_path(config.model_copy(update={'dt': dt}), triple, noise, skeleton=skeleton,
                                   path_index=i)
            gap = record.states[-1] - reference.states[-1]
            squares[row].append(float(np.dot(gap, gap)))
    coarse, half = (math.sqrt(math.fsum(s) / paths) for s in squares)
    ratio = coarse / half if half > 0.0 else math.inf
    logger.info("Strong errors: dt=%g -> %g, dt/2 -> %g, ratio %g", config.dt, coarse, half, ratio)
    return coarse, half, ratio
