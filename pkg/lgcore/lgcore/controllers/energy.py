"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation, PathAbort
from ..models.energy import EnergyLedger, PathSummary
from ..models.noise import LARGE, SMALL, NoiseModel
from ..models.operators import OperatorTriple
from ..models.reports import ConvergenceRow, Gate, MartingaleResult, MomentReport, MomentRow
from ..models.simulation import SimConfig, TrajectoryRecord
from ..rng import PathStreams
from .galerkin import GalerkinSystem, build_skeleton, simulate_path
from .levy_noise import mark_quadrature

logger = logging.getLogger(__name__)

MIN_ENSEMBLE = 50


def accumulate_ledger(trajectory: TrajectoryRecord, noise: NoiseModel, triple: OperatorTriple,
                      p: float = 2.0) -> EnergyLedger:
    """Discrete Ito ledger of |u|^p with every term evaluated at the left end of its step."""
    if p < 2.0:
        raise ContractViolation(f"moment order p must be >= 2, got {p!r}")
    if trajectory.basis.key != triple.basis.key:
        raise ContractViolation("trajectory and operators were built on different bases")
    K = noise.wiener.K
    if trajectory.wiener_increments.shape[1] != K:
        raise ContractViolation(
            f"trajectory carries {trajectory.wiener_increments.shape[1]} Wiener directions, noise has {K}")
    system = GalerkinSystem.build(trajectory.config, triple, noise)
    skip = trajectory.config.skip_compensation
    quad = mark_quadrature(noise.jumps)
    has_marks = quad.weights.size > 0

    def phi(x):
        return float(np.dot(x, x)) ** (0.5 * p)

    count = trajectory.times.size
    terms = {name: np.zeros(count) for name in ('drift_work', 'N', 'J', 'I', 'K', 'M', 'qv')}
    lhs = np.zeros(count)
    defect = np.zeros(count)
    start = phi(trajectory.states[0])
    running = dict.fromkeys(terms, 0.0)
    for a in range(1, count):
        u = trajectory.states[a - 1]
        t = float(trajectory.times[a - 1])
        h = float(trajectory.times[a]) - t
        r = math.sqrt(float(np.dot(u, u)))
        first = p * r ** (p - 2.0)
        second = p * (p - 2.0) * r ** (p - 4.0) if p != 2.0 and r > 0.0 else 0.0

        defect[a] = abs(float(np.dot(system.convection(u), u)))
        running['drift_work'] += first * float(np.dot(system.phi(u, t), u)) * h

        columns = system.diffusion(u)
        gdw = trajectory.wiener_increments[a] @ columns if K else np.zeros_like(u)
        running['N'] += first * float(np.dot(u, gdw))
        along = columns @ u if K else np.zeros(0)
        j_inc = 0.5 * (first * float(np.sum(columns ** 2)) + second * float(np.dot(along, along))) * h
        running['J'] += j_inc
        running['qv'] += 0.5 * (first * float(np.dot(gdw, gdw)) + second * float(np.dot(u, gdw)) ** 2) - j_inc

        compensator = 0.0
        if has_marks:
            v = system.jump_vector(u)
            moved = u[None, :] + quad.sigma[:, None] * v[None, :]
            gain = np.einsum('qi,qi->q', moved, moved) ** (0.5 * p) - r ** p
            if not skip:
                running['I'] += h * float(quad.integrate(gain - first * quad.sigma * float(np.dot(u, v)), SMALL))
            running['K'] += h * float(quad.integrate(gain, LARGE))
            compensator = h * float(quad.integrate(gain, LARGE if skip else None))
        jumps = 0.0
        left = trajectory.left_states[a]
        for event in trajectory.events.get(a, []):
            right = system.jump(left, event)
            jumps += phi(right) - phi(left)
            left = right
        running['M'] += jumps - compensator

        for name, value in running.items():
            terms[name][a] = value
        lhs[a] = phi(trajectory.states[a]) - start

    ledger = EnergyLedger(
        p=p, times=trajectory.times.copy(), lhs=lhs, drift_work=terms['drift_work'], N=terms['N'], J=terms['J'],
        I=terms['I'], K=terms['K'], M=terms['M'], qv_fluctuation=terms['qv'], energy_defect=defect,
        path_index=trajectory.path_index,
    )
    logger.debug("Ledger path %d p=%g: max residual %g, corrected %g", trajectory.path_index, p,
                 ledger.max_residual, ledger.max_corrected)
    return ledger


def _terminal(item, term: str) -> float:
    if isinstance(item, EnergyLedger):
        return item.terminal(term)
    return float(getattr(item, f'terminal_{term}'))


def _mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Order-fixed compensated sums; identical for any worker count."""
    count = len(values)
    mean = math.fsum(values) / count
    if count < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in values) / (count - 1)
    return mean, math.sqrt(var / count)


def martingale_mean_test(ledgers: Sequence[EnergyLedger | PathSummary], term: str, level: float = 3.0,
                         min_paths: int = MIN_ENSEMBLE) -> MartingaleResult:
    """Terminal mean of M or N against level standard errors of zero."""
    if term not in ('M', 'N'):
        raise ContractViolation(f"martingale test applies to M or N, got {term!r}")
    if len(ledgers) < min_paths:
        raise ContractViolation(f"need at least {min_paths} paths, got {len(ledgers)}")
    mean, stderr = _mean_stderr([_terminal(x, term) for x in ledgers])
    result = MartingaleResult(term=term, paths=len(ledgers), mean=mean, stderr=stderr, level=level)
    logger.info("Martingale %s: mean=%g stderr=%g -> %s", term, mean, stderr, "pass" if result.passed else "FAIL")
    return result


@dataclass(frozen=True)
class PathTask:
    """Everything a worker needs to simulate and reduce one path."""
    config: SimConfig
    triple: OperatorTriple
    noise: NoiseModel
    path_index: int
    sup_orders: tuple[float, ...] = (2.0,)


def summarize_path(task: PathTask) -> PathSummary:
    """Simulate one path and keep its sup-moments, V-integral and terminal martingale values.

    A PathAbort is logged and returned as an aborted summary so the ensemble keeps going.
    """
    config = task.config
    try:
        record = simulate_path(config, task.triple, task.noise, PathStreams.for_path(config.seed, task.path_index),
                               path_index=task.path_index)
    except PathAbort as err:
        logger.warning("Path %d at n=%d aborted at t=%r", task.path_index, config.n, err.time)
        return PathSummary(path_index=task.path_index, n=config.n, aborted=True, abort_time=err.time)
    norms = np.concatenate([record.norms_h(), np.sqrt(np.einsum('ai,ai->a', record.left_states,
                                                                record.left_states))])
    sup = float(np.max(norms))
    v2 = record.norms_v() ** 2
    v_integral = math.fsum(v2[:-1] * np.diff(record.times))
    ledger = accumulate_ledger(record, task.noise, task.triple, 2.0)
    return PathSummary(
        path_index=task.path_index, n=config.n, aborted=False,
        sup_h={p: sup ** p for p in task.sup_orders}, v_integral=v_integral,
        terminal_M=ledger.terminal('M'), terminal_N=ledger.terminal('N'), stopped=record.stopped, tau=record.tau,
        cutoff_activations=record.cutoff_activations, max_energy_defect=ledger.max_energy_defect,
    )


def run_ensemble(config: SimConfig, triple: OperatorTriple, noise: NoiseModel, paths: int,
                 sup_orders: Iterable[float] = (2.0,), map_fn: Callable = map) -> list[PathSummary]:
    """Summaries of paths 0..paths-1 in path order; map_fn may be an executor's ordered map."""
    orders = tuple(sup_orders)
    tasks = [PathTask(config, triple, noise, i, orders) for i in range(paths)]
    summaries = list(map_fn(summarize_path, tasks))
    aborted = sum(s.aborted for s in summaries)
    logger.info("Ensemble n=%d: %d paths, %d aborted", config.n, paths, aborted)
    return summaries


def effective_sample_size(values: Sequence[float]) -> float:
    """(sum x)^2 / sum x^2; equals the path count for equal contributions."""
    square = math.fsum(x * x for x in values)
    if square == 0.0:
        return float(len(values))
    return math.fsum(values) ** 2 / square


def _spread_ok(estimates: list[float], ratio_limit: float, growth_limit: float) -> tuple[bool, str]:
    if not estimates:
        return False, 'no estimates'
    ratios = []
    for a, b in zip(estimates, estimates[1:], strict=False):
        lo, hi = min(a, b), max(a, b)
        ratios.append(1.0 if hi == 0.0 else (math.inf if lo == 0.0 else hi / lo))
    base = estimates[0]
    growth = max((e / base for e in estimates), default=1.0) if base > 0.0 else (1.0 if max(estimates) == 0.0
                                                                                  else math.inf)
    ok = all(r < ratio_limit for r in ratios) and growth <= growth_limit and all(map(math.isfinite, estimates))
    return ok, f"successive ratios {[float(r) for r in ratios]!r}, max growth over first n {growth!r}"


def moment_report(ensembles: dict[int, list[PathSummary]], gamma: float, ratio_limit: float = 1.5,
                  growth_limit: float = 10.0) -> MomentReport:
    """E sup|u_n|^2, E sup|u_n|^(2+gamma) and E int ||u_n||_V^2 per level with uniformity gates."""
    n_sweep = sorted(ensembles)
    p_high = 2.0 + gamma
    quantities = [('sup_h2', 2.0), ('sup_hp', p_high), ('v_integral', 2.0)]
    rows: list[MomentRow] = []
    aborts: dict[int, int] = {}
    for n in n_sweep:
        ok = [s for s in ensembles[n] if not s.aborted]
        aborts[n] = len(ensembles[n]) - len(ok)
        if not ok:
            continue
        for name, p in quantities:
            values = [s.v_integral if name == 'v_integral' else s.sup_h[p] for s in ok]
            mean, stderr = _mean_stderr(values)
            rows.append(MomentRow(n=n, quantity=name, p=p, estimate=mean, stderr=stderr, paths=len(values),
                                  ess=effective_sample_size(values)))
    report = MomentReport(n_sweep=n_sweep, rows=rows, aborts=aborts, ratio_limit=ratio_limit)
    for name, _ in quantities:
        passed, detail = _spread_ok(report.estimates(name), ratio_limit, growth_limit)
        report.gates.append(Gate(name=f'moment_uniformity[{name}]', passed=passed, detail=detail))
    total = sum(aborts.values())
    report.gates.append(Gate(name='no_path_aborts', passed=total == 0, detail=f"{total} aborted paths"))
    logger.info("Moment report over n=%s: %s", n_sweep, "pass" if report.passed else f"fail {report.failures()}")
    return report


def estimate_moments(config: SimConfig, triple: OperatorTriple, noise: NoiseModel, n_sweep: Iterable[int],
                     paths: int, gamma: float, ratio_limit: float = 1.5, growth_limit: float = 10.0,
                     map_fn: Callable = map, min_paths: int = MIN_ENSEMBLE) -> MomentReport:
    """Run the n-sweep ensembles (same per-path seeds at every n) and reduce them."""
    if paths < min_paths:
        raise ContractViolation(f"need at least {min_paths} paths, got {paths}")
    ensembles = {
        n: run_ensemble(config.model_copy(update={'n': n}), triple, noise, paths, (2.0, 2.0 + gamma), map_fn)
        for n in sorted(set(n_sweep))
    }
    return moment_report(ensembles, gamma, ratio_limit, growth_limit)


def ledger_convergence(config: SimConfig, triple: OperatorTriple, noise: NoiseModel, refinements: int = 2,
                       paths: int = 8, p: float = 2.0) -> list[ConvergenceRow]:
    """Max ledger residuals at dt, dt/2, ... averaged over paths sharing one noise skeleton each."""
    if refinements < 2:
        raise ContractViolation("need at least two step sizes")
    dts = [config.dt / 2 ** k for k in range(refinements)]
    raw = [[] for _ in dts]
    corrected = [[] for _ in dts]
    for i in range(paths):
        skeleton = build_skeleton(noise, config.horizon, dts[-1], PathStreams.for_path(config.seed, i))
        for row, dt in enumerate(dts):
            record = simulate_path(config.model_copy(update={'dt': dt}), triple, noise, skeleton=skeleton,
                                   path_index=i)
            ledger = accumulate_ledger(record, noise, triple, p)
            raw[row].append(ledger.max_residual)
            corrected[row].append(ledger.max_corrected)
    rows = []
    for row, dt in enumerate(dts):
        max_corrected = math.fsum(corrected[row]) / paths
        ratio = None
        if rows and max_corrected > 0.0:
            ratio = rows[-1].max_corrected / max_corrected
        rows.append(ConvergenceRow(dt=dt, max_residual=math.fsum(raw[row]) / paths, max_corrected=max_corrected,
                                   ratio=ratio))
    logger.info("Ledger convergence: %s", [(r.dt, r.max_corrected, r.ratio) for r in rows])
    return rows
