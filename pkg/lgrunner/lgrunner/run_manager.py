"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
from collections.abc import Callable, Iterator
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from functools import cached_property

import numpy as np

from lgcore.controllers.energy import (
    PathTask,
    accumulate_ledger,
    ledger_convergence,
    martingale_mean_test,
    moment_report,
    run_ensemble,
)
from lgcore.controllers.galerkin import simulate_path
from lgcore.controllers.levy_noise import (
    certify_noise,
    compensated_integral_test,
    export_jump_log,
    increment_correlation,
    jump_continuity,
    jump_offset,
)
from lgcore.controllers.operators import build_triple, check_assumptions, convection_continuity
from lgcore.controllers.path_diagnostics import StoppingRule, diagnose_paths
from lgcore.controllers.spectral import FieldPath, build_basis, seminorm_local
from lgcore.errors import CertificateRejected, ContractViolation, PathAbort
from lgcore.models.basis import SpectralBasis
from lgcore.models.domain import LocalWindow
from lgcore.models.noise import NoiseModel
from lgcore.models.operators import OperatorTriple
from lgcore.models.reports import Gate
from lgcore.models.simulation import SimConfig, TrajectoryRecord
from lgcore.rng import PathStreams, StreamRole, stream

from .config import RunConfig
from .manifest import RunDirectory, RunManifest, write_json, write_lines
from .reports import ReportRenderer, SummaryReport

logger = logging.getLogger(__name__)

COMMANDS = ('check', 'simulate', 'moments', 'diagnose', 'all')

# probe substreams, kept apart from the per-path noise streams; operator probes use the run seed directly
NOISE_PROBES = 1
ISOMETRY_PROBES = 2
CONTINUITY_PROBES = 3


def _simulate_task(task: PathTask) -> TrajectoryRecord | None:
    """Worker entry point; a PathAbort comes back as None."""
    try:
        return simulate_path(task.config, task.triple, task.noise,
                             PathStreams.for_path(task.config.seed, task.path_index), path_index=task.path_index)
    except PathAbort as err:
        logger.warning("Diagnostic path %d aborted at t=%r", task.path_index, err.time)
        return None


def _isometry_integrands(noise: NoiseModel, horizon: float) -> dict[str, Callable]:
    """Three integrands xi(t, y): small marks only, time-weighted, and bounded nonlinear."""
    spec = noise.jumps
    w = spec.sigma_weights

    def sigma(marks):
        return np.asarray(marks, dtype=float) @ w

    def small_only(t, marks):
        return np.where(np.linalg.norm(marks, axis=1) < spec.y0_radius, sigma(marks), 0.0)

    def time_weighted(t, marks):
        return (np.asarray(t) / horizon) * sigma(marks)

    def bounded(t, marks):
        return np.cos(np.asarray(t)) * np.tanh(sigma(marks))

    return {'small_marks': small_only, 'time_weighted': time_weighted, 'bounded': bounded}


class RunManager:
    """Builds the shared models once and executes commands into one run directory."""

    def __init__(self, config: RunConfig, parallel: int = 1, renderer: ReportRenderer | None = None):
        self.config = config
        self.parallel = max(1, int(parallel))
        self.manifest = RunManifest.for_config(config)
        self.directory = RunDirectory(config.output_root(), self.manifest)
        self.renderer = renderer or ReportRenderer()

    @cached_property
    def basis(self) -> SpectralBasis:
        c = self.config
        return build_basis(c.box(), c.system_spec(), c.resolved_basis_size, c.sobolev_order)

    @cached_property
    def triple(self) -> OperatorTriple:
        triple = build_triple(self.basis)
        if 'break_antisymmetry' in self.config.inject:
            logger.warning("Fault injection: symmetric defect %g added to the convection tensor",
                           self.config.checks.symmetric_defect)
            triple = triple.with_tensor(triple.tensor.with_symmetric_defect(self.config.checks.symmetric_defect))
        return triple

    @cached_property
    def noise(self) -> NoiseModel:
        return self.config.noise_model()

    @contextmanager
    def _mapper(self) -> Iterator[Callable]:
        """Ordered map over paths: builtin map, or a process pool's map when parallel > 1."""
        if self.parallel == 1:
            yield map
            return
        with ProcessPoolExecutor(max_workers=self.parallel) as pool:
            yield lambda fn, tasks: pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * self.parallel)))

    # --- commands ------------------------------------------------------------

    def run(self, command: str) -> SummaryReport:
        if command not in COMMANDS:
            raise ContractViolation(f"unknown command {command!r}, expected one of {COMMANDS}")
        self.directory.create()
        summary = SummaryReport(command=command, digest=self.manifest.digest, system=self.config.system.value)
        steps = {
            'check': [self.check],
            'simulate': [self.simulate],
            'moments': [self.moments],
            'diagnose': [self.diagnose],
            'all': [self.check, self.simulate, self.moments, self.diagnose],
        }[command]
        for step in steps:
            step(summary)
        self._write_summary(summary)
        return summary

    def check(self, summary: SummaryReport) -> None:
        c = self.config
        cert = check_assumptions(self.triple, c.checks.trials, c.seed, n=c.n, radius=c.checks.lipschitz_radius)
        summary.operators = cert
        with open(self.directory.certificate('operators.txt'), 'w', encoding='utf-8') as f:
            f.write(self.renderer.operator_certificate(cert))
        try:
            noise_cert = certify_noise(self.noise, self.basis, self.triple, c.checks.noise_probes,
                                       stream(c.seed, NOISE_PROBES, StreamRole.PROBES), n=c.n)
            summary.noise = noise_cert
            text = self.renderer.noise_certificate(noise_cert)
        except CertificateRejected as err:
            logger.error("Noise certificate rejected: %s", err)
            summary.checks.append(Gate(name='noise.coercivity_window', passed=False, detail=err.detail,
                                       assumption=err.assumption))
            text = self.renderer.noise_certificate(None, str(err))
        with open(self.directory.certificate('noise.txt'), 'w', encoding='utf-8') as f:
            f.write(text)

    def simulate(self, summary: SummaryReport) -> None:
        c = self.config
        sim = c.sim_config()
        aborts = 0
        jump_lines: list[str] = []
        consistency: Gate | None = None
        for i in range(c.output.export_paths):
            try:
                record = simulate_path(sim, self.triple, self.noise, PathStreams.for_path(c.seed, i), path_index=i)
            except PathAbort as err:
                logger.warning("Path %d aborted at t=%r", i, err.time)
                aborts += 1
                continue
            write_lines(self.directory.trajectory(f'path-{i:04d}.txt'),
                        record.export_lines(c.output.include_coefficients),
                        header='t, |u|_H, ||u||_V, jump_flag' + (', coefficients' if c.output.include_coefficients
                                                                   else ''))
            jump_lines.extend(export_jump_log(i, record.jump_events()))
            summary.cutoff_activations += record.cutoff_activations
            if consistency is None:
                consistency = self._cutoff_consistency(record)
        write_lines(self.directory.trajectory('jumps.txt'), jump_lines, header='path, t, region, mark')
        write_lines(self.directory.trajectory('basis.txt'), self.basis.export_lines(),
                    header='index, block, wavevector, eigenvalue')
        write_lines(self.directory.trajectory('tensor.txt'), self.triple.tensor.export_lines(),
                    header='i, j, k, value')
        summary.checks.append(Gate(name='simulate.no_path_aborts', passed=aborts == 0,
                                   detail=f"{aborts} of {c.output.export_paths} paths aborted"))
        if consistency is not None:
            summary.checks.append(consistency)

    def _cutoff_consistency(self, record: TrajectoryRecord) -> Gate:
        """A path that never reaches the cutoff must be reproduced bit for bit with the cutoff disabled."""
        if record.cutoff_activations:
            return Gate(name='simulate.cutoff_consistency', passed=True,
                        detail=f"cutoff active {record.cutoff_activations} times; comparison not applicable")
        sim = record.config.model_copy(update={'cutoff_enabled': False})
        rerun = simulate_path(sim, self.triple, self.noise, PathStreams.for_path(sim.seed, record.path_index),
                              path_index=record.path_index)
        same = np.array_equal(record.times, rerun.times) and np.array_equal(record.states, rerun.states)
        return Gate(name='simulate.cutoff_consistency', passed=same,
                    detail='bitwise identical without cutoff' if same else 'trajectories differ without cutoff')

    def moments(self, summary: SummaryReport) -> None:
        c = self.config
        gamma = self.noise.jumps.gamma
        orders = (2.0, 2.0 + gamma)
        with self._mapper() as map_fn:
            ensembles = {n: run_ensemble(c.sim_config(n), self.triple, self.noise, c.ensemble.paths, orders, map_fn)
                         for n in sorted(set(c.ensemble.n_sweep))}
            base = ensembles.get(c.n)
            if base is None:
                base = run_ensemble(c.sim_config(), self.triple, self.noise, c.ensemble.paths, orders, map_fn)
        report = moment_report(ensembles, gamma, c.ensemble.ratio_limit, c.ensemble.growth_limit)
        summary.moments = report
        write_lines(self.directory.report('moments.txt'), report.export_lines(),
                    header='quantity, n, p, estimate, stderr, M')

        alive = [s for s in base if not s.aborted]
        lines = []
        for term in ('M', 'N'):
            try:
                result = martingale_mean_test(alive, term, c.ensemble.martingale_level)
            except ContractViolation as err:
                summary.checks.append(Gate(name=f'martingale[{term}]', passed=False, detail=str(err)))
                continue
            summary.martingales.append(result)
            summary.checks.append(Gate(
                name=f'martingale[{term}]', passed=result.passed,
                detail=f"mean {result.mean!r} vs {result.level!r} x stderr {result.stderr!r}"))
            lines.append(f"{term}, {result.mean!r}, {result.stderr!r}, {result.paths}, {int(result.passed)}")
        write_lines(self.directory.report('martingale.txt'), lines, header='term, mean, stderr, M, passed')

        defect = max((s.max_energy_defect for s in alive), default=0.0)
        scale = max((s.sup_h[2.0] for s in alive), default=1.0)
        bound = 1e-10 * max(1.0, scale) ** 1.5
        summary.checks.append(Gate(name='ledger.energy_neutrality', passed=defect <= bound, assumption='B.2',
                                   detail=f"max per-step |<B_n(u),u>| = {defect!r} (bound {bound!r})"))
        summary.cutoff_activations += sum(s.cutoff_activations for s in alive)

    def diagnose(self, summary: SummaryReport) -> None:
        c = self.config
        sim = c.sim_config()
        self._ledger(summary, sim)
        self._isometry(summary)

        corr, threshold = increment_correlation(self.noise, sim.dt, c.checks.independence_intervals, c.seed)
        summary.checks.append(Gate(name='levy.independence', passed=abs(corr) <= threshold,
                                   detail=f"corr(dW, jump count) = {corr!r}, threshold {threshold!r}"))

        d = c.diagnostics
        tasks = [PathTask(sim, self.triple, self.noise, i) for i in range(d.paths)]
        with self._mapper() as map_fn:
            records = list(map_fn(_simulate_task, tasks))
        aborted = sum(r is None for r in records)
        records = [r for r in records if r is not None]
        summary.checks.append(Gate(name='diagnostics.no_path_aborts', passed=aborted == 0,
                                   detail=f"{aborted} of {d.paths} paths aborted"))
        if not records:
            return
        rules = [StoppingRule('fixed', t) for t in d.fixed_times] + [StoppingRule('hit', x) for x in d.hit_levels]
        seminorms = self._seminorms(records[0])
        diagnostics = diagnose_paths(records, d.deltas, rules, d.thetas, d.etas, d.alpha, seminorms,
                                     d.modulus_paths, expect_positive_beta=not self.noise.is_silent)
        summary.diagnostics = diagnostics
        nested = list(seminorms.values())
        summary.checks.append(Gate(name='seminorms.nested_monotone',
                                   passed=all(x <= y * (1.0 + 1e-12) for x, y in zip(nested, nested[1:],
                                                                                       strict=False))))
        modulus_lines = []
        for index, curve in enumerate(diagnostics.modulus):
            modulus_lines.append(f"# curve {index} norm={curve.norm}")
            modulus_lines.extend(curve.export_lines())
        write_lines(self.directory.report('modulus.txt'), modulus_lines, header='delta, w')
        write_lines(self.directory.report('aldous.txt'), diagnostics.aldous.export_lines(),
                    header=f"theta, eta, prob | alpha={diagnostics.aldous.alpha!r} C={diagnostics.aldous.C!r} "
                           f"beta={diagnostics.aldous.beta!r}")
        write_lines(self.directory.report('seminorms.txt'), [f"{k}, {v!r}" for k, v in seminorms.items()],
                    header='window, p_{T,R}')
        self._continuity(records[0])

    # --- diagnose helpers ----------------------------------------------------

    def _ledger(self, summary: SummaryReport, sim: SimConfig) -> None:
        c = self.config
        rows = ledger_convergence(sim, self.triple, self.noise, c.ensemble.ledger_refinements, c.ensemble.ledger_paths)
        summary.convergence = rows
        lo, hi = c.ensemble.ledger_ratio_band
        ratios = [r.ratio for r in rows if r.ratio is not None]
        summary.checks.append(Gate(name='ledger.convergence', passed=bool(ratios) and all(lo <= r <= hi for r in ratios),
                                   detail=f"corrected residual ratios {ratios!r} in [{lo!r}, {hi!r}]"))
        lines = [f"{r.dt!r}, {r.max_residual!r}, {r.max_corrected!r}, {r.ratio!r}" for r in rows]
        record = simulate_path(sim, self.triple, self.noise, PathStreams.for_path(c.seed, 0))
        lines.append('# path 0: t, drift_work, N, J, I, K, M, residual, corrected')
        lines.extend(accumulate_ledger(record, self.noise, self.triple, 2.0).export_lines())
        write_lines(self.directory.report('ledger.txt'), lines, header='dt, max_residual, max_corrected, ratio')

    def _isometry(self, summary: SummaryReport) -> None:
        c = self.config
        rng = stream(c.seed, ISOMETRY_PROBES, StreamRole.PROBES)
        lines = []
        for label, xi in _isometry_integrands(self.noise, c.simulation.horizon).items():
            report = compensated_integral_test(self.noise.jumps, xi, c.simulation.horizon,
                                               c.checks.isometry_samples, rng, label)
            summary.isometry.append(report)
            summary.checks.append(Gate(
                name=f'isometry[{label}]', passed=report.within,
                detail=f"lhs {report.lhs!r} +- {report.lhs_stderr!r} vs rhs {report.rhs!r}"))
            lines.append(f"{label}, {report.lhs!r}, {report.lhs_stderr!r}, {report.rhs!r}, "
                         f"{report.relative_error!r}, {report.mean!r}, {report.mean_stderr!r}")
        write_lines(self.directory.report('isometry.txt'), lines,
                    header='label, lhs, lhs_stderr, rhs, relative_error, mean, mean_stderr')

    def _seminorms(self, record: TrajectoryRecord) -> dict[str, float]:
        path = FieldPath.from_coefficients(record.basis, record.times, record.states)
        windows = LocalWindow.nested(record.basis.domain, self.config.diagnostics.windows)
        return {f"R={w.R}": seminorm_local(path, w, self.config.simulation.horizon) for w in windows}

    def _continuity(self, record: TrajectoryRecord) -> None:
        """Finite-window continuity surrogates for B and F along u + eps * direction."""
        n = record.n
        rng = stream(self.config.seed, CONTINUITY_PROBES, StreamRole.PROBES)
        direction = rng.standard_normal(n)
        direction /= np.linalg.norm(direction)
        u = record.states[-1]
        phi = np.zeros(n)
        phi[0] = 1.0
        scales = self.config.diagnostics.continuity_scales
        lines = ['# convection: eps, |u_eps - u|_H, |<B(u_eps) - B(u), e_0>|']
        lines.extend(f"{e!r}, {d!r}, {g!r}" for e, d, g in convection_continuity(self.triple, u, direction, phi,
                                                                                  scales))
        lines.append('# jumps: eps, |u_eps - u|_H, int |F(u_eps;y) - F(u;y)|^2 mu(dy)')
        h0 = jump_offset(self.noise.jumps, self.basis, n)
        lines.extend(f"{e!r}, {d!r}, {g!r}" for e, d, g in jump_continuity(self.noise.jumps, h0, u, direction,
                                                                            scales))
        write_lines(self.directory.report('continuity.txt'), lines)

    def _write_summary(self, summary: SummaryReport) -> None:
        with open(self.directory.report('summary.txt'), 'w', encoding='utf-8') as f:
            f.write(self.renderer.summary(summary))
        failures = [{'gate': g.name, 'assumption': g.assumption, 'detail': g.detail} for g in summary.failures()]
        write_json(self.directory.report('failures.json'),
                   {'command': summary.command, 'passed': summary.passed, 'failures': failures})
        if failures:
            logger.error("%s: %d gate(s) failed: %s", summary.command, len(failures),
                         ', '.join(f['gate'] for f in failures))
        else:
            logger.info("%s: all %d gates passed", summary.command, len(summary.gates()))


def run(command: str, config: RunConfig, parallel: int = 1) -> tuple[int, SummaryReport]:
    """Execute a command; exit status 0 iff every executed gate passes."""
    summary = RunManager(config, parallel).run(command)
    return (0 if summary.passed else 1), summary

