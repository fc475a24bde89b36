"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pytest

from lgcore.controllers.galerkin import simulate_path
from lgcore.errors import ContractViolation
from lgcore.models.reports import Gate
from lgcore.rng import PathStreams
from lgrunner import main
from lgrunner.app import crash_hook
from lgrunner.cli import parse_args
from lgrunner.config import resolve_config
from lgrunner.reports import ReportRenderer, SummaryReport
from lgrunner.run_manager import RunManager

CONFIGS_DIR = Path(__file__).parents[2] / "configs"


def _snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def _shipped(name, **sections):
    """A shipped config with some sections shortened."""
    data = json.loads((CONFIGS_DIR / f"{name}.json").read_text(encoding="utf-8"))
    for key, values in sections.items():
        data[key] = {**data.get(key, {}), **values}
    return resolve_config(data, strict=True)


class TestCheck:
    def test_shipped_noise_and_operators_pass(self, check_config):
        manager = RunManager(resolve_config(check_config))
        summary = manager.run("check")
        assert summary.passed, [g.name for g in summary.failures()]
        assert summary.operators is not None and summary.noise is not None
        path = manager.directory.path
        assert (path / "certificates" / "operators.txt").is_file()
        assert (path / "certificates" / "noise.txt").is_file()
        assert json.loads((path / "reports" / "failures.json").read_text(encoding="utf-8")) == {
            "command": "check", "passed": True, "failures": [],
        }

    def test_broken_antisymmetry_fails(self, check_config):
        config = resolve_config(check_config).with_faults(["break_antisymmetry"])
        summary = RunManager(config).run("check")
        names = [g.name for g in summary.failures()]
        assert "operators.antisymmetry" in names

    def test_unknown_command(self, check_config):
        with pytest.raises(ContractViolation):
            RunManager(resolve_config(check_config)).run("plot")


class TestSimulate:
    def test_reruns_are_byte_identical(self, short_config):
        config = resolve_config(short_config)
        first = RunManager(config)
        summary = first.run("simulate")
        assert summary.passed, [g.name for g in summary.failures()]
        before = _snapshot(first.directory.path)
        RunManager(config).run("simulate")
        assert _snapshot(first.directory.path) == before
        assert {"trajectories/path-0000.txt", "trajectories/path-0001.txt", "trajectories/jumps.txt",
                "trajectories/basis.txt", "trajectories/tensor.txt", "manifest.json"} <= set(before)

    def test_trajectory_file_rows(self, short_config):
        manager = RunManager(resolve_config(short_config))
        manager.run("simulate")
        lines = (manager.directory.trajectory("path-0000.txt")).read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("# t, |u|_H")
        # jump times add rows to the 21 grid points
        assert len(lines) >= 1 + 21


class TestMoments:
    def test_skipped_compensation_fails_martingale_gate(self, jump_config):
        config = resolve_config(jump_config).with_faults(["skip_compensation"])
        summary = RunManager(config).run("moments")
        assert "martingale[M]" in {g.name for g in summary.failures()}

    def test_compensated_run_passes(self, jump_config):
        summary = RunManager(resolve_config(jump_config)).run("moments")
        assert summary.passed, [g.name for g in summary.failures()]
        assert {r.term for r in summary.martingales} == {"M", "N"}

    def test_parallel_matches_serial(self, jump_config):
        config = resolve_config(jump_config)
        serial = RunManager(config)
        serial.run("moments")
        expected = serial.directory.report("moments.txt").read_text(encoding="utf-8")
        parallel = RunManager(config, parallel=2)
        parallel.run("moments")
        assert parallel.directory.report("moments.txt").read_text(encoding="utf-8") == expected


class TestDiagnose:
    def test_writes_reports_and_gates(self, short_config):
        data = {**short_config, "diagnostics": {"paths": 10, "deltas": [0.02, 0.05, 0.1],
                                                "thetas": [0.01, 0.02, 0.05], "fixed_times": [0.0, 0.1],
                                                "hit_levels": [0.5], "modulus_paths": 2},
                "checks": {"isometry_samples": 2000, "independence_intervals": 500}}
        manager = RunManager(resolve_config(data))
        summary = manager.run("diagnose")
        assert summary.passed, [g.name for g in summary.failures()]
        names = {g.name for g in summary.gates()}
        assert {"ledger.convergence", "levy.independence", "diagnostics.no_path_aborts", "seminorms.nested_monotone",
                "isometry[small_marks]", "isometry[time_weighted]", "isometry[bounded]"} <= names
        assert summary.diagnostics is not None
        for name in ("ledger.txt", "isometry.txt", "modulus.txt", "aldous.txt", "seminorms.txt", "continuity.txt",
                     "summary.txt", "failures.json"):
            assert manager.directory.report(name).is_file()


class TestShippedPresets:
    @pytest.mark.parametrize("name", ["nse", "mhd", "boussinesq"])
    def test_paths_reach_convection(self, name):
        config = _shipped(name, simulation={"horizon": 0.05})
        manager = RunManager(config)
        record = simulate_path(config.sim_config(), manager.triple, manager.noise,
                               PathStreams.for_path(config.seed, 0))
        first_shell = int(np.count_nonzero(manager.basis.eigenvalues == manager.basis.eigenvalues[0]))
        assert np.max(np.abs(record.states[:, first_shell:])) > 1e-3
        assert max(float(np.linalg.norm(manager.triple.bilinear(u, u))) for u in record.states) > 1e-6

    @pytest.mark.parametrize("name", ["nse", "mhd", "boussinesq"])
    def test_moments_depend_on_level_and_pass(self, name):
        config = _shipped(name, simulation={"horizon": 0.05}, ensemble={"paths": 50})
        summary = RunManager(config).run("moments")
        assert summary.passed, [g.name for g in summary.failures()]
        estimates = summary.moments.estimates("sup_h2")
        assert len(estimates) == 3
        assert len(set(estimates)) == 3


class TestCli:
    def test_check_exits_zero(self, check_config, write_config):
        assert main(["check", "--config", str(write_config(check_config))]) == 0

    def test_gate_failure_exits_one(self, jump_config, write_config):
        path = write_config(jump_config)
        assert main(["moments", "--config", str(path), "--inject", "skip_compensation"]) == 1

    def test_missing_config_exits_two(self, tmp_path):
        assert main(["check", "--config", str(tmp_path / "absent.json")]) == 2

    def test_strict_unknown_key_exits_two(self, check_config, write_config):
        path = write_config({**check_config, "bogus": 1})
        assert main(["check", "--config", str(path), "--strict"]) == 2

    def test_parallel_must_be_positive(self):
        with pytest.raises(SystemExit):
            parse_args(["check", "--config", "x.json", "--parallel", "0"])

    def test_log_file_under_home(self, check_config, write_config, isolated_home):
        main(["check", "--config", str(write_config(check_config))])
        assert (isolated_home / ".levylab" / "levylab.log").is_file()

    def test_run_log_beside_run_directory(self, check_config, write_config, tmp_path):
        main(["check", "--config", str(write_config(check_config))])
        logs = list((tmp_path / "runs").glob("*.log"))
        assert len(logs) == 1
        assert "check finished with status 0" in logs[0].read_text(encoding="utf-8")
        assert (tmp_path / "runs" / logs[0].stem / "manifest.json").is_file()

    def test_crash_hook_names_command(self, caplog):
        try:
            raise RuntimeError("boom")
        except RuntimeError as err:
            info = (type(err), err, err.__traceback__)
        with caplog.at_level(logging.CRITICAL):
            crash_hook("moments")(*info)
        assert "levylab moments crashed: RuntimeError: boom" in caplog.text


class TestRenderer:
    def test_summary_lists_failed_gate(self):
        report = SummaryReport(command="check", digest="abc", system="nse", checks=[
            Gate(name="noise.coercivity_window", passed=False, detail="a too small", assumption="G.2"),
            Gate(name="levy.independence", passed=True),
        ])
        text = ReportRenderer().summary(report)
        assert "overall: FAIL" in text
        assert "FAIL  noise.coercivity_window (G.2): a too small" in text
        assert "PASS  levy.independence" in text

    def test_duplicate_gate_names_rejected(self):
        report = SummaryReport(command="check", digest="abc", system="nse", checks=[
            Gate(name="x", passed=True), Gate(name="x", passed=True),
        ])
        with pytest.raises(ValueError):
            report.gates()
