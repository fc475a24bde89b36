"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined
from pydantic import BaseModel, Field

from lgcore.models.reports import (
    AssumptionCertificate,
    ConvergenceRow,
    Gate,
    GatedReport,
    IsometryReport,
    MartingaleResult,
    MomentReport,
    NoiseCertificate,
    PathDiagnostics,
)

logger = logging.getLogger(__name__)

TEMPLATES_DIR = Path(__file__).parent / 'templates'


class SummaryReport(BaseModel):
    """All executed checks of one command; overall pass iff every gate passes."""

    command: str
    digest: str
    system: str
    operators: AssumptionCertificate | None = None
    noise: NoiseCertificate | None = None
    moments: MomentReport | None = None
    martingales: list[MartingaleResult] = Field(default_factory=list)
    isometry: list[IsometryReport] = Field(default_factory=list)
    convergence: list[ConvergenceRow] = Field(default_factory=list)
    diagnostics: PathDiagnostics | None = None
    cutoff_activations: int = 0
    checks: list[Gate] = Field(default_factory=list)

    def gates(self) -> list[Gate]:
        """Every gate exactly once, prefixed with the section that produced it."""
        out = []
        sections: list[tuple[str, GatedReport | None]] = [
            ('operators', self.operators), ('noise', self.noise), ('moments', self.moments),
            ('diagnostics', self.diagnostics),
        ]
        for prefix, report in sections:
            if report is not None:
                out.extend(g.model_copy(update={'name': f"{prefix}.{g.name}"}) for g in report.gates)
        out.extend(self.checks)
        names = [g.name for g in out]
        duplicates = {n for n in names if names.count(n) > 1}
        if duplicates:
            raise ValueError(f"gates reported more than once: {sorted(duplicates)}")
        return out

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates())

    def failures(self) -> list[Gate]:
        return [g for g in self.gates() if not g.passed]


class ReportRenderer:
    """Renders summaries and certificates from the Jinja2 text templates."""

    def __init__(self, templates_dir: str | Path | None = None):
        self.templates_dir = Path(templates_dir) if templates_dir is not None else TEMPLATES_DIR
        self.env = Environment(
            loader=FileSystemLoader(str(self.templates_dir)),
            trim_blocks=True,
            lstrip_blocks=True,
            undefined=StrictUndefined,
            keep_trailing_newline=True,
        )
        self.env.filters['num'] = self._num
        self.env.filters['verdict'] = self._verdict

    @staticmethod
    def _num(value) -> str:
        """Shortest round-trip text of a float; None as '-'."""
        if value is None:
            return '-'
        return repr(float(value))

    @staticmethod
    def _verdict(passed: bool) -> str:
        return 'PASS' if passed else 'FAIL'

    def render(self, template: str, **context) -> str:
        return self.env.get_template(template).render(**context)

    def summary(self, report: SummaryReport) -> str:
        return self.render('summary.txt.j2', report=report, gates=report.gates(), passed=report.passed)

    def operator_certificate(self, cert: AssumptionCertificate) -> str:
        return self.render('operators.txt.j2', cert=cert)

    def noise_certificate(self, cert: NoiseCertificate | None, rejection: str | None = None) -> str:
        return self.render('noise.txt.j2', cert=cert, rejection=rejection)
