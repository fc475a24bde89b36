"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import math

from pydantic import BaseModel, Field


class Gate(BaseModel):
    """One pass/fail verdict."""

    name: str
    passed: bool
    detail: str = ''
    assumption: str | None = None


class GatedReport(BaseModel):
    gates: list[Gate] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates)

    def failures(self) -> list[str]:
        return [g.name for g in self.gates if not g.passed]


class AssumptionCertificate(GatedReport):
    """Empirical operator certificate; constants are maxima over random probes, not proved bounds."""

    system: str
    n: int
    trials: int
    antisymmetry_residual: float
    energy_residual: float
    a_form_residual: float
    triad_violations: int
    c1: float
    c2: float
    c3: float
    r_violations: int
    lipschitz_radius: float
    lipschitz_ratio: float
    lipschitz_bound: float


class NoiseCertificate(GatedReport):
    """Coercivity constants and growth/Lipschitz surrogates of the noise coefficients."""

    n: int
    probes: int
    gamma: float
    a: float
    lam: float
    kappa: float
    a_lower: float
    gradient_margin: float
    lipschitz_g: float
    lipschitz_f: float
    growth: dict[str, float] = Field(default_factory=dict)


class IsometryReport(BaseModel):
    """Monte-Carlo E|int int xi d(eta~)|^2 against the exact int int |xi|^2 ds dmu."""

    label: str = ''
    paths: int
    lhs: float
    lhs_stderr: float
    rhs: float
    mean: float
    mean_stderr: float

    @property
    def relative_error(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else math.inf
        return abs(self.lhs - self.rhs) / self.rhs

    @property
    def within(self) -> bool:
        return abs(self.lhs - self.rhs) <= 3.0 * self.lhs_stderr

    @property
    def mean_within(self) -> bool:
        return abs(self.mean) <= 3.0 * self.mean_stderr


class MartingaleResult(BaseModel):
    term: str
    paths: int
    mean: float
    stderr: float
    level: float = 3.0

    @property
    def passed(self) -> bool:
        return abs(self.mean) <= self.level * self.stderr


class MomentRow(BaseModel):
    n: int
    quantity: str
    p: float
    estimate: float
    stderr: float
    paths: int
    ess: float


class MomentReport(GatedReport):
    n_sweep: list[int]
    rows: list[MomentRow] = Field(default_factory=list)
    aborts: dict[int, int] = Field(default_factory=dict)
    ratio_limit: float = 1.5

    def estimates(self, quantity: str) -> list[float]:
        return [r.estimate for r in self.rows if r.quantity == quantity]

    def export_lines(self) -> list[str]:
        """Line records `n, p, estimate, stderr, M` with the quantity as a leading tag."""
        return [f"{r.quantity}, {r.n}, {r.p!r}, {r.estimate!r}, {r.stderr!r}, {r.paths}" for r in self.rows]


class ConvergenceRow(BaseModel):
    dt: float
    max_residual: float
    max_corrected: float
    ratio: float | None = None


class AldousTable(BaseModel):
    thetas: list[float]
    etas: list[float]
    probabilities: list[list[float]]
    moments: list[float]
    alpha: float = 1.0
    C: float | None = None
    beta: float | None = None

    def export_lines(self) -> list[str]:
        """Line records `theta, eta, prob`."""
        return [f"{theta!r}, {eta!r}, {self.probabilities[a][b]!r}"
                for a, theta in enumerate(self.thetas) for b, eta in enumerate(self.etas)]


class ModulusCurve(BaseModel):
    deltas: list[float]
    values: list[float]
    norm: str = 'h'

    def export_lines(self) -> list[str]:
        """Line records `delta, w`."""
        return [f"{d!r}, {w!r}" for d, w in zip(self.deltas, self.values, strict=True)]


class PathDiagnostics(GatedReport):
    """Modulus curves, the Aldous table and window seminorms of an ensemble."""

    modulus: list[ModulusCurve] = Field(default_factory=list)
    aldous: AldousTable | None = None
    seminorms: dict[str, float] = Field(default_factory=dict)
