"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ContractViolation
from ..models.reports import AldousTable, Gate, ModulusCurve, PathDiagnostics
from ..models.simulation import TrajectoryRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CadlagPath:
    """Piecewise-constant path: values[a] holds on [times[a], times[a+1]).

    Distances are weighted Euclidean in coordinates; weights select the norm.
    """
    times: np.ndarray
    values: np.ndarray
    weights: np.ndarray | None = None

    @classmethod
    def from_trajectory(cls, record: TrajectoryRecord, norm: str = 'h') -> 'CadlagPath':
        return cls(record.times, record.states, record.basis.dual_weights(norm, record.n))

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def scaled(self) -> np.ndarray:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        return values if self.weights is None else values * np.sqrt(self.weights)[None, :]


def _diameters(points: np.ndarray) -> np.ndarray:
    """D[i, j] = max distance among samples i..j (upper triangle)."""
    dist = cdist(points, points)
    G = dist.shape[0]
    D = np.zeros((G, G))
    for j in range(G):
        # max over a in [i, j] of dist[a, j], for every i <= j
        column = np.maximum.accumulate(dist[j::-1, j])[::-1]
        D[:j + 1, j] = column if j == 0 else np.maximum(column, np.append(D[:j, j - 1], 0.0))
    return D


def modulus(path: CadlagPath, delta: float) -> float:
    """w(u, delta): min over grid partitions with spacing >= delta of the largest oscillation
    over a partition interval, by dynamic programming over breakpoint indices."""
    if delta <= 0.0:
        raise ContractViolation(f"delta must be > 0, got {delta!r}")
    times = np.asarray(path.times, dtype=float)
    G = times.size
    if G < 2:
        return 0.0
    D = _diameters(path.scaled())
    if delta > path.horizon:
        return float(D[0, G - 2])
    best = np.full(G, np.inf)
    best[0] = 0.0
    tol = 1e-12 * max(1.0, path.horizon)
    for j in range(1, G):
        # breakpoints i with times[j] - times[i] >= delta
        stop = int(np.searchsorted(times, times[j] - delta + tol, side='right'))
        stop = min(stop, j)
        if stop == 0:
            continue
        best[j] = float(np.min(np.maximum(best[:stop], D[:stop, j - 1])))
    return float(best[G - 1])


def modulus_curve(path: CadlagPath, deltas: Sequence[float], norm: str = 'h') -> ModulusCurve:
    deltas = sorted(float(d) for d in deltas)
    return ModulusCurve(deltas=deltas, values=[modulus(path, d) for d in deltas], norm=norm)


@dataclass(frozen=True)
class StoppingRule:
    """Grid-measurable stopping rule: a fixed time, or the first recorded |u|_H >= level."""
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ('fixed', 'hit'):
            raise ContractViolation(f"unknown stopping rule kind {self.kind!r}")

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.value!r}"

    def index(self, record: TrajectoryRecord) -> int:
        """Grid index whose value is X(tau)."""
        if self.kind == 'fixed':
            return _index_at(record.times, self.value)
        hits = np.nonzero(record.norms_h() >= self.value)[0]
        return int(hits[0]) if hits.size else record.times.size - 1


def _index_at(times: np.ndarray, t: float) -> int:
    """Last recorded index with times[a] <= t, clamped to the path."""
    a = int(np.searchsorted(times, t + 1e-12, side='right')) - 1
    return min(max(a, 0), times.size - 1)


def aldous_statistic(ensemble: Sequence[TrajectoryRecord], rules: Sequence[StoppingRule], thetas: Sequence[float],
                     etas: Sequence[float], alpha: float = 1.0) -> AldousTable:
    """max over rules of P(|u(tau+theta) - u(tau)|_{U'} >= eta), plus E|.|^alpha fitted as C theta^beta."""
    if not ensemble or not rules:
        raise ContractViolation("need at least one path and one stopping rule")
    thetas = sorted(float(t) for t in thetas)
    etas = sorted(float(e) for e in etas)
    increments = np.zeros((len(rules), len(thetas), len(ensemble)))
    for p, record in enumerate(ensemble):
        w = record.basis.dual_weights('u_dual', record.n)
        for r, rule in enumerate(rules):
            a = rule.index(record)
            start = record.times[a]
            for k, theta in enumerate(thetas):
                b = _index_at(record.times, start + theta)
                gap = record.states[b] - record.states[a]
                increments[r, k, p] = math.sqrt(float(np.dot(w * gap, gap)))
    probabilities = [[float(np.max(np.mean(increments[:, k, :] >= eta, axis=1))) for eta in etas]
                     for k in range(len(thetas))]
    moments = [float(np.max(np.mean(increments[:, k, :] ** alpha, axis=1))) for k in range(len(thetas))]
    C = beta = None
    positive = [(t, m) for t, m in zip(thetas, moments, strict=True) if m > 0.0 and t > 0.0]
    if len(positive) >= 2:
        slope, intercept = np.polyfit(np.log([t for t, _ in positive]), np.log([m for _, m in positive]), 1)
        beta, C = float(slope), float(math.exp(intercept))
    table = AldousTable(thetas=thetas, etas=etas, probabilities=probabilities, moments=moments, alpha=alpha,
                        C=C, beta=beta)
    logger.info("Aldous table over %d paths and %d rules: beta=%s", len(ensemble), len(rules), beta)
    return table


def diagnose_paths(ensemble: Sequence[TrajectoryRecord], deltas: Sequence[float], rules: Sequence[StoppingRule],
                   thetas: Sequence[float], etas: Sequence[float], alpha: float = 1.0,
                   seminorms: dict[str, float] | None = None, modulus_paths: int = 4,
                   expect_positive_beta: bool = True) -> PathDiagnostics:
    """Modulus curves (H and U' norms) on the first paths, the Aldous table, and their gates."""
    curves = []
    for record in ensemble[:modulus_paths]:
        for norm in ('h', 'u_dual'):
            curves.append(modulus_curve(CadlagPath.from_trajectory(record, norm), deltas, norm))
    monotone = all(all(x <= y for x, y in zip(c.values, c.values[1:], strict=False)) for c in curves)
    nonnegative = all(v >= 0.0 for c in curves for v in c.values)
    table = aldous_statistic(ensemble, rules, thetas, etas, alpha)
    eta_monotone = all(all(x >= y for x, y in zip(row, row[1:], strict=False)) for row in table.probabilities)
    gates = [
        Gate(name='modulus_monotone', passed=monotone, detail=f"{len(curves)} curves"),
        Gate(name='modulus_nonnegative', passed=nonnegative),
        Gate(name='aldous_eta_monotone', passed=eta_monotone),
    ]
    if expect_positive_beta:
        gates.append(Gate(name='aldous_beta_positive', passed=table.beta is not None and table.beta > 0.0,
                          detail=f"beta={table.beta!r}, C={table.C!r}"))
    return PathDiagnostics(gates=gates, modulus=curves, aldous=table, seminorms=dict(seminorms or {}))
