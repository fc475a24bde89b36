"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from dataclasses import dataclass

import numpy as np

LEDGER_TERMS = ('drift_work', 'N', 'J', 'I', 'K', 'M')


@dataclass
class EnergyLedger:
    """Running Ito-formula terms of |u|^p along one trajectory, indexed like its grid.

    residual = |u(t)|^p - |u(0)|^p - (drift_work + N + J + I + K + M).
    qv_fluctuation collects the Gaussian second-order remainder sum(|G dW|^2 - ||G||^2 dt)
    (weighted for p > 2); corrected = residual - qv_fluctuation is first order in dt.
    """
    p: float
    times: np.ndarray
    lhs: np.ndarray
    drift_work: np.ndarray
    N: np.ndarray
    J: np.ndarray
    I: np.ndarray
    K: np.ndarray
    M: np.ndarray
    qv_fluctuation: np.ndarray
    energy_defect: np.ndarray
    path_index: int = 0

    @property
    def total(self) -> np.ndarray:
        return self.drift_work + self.N + self.J + self.I + self.K + self.M

    @property
    def residual(self) -> np.ndarray:
        return self.lhs - self.total

    @property
    def corrected(self) -> np.ndarray:
        return self.residual - self.qv_fluctuation

    def terminal(self, term: str) -> float:
        if term not in LEDGER_TERMS:
            raise ValueError(f"unknown ledger term {term!r}, expected one of {LEDGER_TERMS}")
        return float(getattr(self, term)[-1])

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    @property
    def max_corrected(self) -> float:
        return float(np.max(np.abs(self.corrected)))

    @property
    def max_energy_defect(self) -> float:
        return float(np.max(self.energy_defect)) if self.energy_defect.size else 0.0

    def export_lines(self) -> list[str]:
        """Line records `t, drift_work, N, J, I, K, M, residual, corrected`."""
        columns = [self.times, self.drift_work, self.N, self.J, self.I, self.K, self.M, self.residual,
                   self.corrected]
        return [', '.join(repr(float(c[a])) for c in columns) for a in range(self.times.size)]


@dataclass(frozen=True)
class PathSummary:
    """Per-path reductions an ensemble needs; small enough to ship back from a worker."""
    path_index: int
    n: int
    aborted: bool
    abort_time: float | None = None
    sup_h: dict[float, float] | None = None
    v_integral: float = 0.0
    terminal_M: float = 0.0
    terminal_N: float = 0.0
    stopped: bool = False
    tau: float = 0.0
    cutoff_activations: int = 0
    max_energy_defect: float = 0.0
