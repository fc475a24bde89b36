"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""


from .energy import accumulate_ledger, estimate_moments, ledger_convergence, martingale_mean_test, run_ensemble
from .galerkin import cutoff, simulate_path, step, strong_errors
from .levy_noise import apply_G, certify_noise, compensated_integral_test, sample_jumps, sample_wiener_increment
from .operators import apply_A, apply_B, apply_R, build_triple, check_assumptions
from .path_diagnostics import CadlagPath, StoppingRule, aldous_statistic, modulus
from .spectral import build_basis, dual_norm, inner_h, norm_v, project, seminorm_local

__all__ = [
    'build_basis', 'project', 'inner_h', 'norm_v', 'dual_norm', 'seminorm_local',
    'build_triple', 'apply_A', 'apply_B', 'apply_R', 'check_assumptions',
    'sample_wiener_increment', 'sample_jumps', 'apply_G', 'compensated_integral_test', 'certify_noise',
    'cutoff', 'step', 'simulate_path', 'strong_errors',
    'accumulate_ledger', 'martingale_mean_test', 'run_ensemble', 'estimate_moments', 'ledger_convergence',
    'CadlagPath', 'StoppingRule', 'modulus', 'aldous_statistic',
]
