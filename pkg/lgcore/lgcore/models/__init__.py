"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""


from .basis import COS, SIN, SpectralBasis
from .domain import BoxDomain, LocalWindow
from .energy import EnergyLedger, PathSummary
from .noise import (
    CoercivityConstants,
    JumpEvent,
    JumpSpec,
    MarkQuadrature,
    NoiseModel,
    WienerDirection,
    WienerSpec,
)
from .operators import OperatorConstants, OperatorTriple, TrilinearTensor
from .reports import (
    AldousTable,
    AssumptionCertificate,
    ConvergenceRow,
    Gate,
    GatedReport,
    IsometryReport,
    MartingaleResult,
    ModulusCurve,
    MomentReport,
    MomentRow,
    NoiseCertificate,
    PathDiagnostics,
)
from .simulation import ForcingStep, NoiseSkeleton, SimConfig, TrajectoryRecord
from .state import GalerkinState
from .system import Block, SystemSpec, SystemTag

__all__ = [
    'BoxDomain', 'LocalWindow', 'SystemTag', 'Block', 'SystemSpec', 'GalerkinState',
    'SpectralBasis', 'COS', 'SIN', 'TrilinearTensor', 'OperatorConstants', 'OperatorTriple',
    'CoercivityConstants', 'WienerDirection', 'WienerSpec', 'JumpSpec', 'NoiseModel', 'JumpEvent',
    'MarkQuadrature', 'ForcingStep', 'SimConfig', 'NoiseSkeleton', 'TrajectoryRecord',
    'EnergyLedger', 'PathSummary', 'Gate', 'GatedReport', 'AssumptionCertificate', 'NoiseCertificate',
    'IsometryReport', 'MartingaleResult', 'MomentRow', 'MomentReport', 'ConvergenceRow', 'AldousTable',
    'ModulusCurve', 'PathDiagnostics',
]
