"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""


class LevyLabError(Exception):
    """Base class for every error raised by the lab."""


class ContractViolation(LevyLabError):
    """An operation was called outside its precondition."""


class AliasingError(ContractViolation):
    """The quadrature grid cannot resolve the requested modes or triple products."""


class PathAbort(LevyLabError):
    """A trajectory produced a nonfinite coordinate and was abandoned."""

    def __init__(self, time: float, path_index: int | None = None, detail: str = ""):
        self.time = time
        self.path_index = path_index
        self.detail = detail
        where = f"path {path_index} " if path_index is not None else ""
        super().__init__(f"{where}aborted at t={time!r}: {detail or 'nonfinite coordinate'}")


class CertificateRejected(LevyLabError):
    """A noise or operator certificate is infeasible."""

    def __init__(self, assumption: str, detail: str):
        self.assumption = assumption
        self.detail = detail
        super().__init__(f"({assumption}) {detail}")


class ConfigError(LevyLabError):
    """Configuration file could not be resolved."""

    def __init__(self, key: str, constraint: str):
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key}: {constraint}")
