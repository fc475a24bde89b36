"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

__version__ = "0.1.0"

from .app import main  # noqa: E402

__all__ = ['main', '__version__']
