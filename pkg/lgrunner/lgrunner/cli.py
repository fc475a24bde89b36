"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import argparse

from .config import FAULTS
from .run_manager import COMMANDS


def build_parser() -> argparse.ArgumentParser:
    """`levylab <command> --config <path> [--parallel N] [--strict] [--inject <fault>]`."""
    parser = argparse.ArgumentParser(
        prog='levylab',
        description='Spectral Galerkin simulation and verification of Levy-driven fluid SPDEs.',
    )
    parser.add_argument('command', choices=COMMANDS, help='what to run; `all` runs every stage into one summary')
    parser.add_argument('--config', required=True, help='JSON run configuration')
    parser.add_argument('--parallel', type=int, default=1, metavar='N',
                        help='worker processes for path ensembles (results do not depend on N)')
    parser.add_argument('--strict', action='store_true', help='reject unknown configuration keys')
    parser.add_argument('--inject', action='append', default=[], choices=FAULTS, metavar='FAULT',
                        help=f"fault injection, repeatable; one of {', '.join(FAULTS)}")
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    if args.parallel < 1:
        build_parser().error('--parallel must be >= 1')
    return args
