"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

SEED_RULE = "Generator(Philox(SeedSequence(entropy=global_seed, spawn_key=(path_index, role))))"


class StreamRole(IntEnum):
    """Independent substreams used by one path."""
    WIENER = 0
    JUMPS = 1
    PROBES = 2
    INITIAL = 3


def stream(global_seed: int, path_index: int, role: StreamRole) -> np.random.Generator:
    """Counter-based generator keyed by (global seed, path index, role)."""
    seq = np.random.SeedSequence(entropy=global_seed, spawn_key=(path_index, int(role)))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class PathStreams:
    """The Wiener and jump streams of one path, drawn independently."""
    wiener: np.random.Generator
    jumps: np.random.Generator

    @classmethod
    def for_path(cls, global_seed: int, path_index: int) -> 'PathStreams':
        return cls(
            wiener=stream(global_seed, path_index, StreamRole.WIENER),
            jumps=stream(global_seed, path_index, StreamRole.JUMPS),
        )
