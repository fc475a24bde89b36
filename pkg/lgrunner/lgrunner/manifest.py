"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import json
import logging
from pathlib import Path

from pydantic import BaseModel, Field

import lgcore
from lgcore.rng import SEED_RULE

from . import __version__
from .config import RunConfig, digest

logger = logging.getLogger(__name__)

LAYOUT = {
    'manifest': 'manifest.json',
    'certificates': 'certificates/',
    'trajectories': 'trajectories/',
    'reports': 'reports/',
}


class RunManifest(BaseModel):
    """Everything needed to reproduce a run directory byte for byte; carries no timestamps."""

    digest: str
    code_version: str
    global_seed: int
    seed_rule: str = SEED_RULE
    layout: dict[str, str] = Field(default_factory=lambda: dict(LAYOUT))
    config: dict

    @classmethod
    def for_config(cls, config: RunConfig) -> 'RunManifest':
        return cls(
            digest=digest(config),
            code_version=f"lgcore {lgcore.__version__} / lgrunner {__version__}",
            global_seed=config.seed,
            config=config.model_dump(mode='json', exclude={'output': {'root'}}),
        )

    @property
    def run_name(self) -> str:
        return f"{self.config['system']}-{self.digest[:12]}"


def write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write('\n')


def write_lines(path: Path, lines: list[str], header: str | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        if header:
            f.write(f"# {header}\n")
        for line in lines:
            f.write(line + '\n')


class RunDirectory:
    """`<root>/<system>-<digest12>/` with manifest.json, certificates/, trajectories/ and reports/."""

    def __init__(self, root: Path, manifest: RunManifest):
        self.manifest = manifest
        self.path = Path(root) / manifest.run_name

    def create(self) -> 'RunDirectory':
        for sub in ('certificates', 'trajectories', 'reports'):
            (self.path / sub).mkdir(parents=True, exist_ok=True)
        write_json(self.path / LAYOUT['manifest'], self.manifest.model_dump(mode='json'))
        logger.info("Run directory: %s", self.path)
        return self

    def certificate(self, name: str) -> Path:
        return self.path / 'certificates' / name

    def trajectory(self, name: str) -> Path:
        return self.path / 'trajectories' / name

    def report(self, name: str) -> Path:
        return self.path / 'reports' / name
