"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import json

import pytest


@pytest.fixture(autouse=True)
def isolated_home(tmp_path, monkeypatch):
    """Log files and run directories land under tmp_path."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.setenv("LEVYLAB_OUTPUT_ROOT", str(tmp_path / "runs"))
    monkeypatch.delenv("LEVYLAB_DEV", raising=False)
    return home


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def check_config():
    return {
        "system": "nse",
        "n": 8,
        "seed": 1,
        "basis_size": 16,
        "ensemble": {"n_sweep": [8]},
        "checks": {"trials": 200, "noise_probes": 200},
    }


@pytest.fixture
def short_config():
    return {
        "system": "nse",
        "n": 4,
        "seed": 9,
        "ensemble": {"n_sweep": [4]},
        "simulation": {"dt": 0.01, "horizon": 0.2},
        "output": {"export_paths": 2},
    }


@pytest.fixture
def jump_config():
    """Positive marks along one mode; every small jump raises the energy."""
    return {
        "system": "nse",
        "n": 4,
        "seed": 4,
        "ensemble": {"paths": 50, "n_sweep": [4]},
        "simulation": {"dt": 0.01, "horizon": 0.5, "initial": "zero"},
        "noise": {
            "wiener": {"directions": []},
            "jumps": {"rate": 40.0, "mark_scale": 0.5, "p_plus": 1.0, "y0_radius": 2.0, "h0": {"0": 0.5},
                      "contraction": 0.0},
        },
    }
