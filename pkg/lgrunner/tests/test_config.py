"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import json
from pathlib import Path

import pytest

from lgcore.errors import ConfigError
from lgcore.models.system import SystemTag
from lgrunner.config import RunConfig, digest, load_config, resolve_config
from lgrunner.manifest import RunManifest

CONFIGS_DIR = Path(__file__).parents[2] / "configs"


class TestDefaults:
    def test_empty_object_resolves(self):
        config = resolve_config({})
        assert config.system == SystemTag.NSE
        assert config.n == 8
        assert config.ensemble.n_sweep == [4, 8, 16]
        assert config.resolved_basis_size == 16
        assert config.noise_model().jumps.rate == 20.0

    def test_sim_config_follows_sections(self):
        config = resolve_config({"n": 4, "simulation": {"dt": 0.01, "horizon": 0.5}, "ensemble": {"n_sweep": [4]}})
        sim = config.sim_config()
        assert (sim.n, sim.dt, sim.horizon, sim.seed) == (4, 0.01, 0.5, 0)
        assert not sim.skip_compensation
        assert config.sim_config(2).n == 2

    @pytest.mark.parametrize("name", ["nse", "mhd", "boussinesq"])
    def test_shipped_configs_load(self, name):
        config = load_config(CONFIGS_DIR / f"{name}.json", strict=True)
        assert config.system.value == name
        assert config.ensemble.paths == 200


class TestValidation:
    def test_declared_coercivity_inside_window(self):
        config = resolve_config({"noise": {"wiener": {"coercivity": {"a": 1.9}}}})
        assert config.noise_model().wiener.coercivity.a == 1.9

    def test_declared_coercivity_outside_window(self):
        with pytest.raises(ConfigError) as err:
            resolve_config({"noise": {"wiener": {"coercivity": {"a": 1.5}}}})
        assert "G.2" in err.value.constraint

    def test_strict_rejects_unknown_key(self):
        with pytest.raises(ConfigError) as err:
            resolve_config({"bogus": 1}, strict=True)
        assert err.value.key == "bogus"
        assert err.value.constraint == "unknown key"

    def test_lenient_drops_unknown_keys(self):
        config = resolve_config({"bogus": 1, "simulation": {"dt": 0.01, "extra": True}})
        assert config.simulation.dt == 0.01

    def test_too_few_ensemble_paths(self):
        with pytest.raises(ConfigError) as err:
            resolve_config({"ensemble": {"paths": 10}})
        assert err.value.key == "ensemble.paths"

    def test_basis_size_below_sweep(self):
        with pytest.raises(ConfigError):
            resolve_config({"basis_size": 8})

    def test_unknown_fault(self):
        with pytest.raises(ConfigError):
            resolve_config({"inject": ["drop_noise"]})

    def test_faults_are_merged(self):
        config = resolve_config({"inject": ["break_antisymmetry"]}).with_faults(["skip_compensation"])
        assert config.inject == ["break_antisymmetry", "skip_compensation"]
        assert config.sim_config().skip_compensation


class TestLoad:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(tmp_path / "absent.json")
        assert err.value.constraint == "file not found"

    def test_parse_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_top_level_must_be_object(self, write_config):
        with pytest.raises(ConfigError):
            load_config(write_config([1, 2, 3]))


class TestDigest:
    def test_stable_under_key_order(self, write_config):
        a = load_config(write_config({"n": 4, "seed": 3, "ensemble": {"n_sweep": [4]}}, "a.json"))
        b = load_config(write_config({"ensemble": {"n_sweep": [4]}, "seed": 3, "n": 4}, "b.json"))
        assert digest(a) == digest(b)

    def test_output_root_does_not_enter(self):
        a = resolve_config({"output": {"root": "/tmp/one"}})
        b = resolve_config({"output": {"root": "/tmp/two"}})
        assert digest(a) == digest(b)

    def test_seed_changes_digest(self):
        assert digest(resolve_config({"seed": 1})) != digest(resolve_config({"seed": 2}))

    def test_manifest_names_run(self):
        config = resolve_config({"system": "mhd"})
        manifest = RunManifest.for_config(config)
        assert manifest.run_name == f"mhd-{digest(config)[:12]}"
        assert manifest.global_seed == 0
        assert "root" not in manifest.config["output"]
        json.dumps(manifest.model_dump(mode="json"))

    def test_output_root_from_environment(self, tmp_path):
        assert RunConfig().output_root() == tmp_path / "runs"
