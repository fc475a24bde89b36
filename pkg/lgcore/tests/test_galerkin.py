"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from lgcore.controllers import galerkin
from lgcore.controllers.galerkin import (
    GalerkinSystem,
    build_skeleton,
    cutoff,
    cutoff_factor,
    initial_coefficients,
    simulate_path,
    step,
    strong_errors,
)
from lgcore.errors import ContractViolation
from lgcore.models.noise import SMALL, JumpEvent
from lgcore.models.simulation import ForcingStep, SimConfig
from lgcore.models.state import GalerkinState
from lgcore.rng import PathStreams


class TestCutoff:
    def test_identity_below_level(self):
        assert cutoff_factor(3.0, 4.0) == 1.0
        assert cutoff_factor(4.0, 4.0) == 1.0

    def test_zero_past_transition(self):
        assert cutoff_factor(5.0, 4.0) == 0.0
        assert cutoff_factor(9.0, 4.0) == 0.0

    def test_midpoint_strictly_between(self):
        assert 0.0 < cutoff_factor(4.5, 4.0) < 1.0
        assert cutoff_factor(4.5, 4.0) == pytest.approx(0.5)

    def test_decreasing_through_transition(self):
        values = [cutoff_factor(4.0 + x, 4.0) for x in np.linspace(0.05, 0.95, 19)]
        assert all(a > b for a, b in zip(values, values[1:], strict=False))

    def test_state_scaling(self, nse_basis):
        u = GalerkinState(nse_basis, np.full(4, 1e3))
        assert np.all(cutoff(u, 4).coeffs == 0.0)
        small = GalerkinState(nse_basis, np.full(4, 1e-3))
        assert np.array_equal(cutoff(small, 4).coeffs, small.coeffs)


class TestInitialAndForcing:
    def test_presets(self):
        assert list(initial_coefficients(SimConfig(n=6))) == [0.5, 0.25, 0.5 / 3, 0.125, 0.5 / 5, 0.5 / 6]
        assert np.count_nonzero(initial_coefficients(SimConfig(n=16))) == 12
        assert list(initial_coefficients(SimConfig(n=3, initial="first_mode"))) == [1.0, 0.0, 0.0]
        assert list(initial_coefficients(SimConfig(n=3, initial={2: 0.7, 5: 1.0}))) == [0.0, 0.0, 0.7]

    def test_unknown_preset(self):
        with pytest.raises(ValidationError):
            SimConfig(n=3, initial="random")

    def test_forcing_is_piecewise_constant(self, nse_triple, silent_noise):
        config = SimConfig(n=4, forcing=[ForcingStep(t=0.5, coefficients={1: 2.0}), ForcingStep(t=0.0)])
        system = GalerkinSystem.build(config, nse_triple, silent_noise)
        assert np.all(system.forcing(0.25) == 0.0)
        assert list(system.forcing(0.5)) == [0.0, 2.0, 0.0, 0.0]


class TestSystem:
    def test_explicit_stability_guard(self, nse_triple, silent_noise):
        with pytest.raises(ContractViolation, match="semi_implicit"):
            GalerkinSystem.build(SimConfig(n=16, dt=0.5), nse_triple, silent_noise)
        GalerkinSystem.build(SimConfig(n=16, dt=0.5, semi_implicit=True), nse_triple, silent_noise)

    def test_level_above_basis(self, nse_triple, silent_noise):
        with pytest.raises(ContractViolation):
            GalerkinSystem.build(SimConfig(n=17), nse_triple, silent_noise)

    def test_jump_rule(self, nse_triple, shipped_noise):
        system = GalerkinSystem.build(SimConfig(n=4), nse_triple, shipped_noise)
        u = np.array([1.0, -1.0, 0.5, 0.0])
        jumped = system.jump(u, JumpEvent(0.1, (0.5,), SMALL))
        h0 = np.array([0.6 / 2 ** 0.5, 0.6 / 2 ** 0.5, 0.0, 0.0])
        assert np.allclose(jumped, u + 0.5 * (h0 - 0.2 * u))

    def test_skip_compensation_removes_drift_correction(self, nse_triple, shipped_noise):
        u = np.array([0.1, 0.2, 0.0, 0.0])
        on = GalerkinSystem.build(SimConfig(n=4), nse_triple, shipped_noise)
        off = GalerkinSystem.build(SimConfig(n=4, skip_compensation=True), nse_triple, shipped_noise)
        assert np.any(on.compensation(u) != 0.0)
        assert np.all(off.compensation(u) == 0.0)


class TestSimulatePath:
    def test_linear_decay_of_single_mode(self, nse_triple, silent_noise):
        config = SimConfig(n=8, dt=1e-3, horizon=1.0, initial="first_mode")
        record = simulate_path(config, nse_triple, silent_noise)
        assert record.states[-1, 0] == pytest.approx((1.0 - 1e-3) ** 1000, rel=1e-10)
        assert np.allclose(record.states[-1, 1:], 0.0, atol=1e-12)
        assert not record.stopped

    @pytest.mark.parametrize("mode", [0, 4, 8])
    def test_decay_matches_exponential(self, nse_triple, silent_noise, mode):
        config = SimConfig(n=16, dt=1e-3, horizon=1.0, initial={mode: 1.0})
        lam = float(nse_triple.eigenvalues(16)[mode])
        record = simulate_path(config, nse_triple, silent_noise)
        exact = math.exp(-lam * config.horizon)
        assert abs(float(record.norms_h()[-1]) - exact) <= 2.0 * lam ** 2 * config.dt * config.horizon

    def test_decay_error_halves_with_step(self, nse_triple, silent_noise):
        errors = []
        for dt in (1e-2, 5e-3):
            record = simulate_path(SimConfig(n=8, dt=dt, horizon=1.0, initial="first_mode"), nse_triple,
                                   silent_noise)
            errors.append(abs(float(record.states[-1, 0]) - math.exp(-1.0)))
        assert 1.6 <= errors[0] / errors[1] <= 2.4

    def test_semi_implicit_decay(self, nse_triple, silent_noise):
        config = SimConfig(n=8, dt=1e-2, horizon=1.0, initial="first_mode", semi_implicit=True)
        record = simulate_path(config, nse_triple, silent_noise)
        assert record.states[-1, 0] == pytest.approx((1.0 + 1e-2) ** -100, rel=1e-10)

    def test_zero_state_stays_zero(self, nse_triple, silent_noise):
        record = simulate_path(SimConfig(n=8, dt=1e-2, initial={}), nse_triple, silent_noise)
        assert np.all(record.states == 0.0)
        assert record.times.size == 101

    def test_stop_at_time_zero(self, nse_triple, silent_noise):
        config = SimConfig(n=4, dt=1e-2, initial={0: 5.0}, r_stop=1.0)
        record = simulate_path(config, nse_triple, silent_noise)
        assert record.stopped
        assert record.tau == 0.0
        assert record.times.size == 1

    def test_seed_determinism(self, nse_triple, shipped_noise, short_config):
        a = simulate_path(short_config, nse_triple, shipped_noise, path_index=3)
        b = simulate_path(short_config, nse_triple, shipped_noise, path_index=3)
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.states, b.states)
        assert a.export_lines(True) == b.export_lines(True)

    def test_paths_differ(self, nse_triple, shipped_noise, short_config):
        a = simulate_path(short_config, nse_triple, shipped_noise, path_index=0)
        b = simulate_path(short_config, nse_triple, shipped_noise, path_index=1)
        assert not np.array_equal(a.states[-1], b.states[-1])

    def test_jumps_recorded_on_grid(self, nse_triple, jump_only_noise, short_config):
        record = simulate_path(short_config, nse_triple, jump_only_noise, path_index=2)
        events = record.jump_events()
        assert int(record.jump_flags.sum()) == len(record.events)
        for a in record.events:
            assert record.jump_flags[a]
            assert not np.array_equal(record.states[a], record.left_states[a])
        assert all(0.0 < e.time <= short_config.horizon for e in events)

    def test_cutoff_does_not_bind_on_small_paths(self, nse_triple, additive_noise, short_config):
        with_cutoff = simulate_path(short_config, nse_triple, additive_noise)
        without = simulate_path(short_config.model_copy(update={"cutoff_enabled": False}), nse_triple,
                                additive_noise)
        assert with_cutoff.cutoff_activations == 0
        assert np.array_equal(with_cutoff.states, without.states)

    def test_cutoff_binds_at_low_level(self, nse_triple, silent_noise):
        config = SimConfig(n=8, dt=1e-2, horizon=0.1, initial={0: 2.0}, cutoff_level=0.5)
        record = simulate_path(config, nse_triple, silent_noise)
        assert record.cutoff_activations > 0

    def test_export_lines(self, nse_triple, silent_noise):
        record = simulate_path(SimConfig(n=4, dt=0.5, horizon=1.0, initial="first_mode"), nse_triple, silent_noise)
        lines = record.export_lines()
        assert len(lines) == 3
        assert lines[0] == "0.0, 1.0, 1.4142135623730951, 0"


class TestStep:
    def test_matches_deterministic_euler(self, nse_triple, silent_noise):
        config = SimConfig(n=4, dt=1e-2, initial="first_mode")
        state = GalerkinState(nse_triple.basis, [1.0, 0.0, 0.0, 0.0])
        out = step(state, config, nse_triple, silent_noise, PathStreams.for_path(0, 0))
        assert out.t == pytest.approx(1e-2)
        assert out.coeffs[0] == pytest.approx(1.0 - 1e-2)

    def test_level_mismatch(self, nse_triple, silent_noise):
        state = GalerkinState(nse_triple.basis, np.zeros(3))
        with pytest.raises(ContractViolation):
            step(state, SimConfig(n=4), nse_triple, silent_noise, PathStreams.for_path(0, 0))


class TestSkeleton:
    def test_coarse_indices_hit_grid_and_jumps(self, jump_only_noise):
        skeleton = build_skeleton(jump_only_noise, 0.5, 0.01, PathStreams.for_path(1, 0))
        idx = skeleton.indices_for(0.02)
        times = skeleton.times[idx]
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(0.5)
        assert set(skeleton.events) <= set(idx.tolist())

    def test_jumps_on_grid_points_are_merged(self, monkeypatch, nse_triple, jump_only_noise):
        def on_grid(spec, t, dt, rng):
            if t == 0.5:
                return [JumpEvent(t + dt, (0.5,), SMALL), JumpEvent(t + dt, (-0.25,), SMALL)]
            if t == 0.25:
                return [JumpEvent(t + 0.125, (0.5,), SMALL), JumpEvent(t + 0.125, (0.5,), SMALL)]
            return []

        monkeypatch.setattr(galerkin, "sample_jumps", on_grid)
        skeleton = build_skeleton(jump_only_noise, 1.0, 0.25, PathStreams.for_path(0, 0))
        assert len(skeleton.all_events()) == 4
        assert np.all(np.diff(skeleton.times) > 0.0)
        assert sorted(len(batch) for batch in skeleton.events.values()) == [2, 2]
        grid_node = int(np.flatnonzero(skeleton.times == 0.75)[0])
        assert skeleton.fine_index[grid_node] == 3
        assert len(skeleton.events[grid_node]) == 2

        config = SimConfig(n=4, dt=0.25, horizon=1.0, initial="zero")
        record = simulate_path(config, nse_triple, jump_only_noise, skeleton=skeleton)
        assert len(record.jump_events()) == 4


class TestStrongErrors:
    def test_first_order_for_additive_noise(self, nse_triple, additive_noise):
        config = SimConfig(n=4, dt=0.02, horizon=1.0, seed=3)
        coarse, half, ratio = strong_errors(config, nse_triple, additive_noise, paths=200)
        assert coarse > half > 0.0
        assert 1.6 <= ratio <= 2.4

    def test_reference_factor_must_be_even(self, nse_triple, additive_noise):
        with pytest.raises(ContractViolation):
            strong_errors(SimConfig(n=4), nse_triple, additive_noise, paths=1, reference_factor=3)
