"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import gammainc

from lgcore.controllers.levy_noise import (
    advection_matrix,
    apply_G,
    certify_noise,
    compensated_integral_test,
    export_jump_log,
    increment_correlation,
    jump_continuity,
    mark_quadrature,
    sample_jumps,
    sample_wiener_increment,
    wiener_matrices,
)
from lgcore.errors import CertificateRejected, ContractViolation
from lgcore.models.noise import (
    LARGE,
    SMALL,
    CoercivityConstants,
    JumpEvent,
    JumpSpec,
    NoiseModel,
    WienerDirection,
    WienerSpec,
    coercivity_lower_bound,
)
from lgcore.models.state import GalerkinState
from lgcore.rng import StreamRole, stream


class TestJumpSampling:
    def test_events_sorted_inside_interval(self):
        spec = JumpSpec(rate=50.0)
        events = sample_jumps(spec, 1.0, 0.5, np.random.default_rng(0))
        times = [e.time for e in events]
        assert times == sorted(times)
        assert all(1.0 < t <= 1.5 for t in times)

    def test_regions_follow_radius(self):
        spec = JumpSpec(rate=200.0, y0_radius=0.7)
        for event in sample_jumps(spec, 0.0, 1.0, np.random.default_rng(1)):
            assert event.region == (SMALL if event.magnitude < 0.7 else LARGE)

    def test_zero_rate_has_no_events(self):
        assert sample_jumps(JumpSpec(), 0.0, 1.0, np.random.default_rng(2)) == []

    def test_nonpositive_interval_rejected(self):
        with pytest.raises(ContractViolation):
            sample_jumps(JumpSpec(rate=1.0), 0.0, 0.0, np.random.default_rng(3))

    def test_mean_count(self):
        spec = JumpSpec(rate=4.0)
        rng = np.random.default_rng(4)
        counts = [len(sample_jumps(spec, 0.0, 1.0, rng)) for _ in range(4000)]
        assert np.mean(counts) == pytest.approx(4.0, abs=4 * math.sqrt(4.0 / 4000))

    def test_count_variance_matches_mean(self):
        spec = JumpSpec(rate=4.0)
        rng = np.random.default_rng(6)
        counts = np.array([len(sample_jumps(spec, 0.0, 1.0, rng)) for _ in range(4000)])
        assert counts.var(ddof=1) == pytest.approx(counts.mean(), abs=0.5)

    def test_export_jump_log(self):
        lines = export_jump_log(3, [JumpEvent(0.25, (1.5,), LARGE)])
        assert lines == ["3, 0.25, large, 1.5"]


class TestMarkQuadrature:
    def test_total_mass_is_rate(self):
        spec = JumpSpec(rate=7.0, mark_scale=0.8, y0_radius=1.3)
        quad = mark_quadrature(spec)
        assert float(quad.weights.sum()) == pytest.approx(7.0, rel=1e-12)
        assert float(quad.integrate(np.ones(quad.weights.size), SMALL)) == pytest.approx(spec.rate_small, rel=1e-12)

    def test_small_second_moment(self):
        spec = JumpSpec(rate=3.0, mark_scale=0.5, y0_radius=1.0)
        quad = mark_quadrature(spec)
        s, r = spec.mark_scale, spec.y0_radius
        exact = spec.rate * 2.0 * s ** 2 * gammainc(3, r / s)
        assert quad.sigma_moment(2.0, SMALL) == pytest.approx(exact, rel=1e-10)

    def test_cached(self):
        spec = JumpSpec(rate=2.0)
        assert mark_quadrature(spec) is mark_quadrature(spec)


class TestWiener:
    def test_increment_shape_and_zero_interval(self):
        spec = WienerSpec(directions=[WienerDirection(), WienerDirection()])
        assert sample_wiener_increment(spec, 0.1, np.random.default_rng(0)).shape == (2,)
        assert np.all(sample_wiener_increment(spec, 0.0, np.random.default_rng(0)) == 0.0)

    def test_advection_is_skew(self, nse_basis):
        adv = advection_matrix(nse_basis, np.array([0.3, -0.2]))
        assert np.allclose(adv, -adv.T)

    def test_matrices_include_zero_order_and_additive(self, nse_basis):
        spec = WienerSpec(directions=[WienerDirection(c=0.5, additive={2: 0.1, 99: 1.0})])
        M, g = wiener_matrices(spec, nse_basis, 4)
        assert np.allclose(M[0], 0.5 * np.eye(4))
        assert list(g[0]) == [0.0, 0.0, 0.1, 0.0]

    def test_apply_g_checks_directions(self, nse_basis):
        spec = WienerSpec(directions=[WienerDirection(c=1.0)])
        u = GalerkinState(nse_basis, np.ones(3))
        assert np.allclose(apply_G(spec, u, np.array([0.5])).coeffs, 0.5)
        with pytest.raises(ContractViolation):
            apply_G(spec, u, np.array([0.5, 0.5]))


class TestCompensatedIntegral:
    def test_isometry_holds(self):
        spec = JumpSpec(rate=5.0, mark_scale=1.0, y0_radius=1.0)
        report = compensated_integral_test(spec, lambda t, y: y[:, 0] * np.exp(-t), 1.0, 4000,
                                           stream(0, 2, StreamRole.PROBES), "decay")
        assert report.within
        assert report.label == "decay"

    @pytest.mark.parametrize("label", ["small_marks", "time_weighted", "bounded"])
    def test_isometry_for_integrands(self, label):
        spec = JumpSpec(rate=20.0, mark_scale=1.0, p_plus=0.9, y0_radius=2.0)
        integrands = {
            "small_marks": lambda t, y: np.where(np.abs(y[:, 0]) < 2.0, y[:, 0], 0.0),
            "time_weighted": lambda t, y: t * y[:, 0],
            "bounded": lambda t, y: np.cos(t) * np.tanh(y[:, 0]),
        }
        report = compensated_integral_test(spec, integrands[label], 1.0, 2000, stream(3, 2, StreamRole.PROBES),
                                           label)
        assert report.within, (report.lhs, report.lhs_stderr, report.rhs)

    def test_constant_on_small_marks_has_closed_form(self):
        spec = JumpSpec(rate=20.0, mark_scale=1.0, p_plus=0.9, y0_radius=2.0)
        T, c = 0.5, 0.7
        report = compensated_integral_test(spec, lambda t, y: np.where(np.abs(y[:, 0]) < 2.0, c, 0.0), T, 2000,
                                           stream(4, 2, StreamRole.PROBES))
        assert report.rhs == pytest.approx(T * spec.rate_small * c ** 2, rel=1e-10)
        assert report.within

    def test_zero_integrand(self):
        spec = JumpSpec(rate=20.0, mark_scale=1.0, p_plus=0.9, y0_radius=2.0)
        report = compensated_integral_test(spec, lambda t, y: np.zeros(y.shape[0]), 1.0, 100,
                                           np.random.default_rng(0))
        assert report.lhs == report.rhs == 0.0
        assert report.relative_error == 0.0
        assert report.within

    def test_needs_two_paths(self):
        with pytest.raises(ContractViolation):
            compensated_integral_test(JumpSpec(rate=1.0), lambda t, y: y[:, 0], 1.0, 1, np.random.default_rng(0))


class TestIndependence:
    def test_wiener_and_jump_counts_uncorrelated(self, shipped_noise):
        corr, threshold = increment_correlation(shipped_noise, 0.01, 2000, 5)
        assert threshold == pytest.approx(3.0 / math.sqrt(2000))
        assert abs(corr) <= threshold

    def test_silent_noise(self):
        assert increment_correlation(NoiseModel(), 0.01, 100, 0)[0] == 0.0


class TestJumpContinuity:
    def test_gap_quadratic_in_eps(self, shipped_noise):
        h0 = np.array([0.5, 0.5, 0.0, 0.0])
        rows = jump_continuity(shipped_noise.jumps, h0, np.ones(4), np.array([1.0, 0.0, 0.0, 0.0]), [1e-1, 1e-2])
        assert rows[1][2] == pytest.approx(rows[0][2] * 1e-2, rel=1e-9)


class TestCoercivity:
    def test_window(self):
        assert coercivity_lower_bound(2.0) == pytest.approx(1.6)

    def test_declared_constant_inside_window_accepted(self):
        model = NoiseModel(wiener=WienerSpec(coercivity=CoercivityConstants(a=1.9)))
        assert model.wiener.coercivity.a == 1.9

    def test_declared_constant_outside_window_names_assumption(self):
        with pytest.raises(ValidationError, match="G.2"):
            NoiseModel(wiener=WienerSpec(coercivity=CoercivityConstants(a=1.5)))


class TestCertifyNoise:
    def test_shipped_gradient_noise(self, shipped_noise, nse_basis, nse_triple):
        cert = certify_noise(shipped_noise, nse_basis, nse_triple, 200, stream(0, 1, StreamRole.PROBES), n=8)
        assert cert.a_lower < cert.a < 2.0
        assert cert.a == pytest.approx(2.0 - 0.09, rel=1e-9)
        assert cert.passed, cert.failures()

    def test_zero_noise_constants(self, nse_basis, nse_triple):
        cert = certify_noise(NoiseModel(), nse_basis, nse_triple, 200, stream(0, 1, StreamRole.PROBES), n=8)
        assert cert.a == 2.0
        assert cert.lam == pytest.approx(0.0, abs=1e-9)
        assert cert.kappa == pytest.approx(0.0, abs=1e-9)
        assert cert.lipschitz_g == 0.0

    def test_pure_multiplier_constants(self, nse_basis, nse_triple):
        noise = NoiseModel(wiener=WienerSpec(directions=[WienerDirection(c=0.4)]))
        cert = certify_noise(noise, nse_basis, nse_triple, 200, stream(0, 1, StreamRole.PROBES), n=8)
        assert cert.a == 2.0
        assert cert.lam == pytest.approx(0.16, rel=1e-6)
        assert cert.kappa == pytest.approx(0.0, abs=1e-6)

    def test_details_print_plain_floats(self, shipped_noise, nse_basis, nse_triple):
        cert = certify_noise(shipped_noise, nse_basis, nse_triple, 200, stream(0, 1, StreamRole.PROBES), n=8)
        assert not any("np." in g.detail for g in cert.gates)

    def test_growth_constants_nondecreasing(self, shipped_noise, nse_basis, nse_triple):
        cert = certify_noise(shipped_noise, nse_basis, nse_triple, 200, stream(0, 1, StreamRole.PROBES), n=8)
        ordered = [cert.growth[repr(p)] for p in sorted(shipped_noise.jumps.moment_orders())]
        assert ordered == sorted(ordered)

    def test_strong_gradient_noise_rejected(self, nse_basis, nse_triple):
        strong = NoiseModel(wiener=WienerSpec(directions=[
            WienerDirection(b=(0.8, 0.0)), WienerDirection(b=(0.0, 0.8)),
        ]))
        with pytest.raises(CertificateRejected) as err:
            certify_noise(strong, nse_basis, nse_triple, 200, stream(0, 1, StreamRole.PROBES), n=8)
        assert err.value.assumption == "G.2"

    def test_too_few_probes(self, shipped_noise, nse_basis, nse_triple):
        with pytest.raises(ContractViolation):
            certify_noise(shipped_noise, nse_basis, nse_triple, 99, stream(0, 1, StreamRole.PROBES))
