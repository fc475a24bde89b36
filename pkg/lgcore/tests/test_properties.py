"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lgcore.controllers.energy import effective_sample_size
from lgcore.controllers.galerkin import cutoff_factor
from lgcore.controllers.path_diagnostics import CadlagPath, modulus
from lgcore.controllers.spectral import project
from lgcore.models.state import GalerkinState

coefficients = arrays(np.float64, 16, elements=st.floats(-10.0, 10.0, allow_nan=False))
radii = st.floats(0.0, 20.0, allow_nan=False)


@settings(deadline=None, max_examples=50)
@given(u=coefficients, v=coefficients)
def test_convection_is_energy_neutral(nse_triple, u, v):
    Bv = nse_triple.tensor.contract(u, v, 16)
    scale = 1.0 + float(np.linalg.norm(u) * np.linalg.norm(v) ** 2)
    assert abs(float(Bv @ v)) <= 1e-10 * scale


@given(r=radii, level=st.floats(0.0, 10.0, allow_nan=False))
def test_cutoff_factor_in_unit_interval(r, level):
    assert 0.0 <= cutoff_factor(r, level) <= 1.0


@given(a=radii, b=radii, level=st.floats(0.0, 10.0, allow_nan=False))
def test_cutoff_factor_nonincreasing(a, b, level):
    lo, hi = min(a, b), max(a, b)
    assert cutoff_factor(lo, level) >= cutoff_factor(hi, level)


@settings(deadline=None)
@given(values=arrays(np.float64, st.integers(2, 12), elements=st.floats(-5.0, 5.0, allow_nan=False)),
       d1=st.floats(0.01, 2.0), d2=st.floats(0.01, 2.0))
def test_modulus_nondecreasing_in_delta(values, d1, d2):
    path = CadlagPath(np.linspace(0.0, 1.0, values.size), values)
    assert modulus(path, min(d1, d2)) <= modulus(path, max(d1, d2))


@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 1e3)), min_size=1, max_size=50))
def test_effective_sample_size_bounded_by_count(values):
    assert effective_sample_size(values) <= len(values) * (1.0 + 1e-12)


@settings(deadline=None, max_examples=30)
@given(u1=coefficients, u2=coefficients, v=coefficients, a=st.floats(-3.0, 3.0, allow_nan=False))
def test_convection_is_bilinear(nse_triple, u1, u2, v, a):
    tensor = nse_triple.tensor
    lhs = tensor.contract(a * u1 + u2, v, 16)
    rhs = a * tensor.contract(u1, v, 16) + tensor.contract(u2, v, 16)
    scale = 1.0 + float((abs(a) * np.linalg.norm(u1) + np.linalg.norm(u2)) * np.linalg.norm(v))
    assert np.allclose(lhs, rhs, rtol=0.0, atol=1e-9 * scale)


@settings(deadline=None, max_examples=30)
@given(u=coefficients, n=st.integers(1, 16))
def test_projection_idempotent_and_contractive(nse_basis, u, n):
    once = project(nse_basis, nse_basis.reconstruct(u), n)
    twice = project(nse_basis, nse_basis.reconstruct(once.coeffs), n)
    assert np.allclose(twice.coeffs, once.coeffs, atol=1e-9 * (1.0 + float(np.linalg.norm(u))))
    state = GalerkinState(nse_basis, u)
    assert project(nse_basis, state, n).norm_h <= state.norm_h * (1.0 + 1e-12)
