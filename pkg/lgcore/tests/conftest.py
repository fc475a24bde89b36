"""
Levy Galerkin Lab - spectral Galerkin verification lab for Levy-driven fluid SPDEs

SPDX-License-Identifier: AGPL-3.0-only
See LICENSE file for full terms.
"""

import pytest

from lgcore.controllers.operators import build_triple
from lgcore.controllers.spectral import build_basis
from lgcore.models.domain import BoxDomain
from lgcore.models.noise import JumpSpec, NoiseModel, WienerDirection, WienerSpec
from lgcore.models.simulation import SimConfig
from lgcore.models.system import SystemSpec, SystemTag


@pytest.fixture(scope="session")
def domain():
    return BoxDomain(d=2, resolution=16)


@pytest.fixture(scope="session")
def nse_basis(domain):
    return build_basis(domain, SystemSpec(system=SystemTag.NSE), 16)


@pytest.fixture(scope="session")
def mhd_basis(domain):
    return build_basis(domain, SystemSpec(system=SystemTag.MHD, hartmann=2.0), 16)


@pytest.fixture(scope="session")
def boussinesq_basis(domain):
    return build_basis(domain, SystemSpec(system=SystemTag.BOUSSINESQ), 16)


@pytest.fixture(scope="session")
def nse_triple(nse_basis):
    return build_triple(nse_basis)


@pytest.fixture(scope="session")
def mhd_triple(mhd_basis):
    return build_triple(mhd_basis)


@pytest.fixture(scope="session")
def boussinesq_triple(boussinesq_basis):
    return build_triple(boussinesq_basis)


@pytest.fixture
def silent_noise():
    return NoiseModel()


@pytest.fixture
def additive_noise():
    return NoiseModel(wiener=WienerSpec(directions=[
        WienerDirection(additive={0: 0.3}),
        WienerDirection(additive={1: 0.3}),
    ]))


@pytest.fixture
def shipped_noise():
    return NoiseModel(
        wiener=WienerSpec(directions=[
            WienerDirection(c=0.3, b=(0.3, 0.0), additive={0: 0.3, 5: 0.15}),
            WienerDirection(c=0.3, b=(0.0, 0.3), additive={1: 0.3, 9: 0.15}),
        ]),
        jumps=JumpSpec(rate=20.0, mark_scale=1.0, p_plus=0.9, y0_radius=2.0,
                       h0={0: 0.6 / 2 ** 0.5, 1: 0.6 / 2 ** 0.5, 6: 0.15, 10: 0.15}, contraction=-0.2),
    )


@pytest.fixture
def jump_only_noise():
    return NoiseModel(jumps=JumpSpec(rate=10.0, mark_scale=0.5, p_plus=0.5, y0_radius=1.0, h0={0: 0.4}))


@pytest.fixture
def short_config():
    return SimConfig(n=8, dt=1e-2, horizon=0.5, seed=7)
