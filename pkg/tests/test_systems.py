"""
Tests for the stdg.systems module


Copyright 2024 stdg contributors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""
import numpy as np
import pytest
import tools

from stdg import errors, systems
from stdg.systems import SystemDescriptor, SystemId

ALL_SYSTEMS = [SystemDescriptor(system_id) for system_id in SystemId]
EULER_SYSTEMS = [SystemDescriptor('euler1d'), SystemDescriptor('euler3d')]


def _ids(system):
    return system.id.value


def _moderate_states(system, n, offset=0):
    """Admissible states of moderate magnitude, for finite differences"""
    generator = tools.rng(offset)
    magnetic = None
    if system.id is SystemId.MHD:
        magnetic = generator.uniform(-1.0, 1.0, (n, 3))
    return systems.conserved_variables(
        system,
        generator.uniform(0.5, 2.0, n),
        generator.uniform(-1.0, 1.0, (n, system.nvel)),
        generator.uniform(0.5, 2.0, n),
        magnetic,
    )


def _entropy_gradient(system, states, h=1e-6):
    """Central-difference gradient of the entropy"""
    columns = []
    for j in range(system.p):
        step = np.zeros_like(states)
        step[..., j] = h
        plus = systems.entropy_quantities(system, states + step).s
        minus = systems.entropy_quantities(system, states - step).s
        columns.append((plus - minus) / (2 * h))
    return np.stack(columns, axis=-1)


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_primitive_round_trip(system):
    """
    conserved_variables must invert primitive_variables
    """
    states = systems.sample_admissible_states(system, 50, tools.rng())
    prim = systems.primitive_variables(system, states)
    rebuilt = systems.conserved_variables(
        system, prim.density, prim.velocity, prim.pressure, prim.magnetic,
    )
    assert np.allclose(rebuilt, states, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_entropy_variables_are_gradient(system):
    """
    The entropy variables must be the gradient of the entropy with respect to
    the conserved variables
    """
    states = _moderate_states(system, 20, 1)
    gradient = _entropy_gradient(system, states)
    w = systems.entropy_quantities(system, states).w
    assert np.allclose(gradient, w, rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_entropy_potentials(system):
    """
    Φ = wᵀu - s and Ψ_d = wᵀf_d - f^s_d (+ θB_d for MHD)
    """
    states = systems.sample_admissible_states(system, 100, tools.rng(2))
    quantities = systems.entropy_quantities(system, states)
    w = quantities.w
    phi = np.sum(w * states, axis=-1) - quantities.s
    assert np.allclose(quantities.phi, phi, rtol=1e-12, atol=1e-10)

    theta = None
    if system.id is SystemId.MHD:
        theta, _ = systems.mhd_theta_upsilon(system, states)
    for d in range(system.dimensions):
        flux = systems.physical_flux(system, states, d)
        psi = np.sum(w * flux, axis=-1) \
            - systems.entropy_flux(system, states, d)
        if theta is not None:
            psi = psi + theta * states[..., 5 + d]
        assert np.allclose(
            quantities.psi[..., d], psi, rtol=1e-11, atol=1e-9)


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_kinetic_quantities(system):
    """
    κ = Vᵀu = ½ρ|v|² and its flux is κv
    """
    states = systems.sample_admissible_states(system, 100, tools.rng(3))
    prim = systems.primitive_variables(system, states)
    kinetic = systems.kinetic_quantities(system, states)
    expected = 0.5 * prim.density * np.sum(prim.velocity ** 2, axis=-1)
    assert np.allclose(kinetic.kappa, expected, rtol=1e-13)
    assert np.allclose(
        np.sum(kinetic.V * states, axis=-1), expected, rtol=1e-12)
    assert np.allclose(
        kinetic.fkappa, expected[..., None] * prim.velocity, rtol=1e-13)


def test_mhd_theta_identity():
    """
    θ = wᵀΥ for MHD states
    """
    system = SystemDescriptor('mhd')
    states = systems.sample_admissible_states(system, 100, tools.rng(4))
    theta, upsilon = systems.mhd_theta_upsilon(system, states)
    w = systems.entropy_quantities(system, states).w
    assert np.allclose(theta, np.sum(w * upsilon, axis=-1), atol=1e-11)


@pytest.mark.parametrize(
    'system', EULER_SYSTEMS + [SystemDescriptor('sw1d')], ids=_ids,
)
def test_entropy_jacobian(system):
    """
    H = ∂u/∂w must be symmetric positive definite and invert ∂w/∂u
    """
    states = _moderate_states(system, 20, 5)
    H = systems.entropy_jacobian(system, states)
    assert np.allclose(H, np.swapaxes(H, -1, -2), rtol=1e-14)
    assert np.all(np.linalg.eigvalsh(H) > 0)

    dw_du = np.stack([
        _column(system, states, j) for j in range(system.p)
    ], axis=-1)
    identity = np.broadcast_to(np.eye(system.p), H.shape)
    assert np.allclose(H @ dw_du, identity, atol=1e-6)


def _column(system, states, j, h=1e-6):
    step = np.zeros_like(states)
    step[..., j] = h
    plus = systems.entropy_quantities(system, states + step).w
    minus = systems.entropy_quantities(system, states - step).w
    return (plus - minus) / (2 * h)


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_fluxes_of_state_at_rest(system):
    """
    A state at rest only carries a pressure flux
    """
    state = systems.conserved_variables(
        system, 2.0, np.zeros(system.nvel), 3.0,
    )
    flux = systems.physical_flux(system, state)
    pressure = systems.primitive_variables(system, state).pressure
    expected = np.zeros(system.p)
    expected[1] = pressure
    assert np.allclose(flux, expected, atol=1e-15)
    assert systems.entropy_flux(system, state) == pytest.approx(0.0)


def test_max_wavespeed_euler():
    """
    The wavespeed of Euler states is |v| + sqrt(γp/ρ)
    """
    system = SystemDescriptor('euler1d')
    state = systems.conserved_variables(system, 1.4, -2.0, 1.0)
    assert systems.max_wavespeed(system, state) == pytest.approx(3.0)


def test_max_wavespeed_mhd_without_field():
    """
    Without a magnetic field the fast speed is the sound speed
    """
    system = SystemDescriptor('mhd')
    state = systems.conserved_variables(
        system, 1.4, np.array([0.0, 3.0, 4.0]), 1.0,
    )
    assert systems.max_wavespeed(system, state, 2) == pytest.approx(6.0)


@pytest.mark.parametrize('pressure', [-1.0, 0.0, np.nan])
def test_inadmissible_pressure(pressure):
    """
    Nonpositive (or NaN) pressures raise an AdmissibilityError locating the
    first offending state
    """
    system = SystemDescriptor('euler1d')
    states = systems.conserved_variables(
        system, np.ones(4), np.zeros(4), np.array([1.0, 1.0, pressure, 1.0]),
    )
    with pytest.raises(errors.AdmissibilityError) as info:
        systems.entropy_quantities(system, states)
    assert info.value.quantity == 'pressure'
    assert info.value.location == (2,)


def test_inadmissible_height():
    """
    Shallow water states with a negative height are inadmissible
    """
    system = SystemDescriptor('sw1d')
    with pytest.raises(errors.AdmissibilityError) as info:
        systems.primitive_variables(system, [-0.5, 0.0, 0.0])
    assert info.value.quantity == 'height'


def test_unsupported_kernels():
    """
    Kernels that a system does not define raise UnsupportedSystemError
    """
    with pytest.raises(errors.UnsupportedSystemError):
        systems.kinetic_quantities(SystemDescriptor('sw1d'), [1.0, 0.0, 0.0])
    with pytest.raises(errors.UnsupportedSystemError):
        systems.entropy_jacobian(
            SystemDescriptor('mhd'),
            systems.conserved_variables(
                SystemDescriptor('mhd'), 1.0, np.zeros(3), 1.0),
        )
    with pytest.raises(errors.UnsupportedSystemError):
        systems.mhd_theta_upsilon(
            SystemDescriptor('euler1d'), [1.0, 0.0, 2.5])


def test_invalid_arguments():
    """
    Malformed descriptors, shapes and directions are rejected
    """
    with pytest.raises(errors.ConfigurationError):
        SystemDescriptor('euler2d')
    with pytest.raises(errors.ConfigurationError):
        SystemDescriptor('euler1d', gamma=1.0)
    with pytest.raises(errors.ConfigurationError):
        SystemDescriptor('sw1d', g=0.0)
    with pytest.raises(ValueError):
        systems.primitive_variables(SystemDescriptor('euler1d'), [1.0, 0.0])
    with pytest.raises(ValueError):
        systems.physical_flux(
            SystemDescriptor('euler3d'), [1.0, 0.0, 0.0, 0.0, 2.5], 3)


def test_descriptor_from_configuration():
    """
    Physical constants are taken from the 'physics' section
    """
    configuration = {'physics': {'gamma': 5 / 3, 'gravity': 9.81}}
    system = SystemDescriptor.from_configuration('sw1d', configuration)
    assert system.id is SystemId.SW1D
    assert system.g == 9.81
    assert system.energy_index is None
    assert SystemDescriptor('mhd').p == 8
