"""
Tests for the stdg.two_point module: algebra of the means, and the entropy
and kinetic-energy conditions of the two-point states and fluxes on random
admissible states


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
import math

from hypothesis import given, strategies as st
import numpy as np
import pytest
import tools

from stdg import errors, systems, two_point
from stdg.systems import SystemDescriptor, SystemId
from stdg.two_point import DissipationKind, StatePair

FUZZ_PAIRS = 10000
ALL_SYSTEMS = [SystemDescriptor(system_id) for system_id in SystemId]
EULER_SYSTEMS = [SystemDescriptor('euler1d'), SystemDescriptor('euler3d')]

positive = st.floats(min_value=1e-3, max_value=1e3)
finite = st.floats(min_value=-1e3, max_value=1e3)


def _ids(system):
    return system.id.value


class TestMeans:
    """Algebraic properties of jumps, averages and the logarithmic mean"""

    @given(positive, positive)
    def test_log_mean_symmetric_and_bounded(self, a, b):
        value = two_point.log_mean(a, b)
        assert value == pytest.approx(two_point.log_mean(b, a), rel=1e-14)
        assert math.sqrt(a * b) * (1 - 1e-13) <= value
        assert value <= 0.5 * (a + b) * (1 + 1e-13)

    @given(positive)
    def test_log_mean_consistent(self, a):
        assert two_point.log_mean(a, a) == pytest.approx(a, rel=1e-15)

    @given(positive, st.floats(min_value=1e-9, max_value=0.2))
    def test_log_mean_accurate_near_diagonal(self, a, relative):
        """Series and direct evaluation agree where both are accurate"""
        b = a * (1 + relative)
        reference = a * relative / math.log1p(relative)
        assert two_point.log_mean(a, b) == pytest.approx(
            reference, rel=1e-12)

    @given(finite, finite, finite, finite)
    def test_jump_product_rule(self, a1, a2, b1, b2):
        """[[ab]] = {{a}}[[b]] + [[a]]{{b}}"""
        lhs = two_point.jump(a1 * b1, a2 * b2)
        rhs = two_point.average(a1, a2) * two_point.jump(b1, b2) \
            + two_point.jump(a1, a2) * two_point.average(b1, b2)
        assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(lhs)))

    @given(finite, finite)
    def test_jump_antisymmetric(self, a, b):
        assert two_point.jump(a, b) == -two_point.jump(b, a)
        assert two_point.average(a, b) == two_point.average(b, a)


@pytest.mark.parametrize('a, b', [(0.0, 1.0), (1.0, -2.0), (np.nan, 1.0)])
def test_log_mean_rejects_nonpositive(a, b):
    """
    The logarithmic mean is only defined for positive arguments
    """
    with pytest.raises(ValueError):
        two_point.log_mean(a, b)


def test_log_mean_vectorised():
    """
    Array input gives array output; the series branch is selected per entry
    """
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([1.0 + 1e-9, 8.0, 3.0])
    result = two_point.log_mean(a, b)
    assert result.shape == (3,)
    assert result[1] == pytest.approx(6.0 / math.log(4.0), rel=1e-14)
    assert result[2] == 3.0


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_condition_report(system):
    """
    The entropy-conservative temporal state, the upwind state and (for
    Euler) the ECKEP flux must satisfy their conditions on 10^4 random pairs
    """
    report = two_point.condition_report(system, FUZZ_PAIRS, tools.rng())
    assert report['temporal_ec'] <= 1e-11
    assert report['temporal_upwind'] <= 1e-12
    if system.id is SystemId.MHD:
        assert report['theta_identity'] <= 1e-11
    if system.is_euler:
        assert report['eckep_tadmor'] <= 1e-11
        assert report['eckep_jameson'] <= 1e-12
    else:
        assert 'eckep_tadmor' not in report


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_temporal_state_consistent_and_symmetric(system):
    """
    U#(u, u) = u and U#(a, b) = U#(b, a)
    """
    minus, plus = tools.random_pairs(system, 200, 1)
    same = two_point.temporal_state_ec(system, StatePair(minus, minus))
    assert np.allclose(same, minus, rtol=1e-13, atol=1e-13)
    forward = two_point.temporal_state_ec(system, StatePair(minus, plus))
    backward = two_point.temporal_state_ec(system, StatePair(plus, minus))
    assert np.allclose(forward, backward, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_temporal_state_kinetic_energy_conditions(system):
    """
    The momenta of the EC temporal state are {{v}} times its density
    """
    minus, plus = tools.random_pairs(system, 1000, 2)
    pair = StatePair(minus, plus)
    state = two_point.temporal_state_ec(system, pair)
    residuals = two_point.check_kep_temporal(system, pair, state)
    assert np.max(np.abs(residuals)) <= 1e-12


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_eckep_flux_consistent_and_symmetric(system):
    """
    F#(u, u) = f(u) and F#(a, b) = F#(b, a) in every direction
    """
    minus, plus = tools.random_pairs(system, 200, 3)
    for d in range(system.dimensions):
        same = two_point.flux_eckep_euler(system, StatePair(minus, minus), d)
        assert np.allclose(
            same, systems.physical_flux(system, minus, d),
            rtol=1e-13, atol=1e-12,
        )
        forward = two_point.flux_eckep_euler(
            system, StatePair(minus, plus), d)
        backward = two_point.flux_eckep_euler(
            system, StatePair(plus, minus), d)
        assert np.allclose(forward, backward, rtol=1e-14, atol=1e-13)


@pytest.mark.parametrize('dissipation', [
    DissipationKind.RUSANOV_ENTROPY, DissipationKind.MATRIX])
@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_entropy_stable_flux(system, dissipation):
    """
    The dissipative flux produces entropy: [[w]]ᵀF - [[Ψ]] ≤ 0, with equality
    (up to round-off) for identical states
    """
    minus, plus = tools.random_pairs(system, 2000, 4)
    pair = StatePair(minus, plus)
    left = systems.entropy_quantities(system, minus)
    right = systems.entropy_quantities(system, plus)
    w_jump = two_point.jump(left.w, right.w)
    for d in range(system.dimensions):
        flux = two_point.flux_es(system, pair, d, dissipation)
        residual = two_point.spatial_entropy_residual(
            system, minus, plus, flux, d)
        scale = np.sum(np.abs(w_jump * flux), axis=-1) \
            + np.abs(two_point.jump(left.psi[..., d], right.psi[..., d]))
        assert np.all(residual <= 1e-11 * scale)

        same = two_point.flux_es(
            system, StatePair(minus, minus), d, dissipation)
        assert np.allclose(
            same, systems.physical_flux(system, minus, d),
            rtol=1e-12, atol=1e-11,
        )


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_wave_decomposition_of_one_state(system):
    """
    For identical states the scaled eigenvectors give R diag(T) Rᵀ = ∂u/∂w,
    and R diag(λ) R⁻¹ is the flux Jacobian
    """
    states, _ = tools.random_pairs(system, 20, 9)
    H = systems.entropy_jacobian(system, states)
    step = 1e-6
    for d in range(system.dimensions):
        waves = two_point.wave_decomposition(
            system, StatePair(states, states), d)
        symmetric = np.einsum(
            '...ik,...k,...jk->...ij', waves.R, waves.T, waves.R)
        assert np.allclose(symmetric, H, rtol=1e-12, atol=1e-11)

        A = np.einsum(
            '...ik,...k,...kj->...ij', waves.R, waves.eigenvalues,
            np.linalg.inv(waves.R),
        )
        for c in range(system.p):
            shift = np.zeros(system.p)
            shift[c] = step
            column = (
                systems.physical_flux(system, states + shift, d)
                - systems.physical_flux(system, states - shift, d)
            ) / (2 * step)
            assert np.allclose(A[..., c], column, rtol=1e-5, atol=1e-6)


def test_matrix_dissipation_vanishes_for_entropy_wave():
    """
    Across a contact at rest the matrix dissipation only acts through the
    entropy wave, whose speed is zero, so the flux is the ECKEP flux
    """
    system = SystemDescriptor('euler1d')
    pair = StatePair(np.array([1.0, 0.0, 2.5]), np.array([0.5, 0.0, 2.5]))
    assert two_point.flux_es(
        system, pair, 0, DissipationKind.MATRIX,
    ) == pytest.approx(two_point.flux_eckep_euler(system, pair), abs=1e-13)


def test_flux_without_dissipation():
    """
    Without dissipation the entropy-stable flux is the ECKEP flux
    """
    system = SystemDescriptor('euler1d')
    minus, plus = tools.random_pairs(system, 50, 5)
    pair = StatePair(minus, plus)
    assert np.array_equal(
        two_point.flux_es(system, pair, 0, DissipationKind.NONE),
        two_point.flux_eckep_euler(system, pair),
    )


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_jameson_residuals(system):
    """
    The physical flux of one state and the ECKEP flux of two states satisfy
    the kinetic-energy relations in every direction
    """
    minus, plus = tools.random_pairs(system, 500, 7)
    for d in range(system.dimensions):
        physical = systems.physical_flux(system, minus, d)
        residuals = two_point.jameson_residuals(
            system, minus, minus, physical, d)
        assert residuals.shape == (500, system.nvel)
        assert np.allclose(residuals, 0.0, atol=1e-11)

        flux = two_point.flux_eckep_euler(system, StatePair(minus, plus), d)
        residuals = two_point.jameson_residuals(system, minus, plus, flux, d)
        assert np.max(np.abs(residuals)) <= 1e-12 * np.max(np.abs(flux))


@pytest.mark.parametrize('system', ALL_SYSTEMS, ids=_ids)
def test_temporal_entropy_residual(system):
    """
    The EC state conserves entropy across a time interface, the upwind state
    dissipates it
    """
    minus, plus = tools.random_pairs(system, 1000, 8)
    pair = StatePair(minus, plus)
    left = systems.entropy_quantities(system, minus)
    right = systems.entropy_quantities(system, plus)
    w_jump = two_point.jump(left.w, right.w)
    for state in (two_point.temporal_state_ec(system, pair),
                  two_point.temporal_state_upwind(pair)):
        residual = two_point.temporal_entropy_residual(
            system, minus, plus, state)
        scale = np.sum(np.abs(w_jump * state), axis=-1) \
            + np.abs(two_point.jump(left.phi, right.phi))
        assert np.all(residual <= 1e-11 * scale)

    ec = two_point.temporal_state_ec(system, pair)
    residual = two_point.temporal_entropy_residual(system, minus, plus, ec)
    assert np.all(np.abs(residual) <= 1e-11 * (
        np.sum(np.abs(w_jump * ec), axis=-1)
        + np.abs(two_point.jump(left.phi, right.phi))
    ))


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_upwind_kinetic_dissipation(system):
    """
    [[V]]ᵀU₋ = -½ρ₋|[[v]]|², so the upwind state dissipates kinetic energy
    """
    minus, plus = tools.random_pairs(system, 1000, 6)
    value = two_point.upwind_kinetic_dissipation(system, minus, plus)
    left = systems.primitive_variables(system, minus)
    right = systems.primitive_variables(system, plus)
    v_jump = two_point.jump(left.velocity, right.velocity)
    expected = -0.5 * left.density * np.sum(v_jump ** 2, axis=-1)
    assert np.allclose(value, expected, rtol=1e-11, atol=1e-11)
    assert np.all(value <= 1e-12)


def test_upwind_state():
    """
    The upwind temporal state is the past state
    """
    minus = np.array([1.0, 0.5, 3.0])
    plus = np.array([2.0, 0.0, 4.0])
    assert two_point.temporal_state_upwind(StatePair(minus, plus)) is minus


def test_eckep_unsupported_systems():
    """
    The ECKEP flux is only defined for the Euler equations
    """
    system = SystemDescriptor('sw1d')
    state = np.array([1.0, 0.5, 0.0])
    with pytest.raises(errors.UnsupportedSystemError):
        two_point.flux_eckep_euler(system, StatePair(state, state))


def test_inadmissible_pair():
    """
    A pair with an inadmissible state is rejected
    """
    system = SystemDescriptor('euler1d')
    good = np.array([1.0, 0.0, 2.5])
    bad = np.array([1.0, 0.0, -2.5])
    with pytest.raises(errors.AdmissibilityError):
        two_point.temporal_state_ec(system, StatePair(good, bad))


@pytest.mark.parametrize('system', EULER_SYSTEMS, ids=_ids)
def test_entropy_conservation_relative_to_potential_jump(system):
    """
    Where the densities differ by at least 3, the entropy conservation
    residual is small relative to |[[Φ]]| = |[[ρ]]| alone
    """
    minus, plus = tools.random_pairs(system, 2000, 10)
    separated = np.abs(plus[:, 0] - minus[:, 0]) >= 3.0
    minus, plus = minus[separated], plus[separated]
    state = two_point.temporal_state_ec(system, StatePair(minus, plus))
    residual = two_point.temporal_entropy_residual(system, minus, plus, state)
    assert np.all(np.abs(residual) <= 1e-11 * np.abs(plus[:, 0] - minus[:, 0]))
