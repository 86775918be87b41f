"""
Two-point kernels: logarithmic mean, entropy-conservative and upwind temporal
states, the entropy-conservative and kinetic-energy-preserving (ECKEP)
spatial flux, the entropy-stable dissipative flux, and residuals of the
entropy and kinetic-energy conditions these kernels satisfy.

Jumps are oriented as [[a]] = a₊ - a₋, where the "minus" state is the past
(or left) side and the "plus" state the future (or right) side.


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
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import systems
from .systems import SystemDescriptor, SystemId

# Threshold on ((a-b)/(a+b))² below which the series of the log mean is used
LOG_MEAN_SERIES_THRESHOLD = 1e-4


class StatePair(NamedTuple):
    """
    Two (arrays of) conserved states; left is the "-" (past) side, right the
    "+" (future) side
    """
    left: np.ndarray
    right: np.ndarray


class DissipationKind(str, Enum):
    NONE = 'none'
    RUSANOV_ENTROPY = 'rusanov-entropy'
    MATRIX = 'matrix'


class WaveDecomposition(NamedTuple):
    """
    Eigen-decomposition of the Euler flux Jacobian in one direction, with
    eigenvectors scaled such that R diag(T) Rᵀ = ∂u/∂w

    Attributes:
        R: Right eigenvectors as columns, shape (..., p, p)
        eigenvalues: Wavespeeds, shape (..., p)
        T: Scaling of the eigenvectors, shape (..., p)
    """
    R: np.ndarray
    eigenvalues: np.ndarray
    T: np.ndarray


def jump(minus, plus):
    return np.asarray(plus, dtype=float) - np.asarray(minus, dtype=float)


def average(minus, plus):
    return 0.5 * (
        np.asarray(plus, dtype=float) + np.asarray(minus, dtype=float)
    )


def log_mean(a, b):
    """
    Logarithmic mean (a - b)/(ln a - ln b), evaluated with a truncated series
    when a and b are close

    Args:
        a, b: Positive reals (or arrays of them)

    Returns:
        The logarithmic mean, a float for scalar input

    Raises:
        ValueError: In case an input is not strictly positive
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(a > 0) and np.all(b > 0)):
        raise ValueError('The logarithmic mean requires positive arguments')

    zeta = a / b
    f = (zeta - 1) / (zeta + 1)
    u = f * f
    with np.errstate(divide='ignore', invalid='ignore'):
        direct = (a - b) / (np.log(a) - np.log(b))
    series = (a + b) / (2 * (1 + u / 3 + u * u / 5 + u * u * u / 7))
    result = np.where(u < LOG_MEAN_SERIES_THRESHOLD, series, direct)
    return float(result) if result.ndim == 0 else result


def _euler_type_ec_state(
        system: SystemDescriptor, pair: StatePair
        ) -> np.ndarray:
    left = systems.primitive_variables(system, pair.left)
    right = systems.primitive_variables(system, pair.right)
    rho_ln = log_mean(left.density, right.density)
    beta_ln = log_mean(
        left.density / (2 * left.pressure),
        right.density / (2 * right.pressure),
    )
    v_avg = average(left.velocity, right.velocity)
    v_squared_avg = average(left.velocity ** 2, right.velocity ** 2)
    kinetic = np.sum(v_avg ** 2 - 0.5 * v_squared_avg, axis=-1)

    state = np.empty(np.shape(rho_ln) + (system.p,))
    state[..., 0] = rho_ln
    state[..., 1:1 + system.nvel] = np.asarray(rho_ln)[..., None] * v_avg
    energy = rho_ln / (2 * beta_ln * (system.gamma - 1)) + rho_ln * kinetic

    if system.id is SystemId.MHD:
        B_avg = average(left.magnetic, right.magnetic)
        B_squared_avg = average(left.magnetic ** 2, right.magnetic ** 2)
        energy = energy + np.sum(B_avg ** 2 - 0.5 * B_squared_avg, axis=-1)
        state[..., 5:8] = B_avg

    state[..., system.energy_index] = energy
    return state


def temporal_state_ec(system: SystemDescriptor, pair: StatePair) -> np.ndarray:
    """
    Entropy-conservative temporal state U#, satisfying
    [[w]]ᵀU# = [[Φ]] for every pair of admissible states. Symmetric in its
    arguments and consistent (U#(u, u) = u).

    Raises:
        AdmissibilityError: In case a state of the pair is not admissible
    """
    if system.id is SystemId.SW1D:
        left = systems.primitive_variables(system, pair.left)
        right = systems.primitive_variables(system, pair.right)
        h_avg = average(left.density, right.density)
        v_avg = average(left.velocity, right.velocity)
        state = np.empty(np.shape(h_avg) + (3,))
        state[..., 0] = h_avg
        state[..., 1:3] = h_avg[..., None] * v_avg
        return state
    return _euler_type_ec_state(system, pair)


def temporal_state_upwind(pair: StatePair) -> np.ndarray:
    """The upwind temporal state U* = U₋"""
    return pair.left


def flux_eckep_euler(
        system: SystemDescriptor, pair: StatePair, direction: int = 0,
        ) -> np.ndarray:
    """
    Entropy-conservative, kinetic-energy-preserving two-point flux for the
    Euler equations. Only uses arithmetic and logarithmic means.

    Raises:
        UnsupportedSystemError: For non-Euler systems
        AdmissibilityError: In case a state of the pair is not admissible
    """
    systems.require_system(system, 'flux_eckep_euler',
                           SystemId.EULER1D, SystemId.EULER3D)
    d = systems.check_direction(system, direction)
    left = systems.primitive_variables(system, pair.left)
    right = systems.primitive_variables(system, pair.right)

    rho_ln = log_mean(left.density, right.density)
    rho_p_ln = log_mean(
        left.density / left.pressure, right.density / right.pressure,
    )
    v_avg = average(left.velocity, right.velocity)
    p_avg = average(left.pressure, right.pressure)
    vd_left, vd_right = left.velocity[..., d], right.velocity[..., d]
    kinetic = 0.5 * np.sum(left.velocity * right.velocity, axis=-1)

    flux = np.empty(np.shape(rho_ln) + (system.p,))
    mass = rho_ln * v_avg[..., d]
    flux[..., 0] = mass
    flux[..., 1:1 + system.nvel] = np.asarray(mass)[..., None] * v_avg
    flux[..., 1 + d] += p_avg
    flux[..., system.energy_index] = (
        mass * (kinetic + 1 / ((system.gamma - 1) * rho_p_ln))
        + 0.5 * (left.pressure * vd_right + right.pressure * vd_left)
    )
    return flux


def wave_decomposition(
        system: SystemDescriptor, pair: StatePair, direction: int = 0,
        ) -> WaveDecomposition:
    """
    Scaled eigenvectors of the Euler flux Jacobian at averaged states: the
    logarithmic means of density and β = ρ/(2p), the arithmetic mean of
    velocity and p̂ = {{ρ}}/(2{{β}}). For identical states this is the
    decomposition of the flux Jacobian at that state.

    Columns are ordered by wavespeed: the left-running acoustic wave, the
    entropy wave, the shear waves (3D) and the right-running acoustic wave.

    Raises:
        UnsupportedSystemError: For non-Euler systems
        AdmissibilityError: In case a state of the pair is not admissible
    """
    systems.require_system(system, 'wave_decomposition',
                           SystemId.EULER1D, SystemId.EULER3D)
    d = systems.check_direction(system, direction)
    left = systems.primitive_variables(system, pair.left)
    right = systems.primitive_variables(system, pair.right)
    gamma = system.gamma
    beta_left = left.density / (2 * left.pressure)
    beta_right = right.density / (2 * right.pressure)

    rho_ln = np.asarray(log_mean(left.density, right.density))
    beta_ln = log_mean(beta_left, beta_right)
    p_hat = average(left.density, right.density) \
        / (2 * average(beta_left, beta_right))
    v_hat = average(left.velocity, right.velocity)
    v_squared = 2 * np.sum(v_hat ** 2, axis=-1) - np.sum(
        average(left.velocity ** 2, right.velocity ** 2), axis=-1)
    a_hat = np.sqrt(gamma * p_hat / rho_ln)
    h_hat = gamma / (2 * beta_ln * (gamma - 1)) + 0.5 * v_squared
    vd = v_hat[..., d]

    n, e, p = system.nvel, system.energy_index, system.p
    R = np.zeros(rho_ln.shape + (p, p))
    eigenvalues = np.empty(rho_ln.shape + (p,))
    T = np.empty(rho_ln.shape + (p,))

    for column, sign in ((0, -1), (p - 1, 1)):
        R[..., 0, column] = 1
        R[..., 1:1 + n, column] = v_hat
        R[..., 1 + d, column] += sign * a_hat
        R[..., e, column] = h_hat + sign * vd * a_hat
        eigenvalues[..., column] = vd + sign * a_hat
        T[..., column] = rho_ln / (2 * gamma)

    R[..., 0, 1] = 1
    R[..., 1:1 + n, 1] = v_hat
    R[..., e, 1] = 0.5 * v_squared
    eigenvalues[..., 1] = vd
    T[..., 1] = rho_ln * (gamma - 1) / gamma

    shear = [t for t in range(n) if t != d]
    for column, t in enumerate(shear, start=2):
        R[..., 1 + t, column] = 1
        R[..., e, column] = v_hat[..., t]
        eigenvalues[..., column] = vd
        T[..., column] = p_hat
    return WaveDecomposition(R, eigenvalues, T)


def flux_es(
        system: SystemDescriptor, pair: StatePair, direction: int = 0,
        dissipation: DissipationKind = DissipationKind.RUSANOV_ENTROPY,
        ) -> np.ndarray:
    """
    Entropy-stable surface flux F^EC - ½ D [[w]], with F^EC the ECKEP flux
    and D a positive semidefinite dissipation matrix:

    - rusanov-entropy: D = λ_max H({{u}}), with H = ∂u/∂w evaluated at the
      arithmetic mean of the conserved states and λ_max the largest
      wavespeed of the two states
    - matrix: D = R |Λ| T Rᵀ from the scaled eigenvectors of
      wave_decomposition

    [[w]]ᵀD[[w]] ≥ 0, so the dissipation never produces entropy.
    """
    flux = flux_eckep_euler(system, pair, direction)
    kind = DissipationKind(dissipation)
    if kind is DissipationKind.NONE:
        return flux

    w_jump = jump(
        systems.entropy_quantities(system, pair.left).w,
        systems.entropy_quantities(system, pair.right).w,
    )
    if kind is DissipationKind.MATRIX:
        waves = wave_decomposition(system, pair, direction)
        characteristic = np.einsum('...ij,...i->...j', waves.R, w_jump)
        dissipative = np.einsum(
            '...ij,...j->...i', waves.R,
            np.abs(waves.eigenvalues) * waves.T * characteristic,
        )
        return flux - 0.5 * dissipative

    wavespeed = np.maximum(
        systems.max_wavespeed(system, pair.left, direction),
        systems.max_wavespeed(system, pair.right, direction),
    )
    H = systems.entropy_jacobian(system, average(pair.left, pair.right))
    dissipative = np.einsum('...ij,...j->...i', H, w_jump)
    return flux - 0.5 * np.asarray(wavespeed)[..., None] * dissipative


def check_kep_temporal(
        system: SystemDescriptor, pair: StatePair, state
        ) -> np.ndarray:
    """
    Residuals U_{1+l} - {{v_l}} U_1 of the kinetic-energy conditions of a
    temporal state, one per velocity component (last axis)
    """
    left = systems.primitive_variables(system, pair.left)
    right = systems.primitive_variables(system, pair.right)
    state = np.asarray(state, dtype=float)
    v_avg = average(left.velocity, right.velocity)
    return state[..., 1:1 + system.nvel] - v_avg * state[..., 0:1]


def temporal_entropy_residual(
        system: SystemDescriptor, minus, plus, state
        ) -> np.ndarray:
    """[[w]]ᵀU - [[Φ]]; zero for entropy-conservative, ≤ 0 for stable states"""
    left = systems.entropy_quantities(system, minus)
    right = systems.entropy_quantities(system, plus)
    return np.sum(jump(left.w, right.w) * state, axis=-1) \
        - jump(left.phi, right.phi)


def spatial_entropy_residual(
        system: SystemDescriptor, minus, plus, flux, direction: int = 0,
        ) -> np.ndarray:
    """[[w]]ᵀF - [[Ψ_d]], zero for entropy-conservative fluxes"""
    d = systems.check_direction(system, direction)
    left = systems.entropy_quantities(system, minus)
    right = systems.entropy_quantities(system, plus)
    return np.sum(jump(left.w, right.w) * flux, axis=-1) \
        - jump(left.psi[..., d], right.psi[..., d])


def jameson_residuals(
        system: SystemDescriptor, minus, plus, flux, direction: int = 0,
        ) -> np.ndarray:
    """
    Residuals F_{1+l} - {{v_l}} F_1 - δ_{l,d} {{p}} of the kinetic-energy
    conditions of a spatial flux, one per velocity component (last axis)
    """
    d = systems.check_direction(system, direction)
    left = systems.primitive_variables(system, minus)
    right = systems.primitive_variables(system, plus)
    flux = np.asarray(flux, dtype=float)
    residuals = flux[..., 1:1 + system.nvel] \
        - average(left.velocity, right.velocity) * flux[..., 0:1]
    residuals[..., d] -= average(left.pressure, right.pressure)
    return residuals


def upwind_kinetic_dissipation(
        system: SystemDescriptor, minus, plus
        ) -> np.ndarray:
    """
    [[V]]ᵀU* for the upwind temporal state U* = U₋, which equals
    -½ρ₋|[[v]]|² ≤ 0
    """
    left = systems.kinetic_quantities(system, minus)
    right = systems.kinetic_quantities(system, plus)
    upwind = temporal_state_upwind(StatePair(np.asarray(minus), plus))
    return np.sum(jump(left.V, right.V) * upwind, axis=-1)


def _cancellation_scale(w_jump, values, potential_jump):
    """Magnitude of the terms of [[w]]ᵀvalues - [[potential]]"""
    scale = np.sum(np.abs(w_jump * values), axis=-1) + np.abs(potential_jump)
    return np.maximum(scale, np.finfo(float).tiny)


def condition_report(
        system: SystemDescriptor, samples: int, rng: np.random.Generator,
        ) -> dict[str, float]:
    """
    Evaluate the two-point conditions on random pairs of admissible states

    Relative residuals are scaled by the magnitude of the terms that cancel,
    Σ_c |[[w]]_c U_c| + |[[Φ]]|.

    Returns:
        'temporal_ec': Largest relative residual of [[w]]ᵀU# = [[Φ]]
        'temporal_upwind': Largest value of [[w]]ᵀU* - [[Φ]] (nonpositive)
        'theta_identity': MHD only, largest relative |θ - wᵀΥ|
        'eckep_tadmor': Euler only, largest relative residual of
            [[w]]ᵀF = [[Ψ]] over all directions
        'eckep_jameson': Euler only, largest absolute residual of the
            kinetic-energy conditions of the flux
    """
    minus = systems.sample_admissible_states(system, samples, rng)
    plus = systems.sample_admissible_states(system, samples, rng)
    pair = StatePair(minus, plus)
    left = systems.entropy_quantities(system, minus)
    right = systems.entropy_quantities(system, plus)
    w_jump = jump(left.w, right.w)
    phi_jump = jump(left.phi, right.phi)

    ec_state = temporal_state_ec(system, pair)
    residual = temporal_entropy_residual(system, minus, plus, ec_state)
    report = {
        'temporal_ec': float(np.max(
            np.abs(residual)
            / _cancellation_scale(w_jump, ec_state, phi_jump)
        )),
        'temporal_upwind': float(np.max(temporal_entropy_residual(
            system, minus, plus, temporal_state_upwind(pair),
        ))),
    }

    if system.id is SystemId.MHD:
        theta, upsilon = systems.mhd_theta_upsilon(system, minus)
        contraction = np.sum(left.w * upsilon, axis=-1)
        scale = np.maximum(
            np.sum(np.abs(left.w * upsilon), axis=-1), np.finfo(float).tiny)
        report['theta_identity'] = float(
            np.max(np.abs(theta - contraction) / scale))

    if system.is_euler:
        tadmor, jameson = 0.0, 0.0
        for d in range(system.dimensions):
            flux = flux_eckep_euler(system, pair, d)
            psi_jump = jump(left.psi[..., d], right.psi[..., d])
            tadmor = max(tadmor, float(np.max(
                np.abs(spatial_entropy_residual(
                    system, minus, plus, flux, d))
                / _cancellation_scale(w_jump, flux, psi_jump)
            )))
            jameson = max(jameson, float(np.max(np.abs(
                jameson_residuals(system, minus, plus, flux, d)
            ))))
        report['eckep_tadmor'] = tadmor
        report['eckep_jameson'] = jameson

    return report
