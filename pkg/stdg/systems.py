"""
Conservation-law systems: compressible Euler (1D and 3D), shallow water and
ideal MHD. Conserved/primitive maps, physical fluxes, entropy pairs with their
potentials, kinetic-energy variables and wavespeeds.

All kernels are vectorised over leading axes; the last axis of a state array
holds its p conserved components.


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
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import AdmissibilityError, ConfigurationError, \
    UnsupportedSystemError

ADMISSIBILITY_TOL = 1e-12


class SystemId(str, Enum):
    EULER1D = 'euler1d'
    EULER3D = 'euler3d'
    SW1D = 'sw1d'
    MHD = 'mhd'


# component count, velocity count, spatial directions
_LAYOUT = {
    SystemId.EULER1D: (3, 1, 1),
    SystemId.EULER3D: (5, 3, 3),
    SystemId.SW1D: (3, 2, 1),
    SystemId.MHD: (8, 3, 3),
}


@dataclass(frozen=True)
class SystemDescriptor:
    """
    Identifies a conservation-law system and its physical constants

    Attributes:
        id: The system
        gamma: Adiabatic constant (Euler and MHD)
        g: Gravitational constant (shallow water)
    """
    id: SystemId
    gamma: float = 1.4
    g: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, 'id', SystemId(self.id))
        except ValueError:
            raise ConfigurationError(f'Unknown system: {self.id!r}')
        if not self.gamma > 1:
            raise ConfigurationError(
                f'gamma must be larger than 1, got {self.gamma}'
            )
        if not self.g > 0:
            raise ConfigurationError(f'g must be positive, got {self.g}')

    @classmethod
    def from_configuration(
            cls, system_id: str | SystemId, configuration: dict
            ) -> 'SystemDescriptor':
        """
        Create the descriptor using the 'physics' section of a validated run
        configuration
        """
        physics = configuration['physics']
        return cls(system_id, gamma=physics['gamma'], g=physics['gravity'])

    @property
    def p(self) -> int:
        """Number of conserved components"""
        return _LAYOUT[self.id][0]

    @property
    def nvel(self) -> int:
        return _LAYOUT[self.id][1]

    @property
    def dimensions(self) -> int:
        """Number of flux directions"""
        return _LAYOUT[self.id][2]

    @property
    def is_euler(self) -> bool:
        return self.id in (SystemId.EULER1D, SystemId.EULER3D)

    @property
    def energy_index(self) -> int | None:
        if self.id is SystemId.SW1D:
            return None
        return 1 + self.nvel


class PrimitiveState(NamedTuple):
    density: np.ndarray
    velocity: np.ndarray
    pressure: np.ndarray
    magnetic: np.ndarray | None = None


class EntropyQuantities(NamedTuple):
    """
    Entropy variables w, entropy s, entropy potential phi and entropy-flux
    potentials psi (one per direction, last axis). beta and varsigma are
    None for shallow water.
    """
    w: np.ndarray
    s: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    beta: np.ndarray | None
    varsigma: np.ndarray | None


class KineticQuantities(NamedTuple):
    V: np.ndarray
    kappa: np.ndarray
    fkappa: np.ndarray


def _as_states(system: SystemDescriptor, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim == 0 or u.shape[-1] != system.p:
        raise ValueError(
            f'A {system.id.value} state has {system.p} components, got array '
            f'of shape {u.shape}'
        )
    return u


def _check_positive(quantity: str, values: np.ndarray):
    """
    Raises an AdmissibilityError for the first entry that is not larger than
    the admissibility tolerance (NaN included)
    """
    admissible = values > ADMISSIBILITY_TOL
    if np.all(admissible):
        return
    flat_index = int(np.argmin(np.ravel(admissible)))
    location = np.unravel_index(flat_index, np.shape(values))
    raise AdmissibilityError(
        quantity,
        np.ravel(values)[flat_index],
        tuple(int(i) for i in location),
    )


def check_direction(system: SystemDescriptor, direction: int) -> int:
    if system.dimensions == 1:
        return 0
    if direction not in range(system.dimensions):
        raise ValueError(
            f'Direction {direction} is not valid for {system.id.value}'
        )
    return direction


def require_system(
        system: SystemDescriptor, operation: str, *ids: SystemId,
        ):
    if system.id not in ids:
        raise UnsupportedSystemError(system.id.value, operation)


def primitive_variables(system: SystemDescriptor, u) -> PrimitiveState:
    """
    Returns density (water height for shallow water), velocity, pressure
    and, for MHD, the magnetic field of the states

    Raises:
        AdmissibilityError:
            In case a density, height or pressure is not strictly positive
    """
    u = _as_states(system, u)
    density = u[..., 0]
    _check_positive('height' if system.id is SystemId.SW1D else 'density',
                    density)
    momentum = u[..., 1:1 + system.nvel]
    velocity = momentum / density[..., None]

    if system.id is SystemId.SW1D:
        return PrimitiveState(density, velocity, 0.5 * system.g * density ** 2)

    kinetic = 0.5 * np.sum(momentum * velocity, axis=-1)
    internal = u[..., system.energy_index] - kinetic
    magnetic = None
    if system.id is SystemId.MHD:
        magnetic = u[..., 5:8]
        internal = internal - 0.5 * np.sum(magnetic ** 2, axis=-1)
    pressure = (system.gamma - 1) * internal
    _check_positive('pressure', pressure)

    return PrimitiveState(density, velocity, pressure, magnetic)


def conserved_variables(
        system: SystemDescriptor, density, velocity, pressure=None,
        magnetic=None,
        ) -> np.ndarray:
    """
    Map primitive variables to conserved variables (inverse of
    primitive_variables). The pressure is ignored for shallow water, the
    magnetic field defaults to zero for MHD.
    """
    density = np.asarray(density, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    if system.nvel == 1 and velocity.ndim == density.ndim:
        velocity = velocity[..., None]
    shape = np.broadcast_shapes(density.shape, velocity.shape[:-1])

    u = np.empty(shape + (system.p,))
    u[..., 0] = density
    u[..., 1:1 + system.nvel] = density[..., None] * velocity
    if system.id is SystemId.SW1D:
        return u

    energy = np.asarray(pressure, dtype=float) / (system.gamma - 1) \
        + 0.5 * density * np.sum(velocity ** 2, axis=-1)
    if system.id is SystemId.MHD:
        if magnetic is None:
            magnetic = np.zeros(shape + (3,))
        magnetic = np.asarray(magnetic, dtype=float)
        energy = energy + 0.5 * np.sum(magnetic ** 2, axis=-1)
        u[..., 5:8] = magnetic
    u[..., system.energy_index] = energy
    return u


def physical_flux(system: SystemDescriptor, u, direction: int = 0):
    """
    Returns the physical flux of the states in the given direction (ignored
    for the 1D systems)

    Raises:
        AdmissibilityError: In case a state is not admissible
    """
    u = _as_states(system, u)
    d = check_direction(system, direction)
    prim = primitive_variables(system, u)
    rho, v, p = prim.density, prim.velocity, prim.pressure
    vd = v[..., d]
    flux = np.empty_like(u)

    if system.id is SystemId.SW1D:
        flux[..., 0] = u[..., 1]
        flux[..., 1] = u[..., 1] * vd + p
        flux[..., 2] = u[..., 1] * v[..., 1]
        return flux

    total_pressure = p
    energy = u[..., system.energy_index]
    if system.id is SystemId.MHD:
        B = prim.magnetic
        total_pressure = p + 0.5 * np.sum(B ** 2, axis=-1)

    flux[..., 0] = rho * vd
    flux[..., 1:1 + system.nvel] = (rho * vd)[..., None] * v
    flux[..., 1 + d] += total_pressure
    flux[..., system.energy_index] = vd * (energy + total_pressure)

    if system.id is SystemId.MHD:
        Bd = B[..., d]
        flux[..., 1:4] -= Bd[..., None] * B
        flux[..., 4] -= Bd * np.sum(v * B, axis=-1)
        flux[..., 5:8] = vd[..., None] * B - Bd[..., None] * v
    return flux


def entropy_quantities(system: SystemDescriptor, u) -> EntropyQuantities:
    """
    Returns the entropy variables, entropy, and entropy potentials of the
    states

    For Euler and MHD, β = ρ/(2p), ς = ln p - γ ln ρ and s = -ρς/(γ-1).
    For shallow water, s is the total energy ½h|v|² + ½gh².

    Raises:
        AdmissibilityError: In case a state is not admissible
    """
    u = _as_states(system, u)
    prim = primitive_variables(system, u)
    rho, v, p = prim.density, prim.velocity, prim.pressure
    v_squared = np.sum(v ** 2, axis=-1)
    w = np.empty_like(u)

    if system.id is SystemId.SW1D:
        g = system.g
        w[..., 0] = g * rho - 0.5 * v_squared
        w[..., 1:3] = v
        s = 0.5 * rho * v_squared + 0.5 * g * rho ** 2
        phi = 0.5 * g * rho ** 2
        psi = (phi * v[..., 0])[..., None]
        return EntropyQuantities(w, s, phi, psi, None, None)

    gamma = system.gamma
    beta = rho / (2 * p)
    varsigma = np.log(p) - gamma * np.log(rho)
    s = -rho * varsigma / (gamma - 1)

    w[..., 0] = (gamma - varsigma) / (gamma - 1) - beta * v_squared
    w[..., 1:1 + system.nvel] = 2 * beta[..., None] * v
    w[..., system.energy_index] = -2 * beta
    phi = rho.copy()
    psi = rho[..., None] * v

    if system.id is SystemId.MHD:
        B_squared = np.sum(prim.magnetic ** 2, axis=-1)
        w[..., 5:8] = 2 * beta[..., None] * prim.magnetic
        phi = phi + beta * B_squared
        psi = psi + (beta * B_squared)[..., None] * v

    return EntropyQuantities(w, s, phi, psi, beta, varsigma)


def entropy_flux(system: SystemDescriptor, u, direction: int = 0):
    """Returns the entropy flux f^s of the states in the given direction"""
    d = check_direction(system, direction)
    quantities = entropy_quantities(system, u)
    prim = primitive_variables(system, u)
    vd = prim.velocity[..., d]
    if system.id is SystemId.SW1D:
        return (quantities.s + prim.pressure) * vd
    return quantities.s * vd


def max_wavespeed(system: SystemDescriptor, u, direction: int = 0):
    """
    Returns the largest absolute characteristic speed |v| + c, where c is the
    sound speed (Euler), the gravity wave speed (shallow water) or the fast
    magnetosonic speed in the given direction (MHD)
    """
    d = check_direction(system, direction)
    prim = primitive_variables(system, u)
    rho = prim.density
    speed = np.sqrt(np.sum(prim.velocity ** 2, axis=-1))

    if system.id is SystemId.SW1D:
        return speed + np.sqrt(system.g * rho)

    a_squared = system.gamma * prim.pressure / rho
    if system.id is not SystemId.MHD:
        return speed + np.sqrt(a_squared)

    b_squared = np.sum(prim.magnetic ** 2, axis=-1) / rho
    bd_squared = prim.magnetic[..., d] ** 2 / rho
    total = a_squared + b_squared
    discriminant = np.maximum(total ** 2 - 4 * a_squared * bd_squared, 0.0)
    fast = np.sqrt(0.5 * (total + np.sqrt(discriminant)))
    return speed + fast


def kinetic_quantities(system: SystemDescriptor, u) -> KineticQuantities:
    """
    Returns the kinetic-energy variables V = (-½|v|², v, 0), the kinetic
    energy κ = Vᵀu and its flux (one per direction, last axis)

    Raises:
        UnsupportedSystemError: In case the system is not an Euler system
    """
    require_system(system, 'kinetic_quantities',
                   SystemId.EULER1D, SystemId.EULER3D)
    u = _as_states(system, u)
    prim = primitive_variables(system, u)
    v = prim.velocity
    v_squared = np.sum(v ** 2, axis=-1)

    V = np.zeros_like(u)
    V[..., 0] = -0.5 * v_squared
    V[..., 1:1 + system.nvel] = v
    kappa = 0.5 * prim.density * v_squared
    fkappa = kappa[..., None] * v
    return KineticQuantities(V, kappa, fkappa)


def mhd_theta_upsilon(
        system: SystemDescriptor, u
        ) -> tuple[np.ndarray, np.ndarray]:
    """
    Returns θ = 2β(v·B) and the nonconservative column Υ = (0, B, v·B, v) of
    the MHD states, with θ = wᵀΥ
    """
    require_system(system, 'mhd_theta_upsilon', SystemId.MHD)
    u = _as_states(system, u)
    prim = primitive_variables(system, u)
    B = prim.magnetic
    v_dot_B = np.sum(prim.velocity * B, axis=-1)
    beta = prim.density / (2 * prim.pressure)

    upsilon = np.zeros_like(u)
    upsilon[..., 1:4] = B
    upsilon[..., 4] = v_dot_B
    upsilon[..., 5:8] = prim.velocity
    return 2 * beta * v_dot_B, upsilon


def entropy_jacobian(system: SystemDescriptor, u) -> np.ndarray:
    """
    Returns H = ∂u/∂w at the states, a symmetric positive definite matrix
    per state (trailing axes (p, p))

    Raises:
        UnsupportedSystemError: For MHD
    """
    require_system(system, 'entropy_jacobian',
                   SystemId.EULER1D, SystemId.EULER3D, SystemId.SW1D)
    u = _as_states(system, u)
    prim = primitive_variables(system, u)
    rho, v, p = prim.density, prim.velocity, prim.pressure
    n = system.nvel
    H = np.empty(u.shape + (system.p,))
    eye = np.eye(n)

    if system.id is SystemId.SW1D:
        g = system.g
        H[..., 0, 0] = 1.0
        H[..., 0, 1:] = v
        H[..., 1:, 0] = v
        H[..., 1:, 1:] = v[..., :, None] * v[..., None, :] \
            + (g * rho)[..., None, None] * eye
        return H / g

    gamma = system.gamma
    energy = u[..., system.energy_index]
    enthalpy = (energy + p) / rho
    a_squared = gamma * p / rho
    e = system.energy_index

    H[..., 0, 0] = rho
    H[..., 0, 1:e] = rho[..., None] * v
    H[..., 1:e, 0] = rho[..., None] * v
    H[..., 0, e] = energy
    H[..., e, 0] = energy
    H[..., 1:e, 1:e] = rho[..., None, None] * v[..., :, None] \
        * v[..., None, :] + p[..., None, None] * eye
    H[..., 1:e, e] = (energy + p)[..., None] * v
    H[..., e, 1:e] = (energy + p)[..., None] * v
    H[..., e, e] = rho * enthalpy ** 2 - a_squared * p / (gamma - 1)
    return H


def sample_admissible_states(
        system: SystemDescriptor, n: int, rng: np.random.Generator,
        ) -> np.ndarray:
    """
    Draw n random admissible states: density, height and pressure uniform in
    [0.1, 10], velocities in [-5, 5], magnetic field in [-3, 3]
    """
    density = rng.uniform(0.1, 10.0, n)
    velocity = rng.uniform(-5.0, 5.0, (n, system.nvel))
    pressure = rng.uniform(0.1, 10.0, n)
    magnetic = None
    if system.id is SystemId.MHD:
        magnetic = rng.uniform(-3.0, 3.0, (n, 3))
    return conserved_variables(system, density, velocity, pressure, magnetic)
