"""
Problem definitions for the compressible Euler equations in 1D: a
manufactured solution with its source term, a discontinuous entropy test,
an advected density wave and a uniform state.


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
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .systems import SystemDescriptor, SystemId, conserved_variables

# Position of the discontinuity of the shock problem
SHOCK_POSITION = 0.3


@dataclass(frozen=True)
class ProblemSpec:
    """
    An initial value problem on a periodic domain

    The callables are vectorised: x and t broadcast against each other and
    the returned states have a trailing component axis.

    Attributes:
        name: Registry name of the problem
        system: The conservation law
        initial: x -> u(x, 0)
        exact: (x, t) -> u(x, t), if known
        source: (x, t) -> Q(x, t), if the equations carry a source
        domain: Spatial domain
        T_final: Default final time
    """
    name: str
    system: SystemDescriptor
    initial: Callable[[np.ndarray], np.ndarray]
    exact: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    source: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    domain: tuple[float, float] = (0.0, 1.0)
    T_final: float = 1.0


def _wave(x, t):
    return 2 + np.sin(2 * np.pi * (np.asarray(x) - np.asarray(t)))


def manufactured_euler(gamma: float = 1.4) -> ProblemSpec:
    """
    ρ = ρv = 2 + sin(2π(x-t)), E = ρ², which solves the Euler equations with
    the source Q = (0, q, q), q = ∂p/∂x = π(γ-1)(4ρ-1)cos(2π(x-t))
    """
    system = SystemDescriptor(SystemId.EULER1D, gamma=gamma)

    def exact(x, t):
        rho = _wave(x, t)
        return np.stack([rho, rho, rho ** 2], axis=-1)

    def source(x, t):
        rho = _wave(x, t)
        phase = 2 * np.pi * (np.asarray(x) - np.asarray(t))
        q = np.pi * (gamma - 1) * (4 * rho - 1) * np.cos(phase)
        return np.stack([np.zeros_like(q), q, q], axis=-1)

    return ProblemSpec(
        name='manufactured',
        system=system,
        initial=lambda x: exact(x, 0.0),
        exact=exact,
        source=source,
    )


def shock_euler(gamma: float = 1.4) -> ProblemSpec:
    """
    Fluid at rest with a density and pressure jump at x = 0.3; points on the
    discontinuity take the left state
    """
    system = SystemDescriptor(SystemId.EULER1D, gamma=gamma)

    def initial(x):
        x = np.asarray(x, dtype=float)
        left = x <= SHOCK_POSITION
        return conserved_variables(
            system,
            np.where(left, 1.0, 1.125),
            np.zeros_like(x),
            np.where(left, 1.0, 1.1),
        )

    return ProblemSpec(name='shock', system=system, initial=initial)


def density_wave_euler(gamma: float = 1.4) -> ProblemSpec:
    """ρ = 2 + sin(2π(x-t)) advected with v = 1 at constant pressure p = 1"""
    system = SystemDescriptor(SystemId.EULER1D, gamma=gamma)

    def exact(x, t):
        rho = _wave(x, t)
        return conserved_variables(
            system, rho, np.ones_like(rho), np.ones_like(rho),
        )

    return ProblemSpec(
        name='density-wave',
        system=system,
        initial=lambda x: exact(x, 0.0),
        exact=exact,
    )


def uniform_euler(
        rho: float = 1.0, v: float = 0.0, p: float = 1.0, gamma: float = 1.4,
        ) -> ProblemSpec:
    """A constant state, which is also the exact solution"""
    system = SystemDescriptor(SystemId.EULER1D, gamma=gamma)
    state = conserved_variables(system, rho, v, p)

    def exact(x, t):
        shape = np.broadcast_shapes(np.shape(x), np.shape(t))
        return np.broadcast_to(state, shape + state.shape).copy()

    return ProblemSpec(
        name='uniform',
        system=system,
        initial=lambda x: exact(x, 0.0),
        exact=exact,
    )


PROBLEMS = {
    'manufactured': manufactured_euler,
    'shock': shock_euler,
    'density-wave': density_wave_euler,
    'uniform': uniform_euler,
}


def get_problem(name: str, gamma: float = 1.4) -> ProblemSpec:
    """
    Returns the registered problem

    Raises:
        ConfigurationError: In case no problem of the name exists
    """
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ConfigurationError(
            f'Unknown problem {name!r}, choose from {sorted(PROBLEMS)}'
        )
    return factory(gamma=gamma)
