"""
Space-time DGSEM on a periodic 1D mesh: assembly of the nodal residual of the
slab equations and their implicit solution by damped Newton iteration.

Nodal data of a block of S consecutive slabs is stored in arrays of shape
(S, M+1, K_S, N+1, p): slab, temporal node, element, spatial node, component.
The residual has the same shape; its rows carry the quadrature weights
(weak form, no inverse mass matrix), so the converged residual contracted
with nodal entropy variables reproduces the discrete entropy balance.


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
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, TYPE_CHECKING
import logging

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from . import systems, two_point
from .errors import AdmissibilityError, ConfigurationError, \
    NonConvergenceError
from .sbp_core import SbpOperator, lgl_rule
from .systems import SystemDescriptor, SystemId
from .two_point import DissipationKind, StatePair

if TYPE_CHECKING:
    from .problems import ProblemSpec

logger = logging.getLogger(__name__)

# Line search step length below which a warning is logged
SHORT_STEP_WARNING = 2.0 ** -10

# Scalings of the finite-difference step tried when a perturbed state is not
# admissible
_FD_STEP_REDUCTIONS = (1.0, 2.0 ** -4, 2.0 ** -8)


class TemporalState(str, Enum):
    UPWIND = 'upwind'
    EC = 'ec'


class SpatialFlux(str, Enum):
    ECKEP = 'eckep'
    ES = 'es'


@dataclass(frozen=True)
class MeshConfig:
    """
    Uniform periodic mesh of K_S elements on the domain and K_T slabs on
    [0, T_final]
    """
    K_S: int
    K_T: int
    domain: tuple[float, float] = (0.0, 1.0)
    T_final: float = 1.0

    def __post_init__(self):
        if self.K_S < 1 or self.K_T < 1:
            raise ConfigurationError(
                f'Element and slab counts must be positive, got K_S='
                f'{self.K_S}, K_T={self.K_T}'
            )
        if not self.domain[1] > self.domain[0]:
            raise ConfigurationError(f'Empty domain: {self.domain}')
        if not self.T_final > 0:
            raise ConfigurationError(
                f'T_final must be positive, got {self.T_final}'
            )

    @property
    def dx(self) -> float:
        return (self.domain[1] - self.domain[0]) / self.K_S

    @property
    def dt(self) -> float:
        return self.T_final / self.K_T

    @property
    def J(self) -> float:
        return self.dx / 2


@dataclass(frozen=True)
class SolverConfig:
    """
    Choice of interface states and the Newton settings

    Attributes:
        temporal_state:
            State at slab interfaces: upwind (slabs are solved one after
            another) or entropy conservative (all slabs form one system)
        spatial_flux:
            Surface flux at element interfaces: ECKEP or entropy stable
        dissipation:
            Dissipation of the entropy-stable surface flux
        newton_tol: Tolerance on the max-norm of the weighted residual
        newton_max_iter: Maximum number of Newton iterations per solve
        max_halvings: Maximum number of step halvings of the line search
        polish_steps:
            Newton steps taken after reaching the tolerance, each accepted
            only if it reduces the residual
        fd_relative_step:
            Finite-difference step of the Jacobian, relative to 1 + |u|
        global_unknowns_cap:
            Largest accepted size of the coupled system of an entropy
            conservative solve
    """
    temporal_state: TemporalState = TemporalState.UPWIND
    spatial_flux: SpatialFlux = SpatialFlux.ECKEP
    dissipation: DissipationKind = DissipationKind.MATRIX
    newton_tol: float = 1e-12
    newton_max_iter: int = 100
    max_halvings: int = 30
    polish_steps: int = 2
    fd_relative_step: float = 1.4901161193847656e-08
    global_unknowns_cap: int = 5000

    def __post_init__(self):
        try:
            object.__setattr__(
                self, 'temporal_state', TemporalState(self.temporal_state))
            object.__setattr__(
                self, 'spatial_flux', SpatialFlux(self.spatial_flux))
            object.__setattr__(
                self, 'dissipation', DissipationKind(self.dissipation))
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

        for name in ('newton_tol', 'fd_relative_step'):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f'{name} must be positive')
        for name in ('newton_max_iter', 'global_unknowns_cap'):
            if getattr(self, name) < 1:
                raise ConfigurationError(f'{name} must be at least 1')
        for name in ('max_halvings', 'polish_steps'):
            if getattr(self, name) < 0:
                raise ConfigurationError(f'{name} cannot be negative')

    @classmethod
    def from_configuration(
            cls, configuration: dict, **choices
            ) -> 'SolverConfig':
        """
        Create the solver configuration from the 'solver' section of a
        validated run configuration, with the interface choices (e.g.
        temporal_state='ec') passed as keyword arguments
        """
        return cls(**configuration['solver'], **choices)


@dataclass
class SlabSolution:
    """
    Converged nodal solution of one slab

    Attributes:
        U: Nodal states, shape (M+1, K_S, N+1, p)
        index: Index of the slab, starting at 0
        t_start: Time at the bottom of the slab
        dt: Slab thickness
        iterations: Newton iterations of the solve that produced the slab
        residual_norm: Final residual max-norm of that solve
    """
    U: np.ndarray
    index: int
    t_start: float
    dt: float
    time_rule: SbpOperator
    space_rule: SbpOperator
    iterations: int = 0
    residual_norm: float = 0.0

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt

    @property
    def bottom(self) -> np.ndarray:
        return self.U[0]

    @property
    def top(self) -> np.ndarray:
        return self.U[-1]


@dataclass
class MarchResult:
    """
    A completed run: the interpolated initial data and the slab solutions

    Attributes:
        operator: The operator the slabs were solved with
        initial: Initial data at the spatial nodes, shape (K_S, N+1, p)
        slabs: Slab solutions in time order
        newton_iterations: Newton iterations per solve
    """
    operator: 'SpaceTimeOperator'
    initial: np.ndarray
    slabs: list[SlabSolution] = field(default_factory=list)
    newton_iterations: list[int] = field(default_factory=list)

    @property
    def block(self) -> np.ndarray:
        """All slabs as one array of shape (K_T, M+1, K_S, N+1, p)"""
        return np.stack([slab.U for slab in self.slabs])

    @property
    def final(self) -> np.ndarray:
        return self.slabs[-1].top


class SpaceTimeOperator:
    """
    The space-time DGSEM residual of a system on a mesh, for temporal degree
    M and spatial degree N

    Volume terms always use the entropy-conservative temporal state and the
    ECKEP flux; the configuration selects the interface states.
    """

    def __init__(
            self, system: SystemDescriptor, mesh: MeshConfig, M: int, N: int,
            config: SolverConfig | None = None,
            source: Callable[[np.ndarray, np.ndarray], np.ndarray]
            | None = None,
            ):
        systems.require_system(
            system, 'space-time marching', SystemId.EULER1D, SystemId.EULER3D
        )
        self.system = system
        self.mesh = mesh
        self.config = config if config is not None else SolverConfig()
        self.source = source
        self.time_rule = lgl_rule(M)
        self.space_rule = lgl_rule(N)

        self.nodes = mesh.domain[0] + mesh.dx * (
            np.arange(mesh.K_S)[:, None] + 0.5 * (self.space_rule.nodes + 1)
        )

        wt, wx = self.time_rule.weights, self.space_rule.weights
        # Quadrature weights ω_σ ω_i broadcast to (1, M+1, 1, N+1, 1)
        self._weights = (
            wt[:, None, None, None] * wx[None, None, :, None]
        )[None]
        self._time_weights = wt[None, :, None, None]

        self._coloring_cache = {}

    @property
    def M(self) -> int:
        return self.time_rule.degree

    @property
    def N(self) -> int:
        return self.space_rule.degree

    def block_shape(self, n_slabs: int = 1) -> tuple[int, ...]:
        return (n_slabs, self.M + 1, self.mesh.K_S, self.N + 1, self.system.p)

    def node_times(self, first_slab: int, n_slabs: int) -> np.ndarray:
        """Times of the temporal nodes of a block, shape (S, M+1)"""
        dt = self.mesh.dt
        starts = dt * np.arange(first_slab, first_slab + n_slabs)
        return starts[:, None] + 0.5 * dt * (self.time_rule.nodes + 1)

    def temporal_volume(self, U: np.ndarray) -> np.ndarray:
        """J ω_σ ω_i 2 Σ_θ D_σθ U#(U_σi, U_θi)"""
        sharp = two_point.temporal_state_ec(
            self.system, StatePair(U[:, :, None], U[:, None, :])
        )
        derivative = 2 * np.einsum('ab,sabkip->sakip', self.time_rule.D, sharp)
        return self.mesh.J * self._weights * derivative

    def spatial_volume(self, U: np.ndarray) -> np.ndarray:
        """(Δt/2) ω_σ ω_i 2 Σ_m D_im F#(U_σi, U_σm), per element"""
        flux = two_point.flux_eckep_euler(
            self.system, StatePair(U[..., :, None, :], U[..., None, :, :])
        )
        derivative = 2 * np.einsum('im,sakimp->sakip', self.space_rule.D, flux)
        return 0.5 * self.mesh.dt * self._weights * derivative

    def interface_temporal_states(
            self, U: np.ndarray, bottom: np.ndarray,
            ) -> np.ndarray:
        """
        States U* at the bottom of every slab of the block, shape
        (S, K_S, N+1, p). The bottom of the block always takes the given
        bottom data (initial data or the end of the previous block).
        """
        below = np.concatenate([bottom[None], U[:-1, -1]])
        if self.config.temporal_state is TemporalState.UPWIND \
                or U.shape[0] == 1:
            return below

        states = below.copy()
        states[1:] = two_point.temporal_state_ec(
            self.system, StatePair(U[:-1, -1], U[1:, 0])
        )
        return states

    def temporal_surface(
            self, U: np.ndarray, bottom: np.ndarray
            ) -> np.ndarray:
        """
        J ω_i (U_0i - U*) on the bottom rows and J ω_i (U* - U_Mi) on the top
        rows of every slab. The top of the block is upwind, so its term
        vanishes.
        """
        states = self.interface_temporal_states(U, bottom)
        wx = self.space_rule.weights[None, None, :, None]
        residual = np.zeros_like(U)
        residual[:, 0] = self.mesh.J * wx * (U[:, 0] - states)
        residual[:-1, -1] = self.mesh.J * wx * (states[1:] - U[:-1, -1])
        return residual

    def surface_flux(self, minus: np.ndarray, plus: np.ndarray) -> np.ndarray:
        pair = StatePair(minus, plus)
        if self.config.spatial_flux is SpatialFlux.ES:
            return two_point.flux_es(
                self.system, pair, 0, self.config.dissipation
            )
        return two_point.flux_eckep_euler(self.system, pair)

    def interface_fluxes(self, U: np.ndarray) -> np.ndarray:
        """
        Numerical fluxes at the right interfaces of the elements, shape
        (S, M+1, K_S, p); the right neighbour of the last element is the
        first one
        """
        return self.surface_flux(
            U[:, :, :, -1], np.roll(U[:, :, :, 0], -1, axis=2)
        )

    def spatial_surface(self, U: np.ndarray) -> np.ndarray:
        """(Δt/2) ω_σ (F* - f(U)) at the element endpoints, outward normal"""
        right = self.interface_fluxes(U)
        left = np.roll(right, 1, axis=2)
        scale = 0.5 * self.mesh.dt * self._time_weights

        residual = np.zeros_like(U)
        residual[:, :, :, -1] = scale * (
            right - systems.physical_flux(self.system, U[:, :, :, -1])
        )
        residual[:, :, :, 0] = -scale * (
            left - systems.physical_flux(self.system, U[:, :, :, 0])
        )
        return residual

    def source_term(self, first_slab: int, n_slabs: int) -> np.ndarray:
        """J (Δt/2) ω_σ ω_i Q(x_i, t_σ), collocated at the nodes"""
        shape = self.block_shape(n_slabs)
        if self.source is None:
            return np.zeros(shape)
        times = self.node_times(first_slab, n_slabs)[:, :, None, None]
        values = np.broadcast_to(
            self.source(self.nodes[None, None], times), shape
        )
        return self.mesh.J * 0.5 * self.mesh.dt * self._weights * values

    def assemble_residual(
            self, U: np.ndarray, bottom: np.ndarray, first_slab: int = 0,
            ) -> np.ndarray:
        """
        The nodal residual of a block of slabs

        Args:
            U: Nodal states of the block, shape (S, M+1, K_S, N+1, p)
            bottom: States below the block, shape (K_S, N+1, p)
            first_slab: Index of the first slab of the block (source times)

        Returns:
            The residual, shape of U

        Raises:
            AdmissibilityError:
                In case a nodal state is not admissible; the location is
                prefixed with the index of the first slab
        """
        try:
            residual = self.temporal_volume(U) \
                + self.temporal_surface(U, bottom) \
                + self.spatial_volume(U) \
                + self.spatial_surface(U)
        except AdmissibilityError as e:
            raise e.with_context(slab=first_slab) from e
        return residual - self.source_term(first_slab, U.shape[0])

    def _coloring(self, n_slabs: int) -> tuple[list[list[tuple[int, int]]],
                                                 dict]:
        """
        Greedy colouring of the (slab, element) cells of a block, such that
        cells of one colour have disjoint residual stencils. Returns the
        colours and the stencil (list of cells) of each cell.
        """
        if n_slabs in self._coloring_cache:
            return self._coloring_cache[n_slabs]

        K = self.mesh.K_S
        stencils = {}
        for s in range(n_slabs):
            for k in range(K):
                stencil = {(s, k), (s, (k - 1) % K), (s, (k + 1) % K)}
                stencil |= {(t, k) for t in (s - 1, s + 1)
                            if 0 <= t < n_slabs}
                stencils[(s, k)] = sorted(stencil)

        colors: list[list[tuple[int, int]]] = []
        color_rows: list[set] = []
        for cell, stencil in stencils.items():
            for color, rows in zip(colors, color_rows):
                if rows.isdisjoint(stencil):
                    color.append(cell)
                    rows.update(stencil)
                    break
            else:
                colors.append([cell])
                color_rows.append(set(stencil))

        self._coloring_cache[n_slabs] = (colors, stencils)
        return colors, stencils

    def jacobian(
            self, U: np.ndarray, bottom: np.ndarray, first_slab: int = 0,
            residual: np.ndarray | None = None,
            ) -> scipy.sparse.csc_matrix:
        """
        Forward finite-difference Jacobian of assemble_residual with respect
        to the nodal states of the block, assembled column group by column
        group. Near the boundary of the admissible set, column groups fall
        back to backward or smaller steps.

        Returns:
            The Jacobian as a sparse matrix in the unknown ordering of
            U.ravel()

        Raises:
            AdmissibilityError:
                In case every trial perturbation of a column group is
                inadmissible
        """
        if residual is None:
            residual = self.assemble_residual(U, bottom, first_slab)
        n_slabs = U.shape[0]
        colors, stencils = self._coloring(n_slabs)
        index = np.arange(U.size).reshape(U.shape)

        def cell_unknowns(cell):
            s, k = cell
            return index[s, :, k].ravel()

        cell_columns = {cell: cell_unknowns(cell) for cell in stencils}
        cell_rows = {
            cell: np.concatenate([cell_unknowns(c) for c in stencil])
            for cell, stencil in stencils.items()
        }
        steps = self.config.fd_relative_step * (1 + np.abs(U.ravel()))
        cell_size = (self.M + 1) * (self.N + 1) * self.system.p

        rows, columns, values = [], [], []
        base = residual.ravel()
        for color in colors:
            for j in range(cell_size):
                perturbed_columns = [cell_columns[cell][j] for cell in color]
                difference, used = self._column_difference(
                    U, perturbed_columns, steps[perturbed_columns], bottom,
                    first_slab, base,
                )
                for cell, column, step in zip(color, perturbed_columns, used):
                    cell_row = cell_rows[cell]
                    rows.append(cell_row)
                    columns.append(np.full(cell_row.size, column))
                    values.append(difference[cell_row] / step)

        return scipy.sparse.csc_matrix(
            (np.concatenate(values),
             (np.concatenate(rows), np.concatenate(columns))),
            shape=(U.size, U.size),
        )

    def _column_difference(
            self, U, perturbed_columns, steps, bottom, first_slab, base,
            ) -> tuple[np.ndarray, np.ndarray]:
        """
        Residual difference for a group of perturbed unknowns. A perturbation
        that leaves the admissible set is retried backwards, then with
        smaller steps. Returns the difference and the signed steps used.

        Raises:
            AdmissibilityError: In case no perturbation is admissible
        """
        last_error = None
        for reduction in _FD_STEP_REDUCTIONS:
            for sign in (1.0, -1.0):
                used = sign * reduction * steps
                perturbed = U.ravel().copy()
                perturbed[perturbed_columns] += used
                try:
                    difference = self.assemble_residual(
                        perturbed.reshape(U.shape), bottom, first_slab,
                    ).ravel() - base
                except AdmissibilityError as e:
                    last_error = e
                    continue
                if last_error is not None:
                    logger.debug(
                        'Finite-difference step reduced',
                        extra={'details': {
                            'slab': first_slab, 'sign': sign,
                            'reduction': reduction,
                        }},
                    )
                return difference, used
        raise last_error

    def solve(
            self, guess: np.ndarray, bottom: np.ndarray, first_slab: int = 0,
            ) -> tuple[np.ndarray, int, float]:
        """
        Damped Newton iteration on the residual of a block of slabs

        Args:
            guess: Initial guess, shape (S, M+1, K_S, N+1, p)
            bottom: States below the block
            first_slab: Index of the first slab of the block

        Returns:
            The converged states, the number of Newton iterations and the
            final residual max-norm

        Raises:
            NonConvergenceError:
                In case the tolerance is not reached within newton_max_iter
                iterations, the residual is not finite or the line search
                cannot reduce it
            AdmissibilityError:
                In case the guess is not admissible, or every step of the
                line search leaves the admissible set
        """
        config = self.config
        U = np.array(guess, dtype=float)
        residual = self.assemble_residual(U, bottom, first_slab)
        norm = float(np.max(np.abs(residual)))
        iterations = 0
        polish = 0

        while True:
            if not np.isfinite(norm):
                raise NonConvergenceError(iterations, norm, first_slab)
            if norm <= config.newton_tol:
                if polish >= config.polish_steps:
                    break
                polish += 1
            elif iterations >= config.newton_max_iter:
                raise NonConvergenceError(iterations, norm, first_slab)

            jacobian = self.jacobian(U, bottom, first_slab, residual)
            try:
                delta = scipy.sparse.linalg.splu(jacobian).solve(
                    -residual.ravel()
                ).reshape(U.shape)
            except RuntimeError as e:
                # Singular Jacobian
                raise NonConvergenceError(iterations, norm, first_slab) from e

            step = self._line_search(
                U, delta, bottom, first_slab, norm,
                polishing=norm <= config.newton_tol,
                iteration=iterations,
            )
            if step is None:
                if norm <= config.newton_tol:
                    break
                raise NonConvergenceError(iterations, norm, first_slab)

            U, residual, new_norm, length = step
            iterations += 1
            logger.debug(
                'Newton iteration',
                extra={'details': {
                    'slab': first_slab, 'iteration': iterations,
                    'residual': new_norm, 'step': length,
                }},
            )
            norm = new_norm

        return U, iterations, norm

    def _line_search(
            self, U, delta, bottom, first_slab, norm, polishing, iteration,
            ):
        """
        Halve the Newton step until the trial state is admissible and its
        residual is smaller than the current one. While polishing, only the
        full step is tried. Returns None if no step is accepted.
        """
        length = 1.0
        last_error = None
        halvings = 0 if polishing else self.config.max_halvings
        for _ in range(halvings + 1):
            trial = U + length * delta
            try:
                trial_residual = self.assemble_residual(
                    trial, bottom, first_slab)
            except AdmissibilityError as e:
                last_error = e
                length /= 2
                continue
            trial_norm = float(np.max(np.abs(trial_residual)))
            if trial_norm < norm:
                if length < SHORT_STEP_WARNING:
                    logger.warning(
                        'Newton step shortened by the line search',
                        extra={'details': {
                            'slab': first_slab, 'step': length,
                        }},
                    )
                return trial, trial_residual, trial_norm, length
            length /= 2

        if last_error is not None and not polishing:
            raise last_error.with_context(newton_iteration=iteration)
        return None


def solve_slab(
        operator: SpaceTimeOperator, prev_end: np.ndarray, index: int = 0,
        ) -> SlabSolution:
    """
    Solve the equations of one slab with the upwind state at its bottom

    Args:
        operator: The space-time operator
        prev_end: States at the end of the previous slab (or the initial
            data), shape (K_S, N+1, p); also the initial guess at every
            temporal node
        index: Index of the slab

    Returns:
        The converged slab
    """
    prev_end = np.asarray(prev_end, dtype=float)
    guess = np.broadcast_to(prev_end, operator.block_shape(1)).copy()
    U, iterations, norm = operator.solve(guess, prev_end, index)
    return SlabSolution(
        U=U[0], index=index, t_start=index * operator.mesh.dt,
        dt=operator.mesh.dt, time_rule=operator.time_rule,
        space_rule=operator.space_rule, iterations=iterations,
        residual_norm=norm,
    )


def initial_data(operator: SpaceTimeOperator, problem: 'ProblemSpec'):
    """The initial condition interpolated at the spatial nodes"""
    return np.asarray(problem.initial(operator.nodes), dtype=float)


def march(
        problem: 'ProblemSpec', mesh: MeshConfig, M: int, N: int,
        config: SolverConfig | None = None,
        ) -> MarchResult:
    """
    Solve the problem on the mesh from t = 0 to T_final

    With upwind temporal states the slabs are solved one after another. With
    entropy-conservative temporal states all slabs form one coupled system;
    its initial guess is the upwind solution.

    Raises:
        ConfigurationError:
            In case a coupled system exceeds config.global_unknowns_cap
        NonConvergenceError, AdmissibilityError: Errors of the slab solves
    """
    config = config if config is not None else SolverConfig()
    operator = SpaceTimeOperator(
        problem.system, mesh, M, N, config, source=problem.source,
    )
    initial = initial_data(operator, problem)
    result = MarchResult(operator=operator, initial=initial)

    if config.temporal_state is TemporalState.EC and mesh.K_T > 1:
        unknowns = int(np.prod(operator.block_shape(mesh.K_T)))
        if unknowns > config.global_unknowns_cap:
            raise ConfigurationError(
                f'The coupled system has {unknowns} unknowns, more than the '
                f'cap of {config.global_unknowns_cap}'
            )

    upwind_operator = operator
    if config.temporal_state is TemporalState.EC:
        upwind_operator = SpaceTimeOperator(
            problem.system, mesh, M, N,
            replace(config, temporal_state=TemporalState.UPWIND),
            source=problem.source,
        )

    prev_end = initial
    for index in range(mesh.K_T):
        slab = solve_slab(upwind_operator, prev_end, index)
        logger.info(
            'Slab converged',
            extra={'details': {
                'slab': index, 't_end': slab.t_end,
                'iterations': slab.iterations,
                'residual': slab.residual_norm,
            }},
        )
        result.slabs.append(slab)
        result.newton_iterations.append(slab.iterations)
        prev_end = slab.top

    if config.temporal_state is TemporalState.EC and mesh.K_T > 1:
        U, iterations, norm = operator.solve(result.block, initial, 0)
        logger.info(
            'Coupled slabs converged',
            extra={'details': {
                'slabs': mesh.K_T, 'iterations': iterations,
                'residual': norm,
            }},
        )
        result.slabs = [
            SlabSolution(
                U=U[index], index=index, t_start=index * mesh.dt,
                dt=mesh.dt, time_rule=operator.time_rule,
                space_rule=operator.space_rule, iterations=iterations,
                residual_norm=norm,
            )
            for index in range(mesh.K_T)
        ]
        result.newton_iterations.append(iterations)

    return result
