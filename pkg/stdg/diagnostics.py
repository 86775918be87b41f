"""
Scalar functionals of a completed run: discrete total entropy and kinetic
energy, the entropy and kinetic-energy balance errors with their individual
terms, L2 errors and experimental orders of convergence.

All sums are accumulated with compensated summation (math.fsum).


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
from dataclasses import dataclass, field, fields
from typing import Callable, Sequence
import math

import numpy as np

from . import systems, two_point
from .sbp_core import SbpOperator, interpolation_matrix, lgl_rule
from .spacetime_solver import MarchResult, SpaceTimeOperator
from .systems import SystemDescriptor


def _fsum(values) -> float:
    return math.fsum(np.ravel(values))


@dataclass
class DiagnosticsRecord:
    """
    Diagnostics of one run. Fields that a run does not support (e.g. errors
    without an exact solution) are None.
    """
    S_initial: float | None = None
    S_final: float | None = None
    Delta_S: float | None = None
    initial_projection_term_S: float | None = None
    Xi_S: float | None = None
    K_initial: float | None = None
    K_final: float | None = None
    pressure_work_volume: float | None = None
    pressure_work_surface: float | None = None
    initial_projection_term_K: float | None = None
    Theta_K: float | None = None
    l2_errors: list[float] | None = None
    eoc: list[float] | None = field(default=None)

    @classmethod
    def header(cls, components: int) -> list[str]:
        """Column names of as_row() for a system with the given components"""
        names = []
        for f in fields(cls):
            if f.name in ('l2_errors', 'eoc'):
                names += [f'{f.name}_{c}' for c in range(components)]
            else:
                names.append(f.name)
        return names

    def as_row(self, components: int) -> list[float | None]:
        row = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ('l2_errors', 'eoc'):
                row += list(value) if value is not None \
                    else [None] * components
            else:
                row.append(value)
        return row


def total_entropy(
        system: SystemDescriptor, states: np.ndarray, rule: SbpOperator,
        J: float,
        ) -> float:
    """
    Σ_k Σ_i J ω_i s(U_ki) of nodal states of shape (K_S, N+1, p)
    """
    s = systems.entropy_quantities(system, states).s
    return _fsum(J * rule.weights * s)


def total_kinetic_energy(
        system: SystemDescriptor, states: np.ndarray, rule: SbpOperator,
        J: float,
        ) -> float:
    """Σ_k Σ_i J ω_i κ(U_ki)"""
    kappa = systems.kinetic_quantities(system, states).kappa
    return _fsum(J * rule.weights * kappa)


def _totals(run: MarchResult, function, states):
    operator = run.operator
    return function(
        operator.system, states, operator.space_rule, operator.mesh.J,
    )


def delta_S(run: MarchResult) -> float:
    """S̄(U(T)) - S̄(u(0))"""
    return _totals(run, total_entropy, run.final) \
        - _totals(run, total_entropy, run.initial)


def entropy_trace(run: MarchResult) -> list[tuple[float, float]]:
    """(t, Δ_S(t)) at t = 0 and at the end of every slab"""
    initial = _totals(run, total_entropy, run.initial)
    trace = [(0.0, 0.0)]
    for slab in run.slabs:
        trace.append(
            (slab.t_end, _totals(run, total_entropy, slab.top) - initial)
        )
    return trace


def entropy_projection_term(run: MarchResult) -> float:
    """
    Σ_k Σ_i J ω_i ([[Φ]] - [[W]]ᵀu) at τ = -1 of the first slab, where the
    jump is from the initial data u to the bottom trace of the first slab
    """
    operator = run.operator
    minus = systems.entropy_quantities(operator.system, run.initial)
    plus = systems.entropy_quantities(operator.system, run.slabs[0].bottom)
    term = two_point.jump(minus.phi, plus.phi) - np.sum(
        two_point.jump(minus.w, plus.w) * run.initial, axis=-1
    )
    return _fsum(operator.mesh.J * operator.space_rule.weights * term)


def xi_S(run: MarchResult) -> float:
    """Δ_S plus the initial projection term; zero for EC runs"""
    return delta_S(run) + entropy_projection_term(run)


def kinetic_projection_term(run: MarchResult) -> float:
    """Σ_k Σ_i J ω_i [[V]]ᵀu at τ = -1 of the first slab"""
    operator = run.operator
    minus = systems.kinetic_quantities(operator.system, run.initial)
    plus = systems.kinetic_quantities(operator.system, run.slabs[0].bottom)
    term = np.sum(two_point.jump(minus.V, plus.V) * run.initial, axis=-1)
    return _fsum(operator.mesh.J * operator.space_rule.weights * term)


def pressure_work_volume(run: MarchResult) -> float:
    """
    Σ_n Σ_k (Δt/2) Σ_σ Σ_i ω_σ ω_i p_σi (D v)_σi, the discrete volume
    integral of p ∂v/∂x
    """
    operator = run.operator
    prim = systems.primitive_variables(operator.system, run.block)
    dv = np.einsum('im,sakm->saki', operator.space_rule.D,
                   prim.velocity[..., 0])
    weights = operator.time_rule.weights[:, None, None] \
        * operator.space_rule.weights
    return _fsum(0.5 * operator.mesh.dt * weights * prim.pressure * dv)


def pressure_work_surface(run: MarchResult) -> float:
    """
    Σ_n (Δt/2) Σ_σ ω_σ Σ_faces {{p}}[[v]] over all element interfaces
    """
    operator = run.operator
    block = run.block
    minus = systems.primitive_variables(operator.system, block[:, :, :, -1])
    plus = systems.primitive_variables(
        operator.system, np.roll(block[:, :, :, 0], -1, axis=2)
    )
    work = two_point.average(minus.pressure, plus.pressure) \
        * two_point.jump(minus.velocity[..., 0], plus.velocity[..., 0])
    weights = operator.time_rule.weights[:, None]
    return _fsum(0.5 * operator.mesh.dt * weights * work)


def theta_K(run: MarchResult) -> float:
    """
    K̄(T) - K̄(0) minus the volume and surface pressure work and the
    initial projection term; zero for kinetic-energy-preserving runs
    """
    return (
        _totals(run, total_kinetic_energy, run.final)
        - _totals(run, total_kinetic_energy, run.initial)
        - pressure_work_volume(run)
        - pressure_work_surface(run)
        - kinetic_projection_term(run)
    )


def residual_contraction(
        run: MarchResult, variables: str = 'entropy',
        ) -> dict[str, float]:
    """
    Contract each term of the residual of the (converged) run with nodal
    entropy variables or kinetic-energy variables

    Args:
        run: The completed run
        variables: 'entropy' or 'kinetic'

    Returns:
        The contraction of every residual term, keyed by term name
        ('temporal_volume', 'temporal_surface', 'spatial_volume',
        'spatial_surface', 'source'), evaluated on all slabs as one block
    """
    operator: SpaceTimeOperator = run.operator
    U = run.block
    if variables == 'entropy':
        weights = systems.entropy_quantities(operator.system, U).w
    elif variables == 'kinetic':
        weights = systems.kinetic_quantities(operator.system, U).V
    else:
        raise ValueError(f'Unknown contraction variables: {variables!r}')

    terms = {
        'temporal_volume': operator.temporal_volume(U),
        'temporal_surface': operator.temporal_surface(U, run.initial),
        'spatial_volume': operator.spatial_volume(U),
        'spatial_surface': operator.spatial_surface(U),
        'source': -operator.source_term(0, U.shape[0]),
    }
    return {name: _fsum(weights * term) for name, term in terms.items()}


def l2_error(
        run: MarchResult,
        exact_solution: Callable[[np.ndarray, float], np.ndarray],
        ) -> np.ndarray:
    """
    Per-component L2 error at the final time. The numerical solution is
    interpolated to an LGL grid of degree 2N in every element, where the
    squared error is integrated by quadrature.
    """
    operator = run.operator
    fine = lgl_rule(2 * operator.N)
    interpolation = interpolation_matrix(operator.space_rule, fine.nodes)
    numerical = np.einsum('fi,kic->kfc', interpolation, run.final)

    mesh = operator.mesh
    x = mesh.domain[0] + mesh.dx * (
        np.arange(mesh.K_S)[:, None] + 0.5 * (fine.nodes + 1)
    )
    exact = np.asarray(exact_solution(x, run.slabs[-1].t_end))
    squared = (numerical - exact) ** 2 * mesh.J * fine.weights[:, None]
    return np.array([
        math.sqrt(_fsum(squared[..., c])) for c in range(squared.shape[-1])
    ])


def eoc(
        errors: Sequence[Sequence[float]],
        refinements: float | Sequence[float] = 2.0,
        ) -> list[np.ndarray]:
    """
    Experimental orders of convergence log(e_coarse/e_fine)/log(r) between
    consecutive levels of a refinement ladder

    Args:
        errors: Per-component errors of each level, coarse to fine
        refinements:
            Refinement factor between consecutive levels (one factor for
            all levels, or one per pair of levels)

    Returns:
        One array of per-component orders per pair of consecutive levels
    """
    errors = [np.asarray(e, dtype=float) for e in errors]
    if np.ndim(refinements) == 0:
        refinements = [refinements] * (len(errors) - 1)
    return [
        np.log(coarse / fine) / math.log(r)
        for coarse, fine, r in zip(errors[:-1], errors[1:], refinements)
    ]


def diagnose(
        run: MarchResult,
        exact_solution: Callable[[np.ndarray, float], np.ndarray]
        | None = None,
        ) -> DiagnosticsRecord:
    """
    Fill a DiagnosticsRecord with every functional the run supports. The
    kinetic-energy terms are filled for Euler systems, errors when an exact
    solution is given.
    """
    operator = run.operator
    record = DiagnosticsRecord()
    record.S_initial = _totals(run, total_entropy, run.initial)
    record.S_final = _totals(run, total_entropy, run.final)
    record.Delta_S = record.S_final - record.S_initial
    record.initial_projection_term_S = entropy_projection_term(run)
    record.Xi_S = record.Delta_S + record.initial_projection_term_S

    if operator.system.is_euler:
        record.K_initial = _totals(run, total_kinetic_energy, run.initial)
        record.K_final = _totals(run, total_kinetic_energy, run.final)
        record.pressure_work_volume = pressure_work_volume(run)
        record.pressure_work_surface = pressure_work_surface(run)
        record.initial_projection_term_K = kinetic_projection_term(run)
        record.Theta_K = (
            record.K_final - record.K_initial
            - record.pressure_work_volume
            - record.pressure_work_surface
            - record.initial_projection_term_K
        )

    if exact_solution is not None:
        record.l2_errors = [float(e) for e in l2_error(run, exact_solution)]
    return record


def upwind_kinetic_bound(run: MarchResult) -> float:
    """
    Σ over interior slab interfaces of J ω_i [[V]]ᵀU*, for upwind runs the
    (nonpositive) value of Θ_K
    """
    operator = run.operator
    block = run.block
    if block.shape[0] < 2:
        return 0.0
    dissipation = two_point.upwind_kinetic_dissipation(
        operator.system, block[:-1, -1], block[1:, 0],
    )
    return _fsum(operator.mesh.J * operator.space_rule.weights * dissipation)

