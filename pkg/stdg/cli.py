"""
Command line interface: runs the convergence, entropy-stability, entropy
conservation and kinetic-energy experiments and writes their results as CSV


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
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, TextIO
import argparse
import csv
import logging
import sys

import numpy as np

from . import diagnostics, errors, get_thread_count, load_presets, \
    load_run_configuration, logging as stdg_logging, two_point
from .problems import PROBLEMS, get_problem
from .sbp_core import MAX_DEGREE, lgl_rule
from .spacetime_solver import MeshConfig, SolverConfig, SpatialFlux, \
    TemporalState, march
from .systems import SystemDescriptor, SystemId

logger = logging.getLogger(__name__)

# Problem and interface choices of every experiment
_EXPERIMENTS = {
    'convergence': ('manufactured', TemporalState.UPWIND, SpatialFlux.ES),
    'entropy-stability': ('shock', TemporalState.UPWIND, SpatialFlux.ES),
    'entropy-conservation': ('shock', TemporalState.EC, SpatialFlux.ECKEP),
    'kep-check': ('density-wave', TemporalState.EC, SpatialFlux.ECKEP),
}

_CONVERGENCE_COMPONENTS = ('rho', 'rhov', 'E')
_DUMP_DIGITS = 16


@dataclass(frozen=True)
class RunConfig:
    """
    A validated command line request

    Attributes:
        subcommand: The experiment to run
        runs: The (K_T, K_S, M, N) configurations, in output order
        problem: Name of the registered problem
        T: Final time
        flux: Surface flux at element interfaces
        temporal_state: State at slab interfaces
        seed: Seed of the random states of the conditions check
        samples: Number of random pairs of the conditions check
        system: System of the conditions check
        degree: Degree of the dumped operator
    """
    subcommand: str
    runs: tuple[tuple[int, int, int, int], ...] = ()
    problem: str | None = None
    T: float = 1.0
    flux: SpatialFlux = SpatialFlux.ECKEP
    temporal_state: TemporalState = TemporalState.UPWIND
    seed: int = 0
    samples: int = 10000
    system: SystemId = SystemId.EULER1D
    degree: int | None = None

    @classmethod
    def from_arguments(
            cls, args: argparse.Namespace, presets: dict, configuration: dict,
            ) -> 'RunConfig':
        """
        Build the request from parsed arguments, resolving presets

        Raises:
            ConfigurationError:
                In case of unknown presets, invalid sizes, or a coupled
                system larger than the configured cap
        """
        subcommand = args.subcommand
        if subcommand == 'dump-operator':
            _check_degree(args.degree)
            return cls(subcommand, degree=args.degree)
        if subcommand == 'conditions':
            if args.samples < 1:
                raise errors.ConfigurationError('--samples must be positive')
            return cls(
                subcommand, seed=args.seed, samples=args.samples,
                system=SystemId(args.system),
            )

        problem, temporal_state, flux = _EXPERIMENTS[subcommand]
        if args.flux is not None:
            flux = SpatialFlux(args.flux)
        if args.temporal_state is not None:
            temporal_state = TemporalState(args.temporal_state)
        if getattr(args, 'problem', None):
            problem = args.problem

        runs, preset_problem = _resolve_runs(subcommand, args, presets)
        if preset_problem is not None and not getattr(args, 'problem', None):
            problem = preset_problem
        if problem not in PROBLEMS:
            raise errors.ConfigurationError(
                f'Unknown problem {problem!r}, choose from {sorted(PROBLEMS)}'
            )
        for K_T, K_S, M, N in runs:
            if K_T < 1 or K_S < 1:
                raise errors.ConfigurationError(
                    f'Element counts must be positive: K_T={K_T}, K_S={K_S}'
                )
            _check_degree(M)
            _check_degree(N)
            if temporal_state is TemporalState.EC and K_T > 1:
                unknowns = K_T * (M + 1) * K_S * (N + 1) * 3
                cap = configuration['solver']['global_unknowns_cap']
                if unknowns > cap:
                    raise errors.ConfigurationError(
                        f'Configuration {(K_T, K_S, M, N)} couples {unknowns} '
                        f'unknowns, more than the cap of {cap}'
                    )
        if not args.T > 0:
            raise errors.ConfigurationError('--T must be positive')

        return cls(
            subcommand, runs=tuple(runs), problem=problem, T=args.T,
            flux=flux, temporal_state=temporal_state,
        )


def _check_degree(degree: int):
    if not 1 <= degree <= MAX_DEGREE:
        raise errors.ConfigurationError(
            f'Polynomial degrees must be in [1, {MAX_DEGREE}], got {degree}'
        )


def _resolve_runs(
        subcommand: str, args: argparse.Namespace, presets: dict,
        ) -> tuple[list[tuple[int, int, int, int]], str | None]:
    """Returns the (K_T, K_S, M, N) runs of the request and the problem of
    the preset, if any"""
    section = {
        'convergence': 'convergence',
        'entropy-stability': 'entropy_stability',
        'entropy-conservation': 'entropy_conservation',
        'kep-check': 'kinetic_energy',
    }[subcommand]

    if args.preset is not None:
        try:
            preset = presets[section][args.preset]
        except KeyError:
            raise errors.ConfigurationError(
                f'Unknown preset {args.preset!r} for {subcommand}, choose '
                f'from {sorted(presets[section])}'
            )
        if subcommand == 'convergence':
            runs = [(K_T, K_S, preset['M'], preset['N'])
                    for K_T, K_S in preset['ladder']]
        elif subcommand == 'entropy-stability':
            runs = [(K_T, preset['K_S'], preset['M'], preset['N'])
                    for K_T in preset['K_T']]
        else:
            runs = [tuple(row) for row in preset['configurations']]
        return runs, preset.get('problem')

    if subcommand == 'convergence':
        if not args.ladder or args.M is None or args.N is None:
            raise errors.ConfigurationError(
                'Provide --preset, or --M, --N and --ladder for convergence '
                'runs'
            )
        return [(K_T, K_S, args.M, args.N)
                for K_T, K_S in args.ladder], None

    missing = [name for name in ('K_T', 'K_S', 'M', 'N')
               if getattr(args, name) is None]
    if missing:
        raise errors.ConfigurationError(
            f'Provide --preset, or all of --K-T, --K-S, --M and --N '
            f'(missing: {", ".join(missing)})'
        )
    return [(args.K_T, args.K_S, args.M, args.N)], None


class CsvTable:
    """
    CSV writer with a header row, floats at a fixed number of significant
    digits and LF line endings. Missing values are written as empty fields.
    """

    def __init__(self, stream: TextIO, float_digits: int = 17):
        self.stream = stream
        self.float_digits = float_digits
        self._writer = csv.writer(stream, lineterminator='\n')

    def format(self, value: Any) -> str:
        if value is None:
            return ''
        if isinstance(value, (float, np.floating)):
            return f'{value:.{self.float_digits}g}'
        if isinstance(value, np.integer):
            return str(int(value))
        return str(value)

    def write_header(self, names: Iterable[str]):
        self._writer.writerow(list(names))

    def write_row(self, values: Iterable[Any]):
        self._writer.writerow([self.format(v) for v in values])
        self.stream.flush()

    def mark_incomplete(self, error: errors.STDGError):
        """Terminate partial output with a comment naming the error id"""
        self.stream.write(f'# incomplete: {error.id}\n')
        self.stream.flush()


def _ordered_results(
        function: Callable, items: list, threads: int,
        ) -> Iterator:
    """
    Yields function(item) for every item, in item order. Up to 'threads'
    items are evaluated concurrently; after an error, items that did not
    start yet are cancelled.
    """
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [executor.submit(function, item) for item in items]
        try:
            for future in futures:
                yield future.result()
        finally:
            for future in futures:
                future.cancel()


def _march(request: RunConfig, configuration: dict, run):
    K_T, K_S, M, N = run
    problem = get_problem(request.problem, configuration['physics']['gamma'])
    mesh = MeshConfig(
        K_S=K_S, K_T=K_T, domain=problem.domain, T_final=request.T,
    )
    solver = SolverConfig.from_configuration(
        configuration, temporal_state=request.temporal_state,
        spatial_flux=request.flux,
    )
    logger.info(
        'Starting run',
        extra={'details': {
            'subcommand': request.subcommand, 'K_T': K_T, 'K_S': K_S,
            'M': M, 'N': N, 'problem': request.problem,
        }},
    )
    return problem, march(problem, mesh, M, N, solver)


def run_convergence(
        request: RunConfig, configuration: dict, table: CsvTable,
        threads: int,
        ):
    """
    Rows (K_T, K_S, L2 and EOC per component) of a refinement ladder. The
    EOC uses the spatial refinement factor between consecutive rows.
    """
    header = ['K_T', 'K_S']
    for name in _CONVERGENCE_COMPONENTS:
        header += [f'L2_{name}', f'EOC_{name}']
    table.write_header(header)

    def solve(run):
        problem, result = _march(request, configuration, run)
        if problem.exact is None:
            raise errors.ConfigurationError(
                f'Problem {problem.name!r} has no exact solution')
        return diagnostics.l2_error(result, problem.exact)

    previous = None
    for run, error in zip(
            request.runs, _ordered_results(solve, list(request.runs), threads)
            ):
        K_T, K_S = run[:2]
        orders = [None] * len(error)
        if previous is not None:
            previous_K_S, previous_error = previous
            orders = diagnostics.eoc(
                [previous_error, error], K_S / previous_K_S)[0]
        row = [K_T, K_S]
        for value, order in zip(error, orders):
            row += [float(value), None if order is None else float(order)]
        table.write_row(row)
        previous = (K_S, error)


def run_entropy_stability(
        request: RunConfig, configuration: dict, table: CsvTable,
        threads: int,
        ):
    """Rows (K_T, t, Δ_S(t)) at t = 0 and at every slab end"""
    table.write_header(['K_T', 't', 'Delta_S'])

    def solve(run):
        return diagnostics.entropy_trace(
            _march(request, configuration, run)[1])

    for run, trace in zip(
            request.runs, _ordered_results(solve, list(request.runs), threads)
            ):
        for t, value in trace:
            table.write_row([run[0], float(t), float(value)])


def _balance_table(name: str, functional: Callable):
    def run_balance(
            request: RunConfig, configuration: dict, table: CsvTable,
            threads: int,
            ):
        table.write_header(['K_T', 'K_S', 'M', 'N', name])

        def solve(run):
            return functional(_march(request, configuration, run)[1])

        for run, value in zip(
                request.runs,
                _ordered_results(solve, list(request.runs), threads),
                ):
            table.write_row([*run, float(value)])

    run_balance.__doc__ = f'Rows (K_T, K_S, M, N, {name})'
    return run_balance


run_entropy_conservation = _balance_table('Xi_S', diagnostics.xi_S)
run_kep_check = _balance_table('Theta_K', diagnostics.theta_K)


def run_dump_operator(
        request: RunConfig, configuration: dict, table: CsvTable,
        threads: int,
        ):
    """Rows (node, weight, D_i0..D_iK) of the SBP operator of a degree"""
    rule = lgl_rule(request.degree)
    table.float_digits = _DUMP_DIGITS
    table.write_header(
        ['node', 'weight'] + [f'D_{j}' for j in range(rule.size)])
    for i in range(rule.size):
        table.write_row(
            [float(rule.nodes[i]), float(rule.weights[i])]
            + [float(value) for value in rule.D[i]]
        )


def run_conditions(
        request: RunConfig, configuration: dict, table: CsvTable,
        threads: int,
        ):
    """Rows (system, check, value) of the two-point condition checks"""
    physics = configuration['physics']
    system = SystemDescriptor(
        request.system, gamma=physics['gamma'], g=physics['gravity'])
    rng = np.random.default_rng(request.seed)
    report = two_point.condition_report(system, request.samples, rng)
    table.write_header(['system', 'check', 'value'])
    for check, value in report.items():
        table.write_row([system.id.value, check, value])


HANDLERS = {
    'convergence': run_convergence,
    'entropy-stability': run_entropy_stability,
    'entropy-conservation': run_entropy_conservation,
    'kep-check': run_kep_check,
    'dump-operator': run_dump_operator,
    'conditions': run_conditions,
}


def _ladder(value: str) -> list[tuple[int, int]]:
    """Parses 'K_TxK_S,K_TxK_S,...'"""
    try:
        ladder = [
            tuple(int(n) for n in entry.split('x'))
            for entry in value.split(',')
        ]
        if any(len(entry) != 2 for entry in ladder):
            raise ValueError(value)
        return ladder
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'Invalid ladder {value!r}, expected e.g. 2x2,4x4,8x8')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='stdg',
        description=(
            'Entropy-stable space-time DGSEM experiments for the 1D Euler '
            'equations'
        ),
    )
    parser.add_argument(
        '--config', type=Path, default=None,
        help='Run configuration file (default: $STDG_CONFIG, or defaults)',
    )
    parser.add_argument(
        '--out', type=Path, default=None,
        help='Write the CSV output to this file instead of stdout',
    )
    parser.add_argument(
        '--log-level', default=None,
        choices=['CRITICAL', 'ERROR', 'WARNING', 'INFO', 'DEBUG'],
        help='Level of the console (stderr) log handler',
    )
    subparsers = parser.add_subparsers(dest='subcommand', required=True)

    for name in ('convergence', 'entropy-stability', 'entropy-conservation',
                 'kep-check'):
        sub = subparsers.add_parser(name)
        sub.add_argument('--preset', default=None)
        sub.add_argument('--M', type=int, default=None)
        sub.add_argument('--N', type=int, default=None)
        sub.add_argument('--K-T', dest='K_T', type=int, default=None)
        sub.add_argument('--K-S', dest='K_S', type=int, default=None)
        sub.add_argument('--T', type=float, default=1.0)
        sub.add_argument('--problem', default=None)
        sub.add_argument(
            '--flux', choices=[f.value for f in SpatialFlux], default=None)
        sub.add_argument(
            '--temporal-state', dest='temporal_state',
            choices=[s.value for s in TemporalState], default=None,
        )
        if name == 'convergence':
            sub.add_argument(
                '--ladder', type=_ladder, default=None,
                help='Refinement ladder, e.g. 2x2,4x4,8x8 (K_T x K_S)',
            )

    dump = subparsers.add_parser('dump-operator')
    dump.add_argument('degree', type=int)

    conditions = subparsers.add_parser('conditions')
    conditions.add_argument(
        '--system', choices=[s.value for s in SystemId], default='euler1d')
    conditions.add_argument('--samples', type=int, default=10000)
    conditions.add_argument('--seed', type=int, default=0)

    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Entrypoint of the 'stdg' command

    Returns:
        The exit code: 0 on success, 2 for configuration errors, 3 for
        solver errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return errors.EXIT_CONFIGURATION_ERROR if e.code else 0

    try:
        configuration = load_run_configuration(args.config)
        if args.log_level is not None:
            configuration['logs']['console'] = {'level': args.log_level}
        try:
            stdg_logging.configure_logging(configuration['logs'])
        except ValueError as e:
            raise errors.ConfigurationError(str(e)) from e
        threads = get_thread_count()
        request = RunConfig.from_arguments(
            args, load_presets(), configuration)
    except errors.STDGError as e:
        print(f'stdg: error: {e.message}', file=sys.stderr, flush=True)
        return e.exit_code

    stream = open(args.out, 'w', newline='') if args.out else sys.stdout
    table = CsvTable(stream, configuration['output']['float_digits'])
    try:
        HANDLERS[request.subcommand](request, configuration, table, threads)
    except errors.STDGError as e:
        table.mark_incomplete(e)
        logger.error(
            'Run aborted', exc_info=True,
            extra={'details': {'subcommand': request.subcommand}},
        )
        print(f'stdg: error: {e.message}', file=sys.stderr, flush=True)
        return e.exit_code
    finally:
        if stream is not sys.stdout:
            stream.close()

    return errors.EXIT_SUCCESS


if __name__ == '__main__':
    sys.exit(main())
