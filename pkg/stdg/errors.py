"""
Exceptions raised by stdg. Every error carries a stable id and a process exit
code, so the command line interface can report machine interpretable errors.


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
from typing import Any

EXIT_SUCCESS = 0
EXIT_CONFIGURATION_ERROR = 2
EXIT_SOLVER_ERROR = 3


class STDGError(Exception):
    """
    Base class of all stdg errors

    Attributes:
        id:
            Stable identifier of the error type, used in logs and in the
            trailer of incomplete CSV output
        exit_code:
            Exit code of the command line interface if the error is not handled
    """
    id = 'stdg-error'
    exit_code = 1

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class ConfigurationError(STDGError, ValueError):
    """The run or solver configuration is invalid"""
    id = 'configuration-error'
    exit_code = EXIT_CONFIGURATION_ERROR


class UnsupportedSystemError(STDGError, TypeError):
    """A kernel was requested for a system that does not define it"""
    id = 'unsupported-system'
    exit_code = EXIT_CONFIGURATION_ERROR

    def __init__(self, system_id: str, operation: str):
        self.system_id = system_id
        self.operation = operation
        super().__init__(
            f'{operation} is not defined for the {system_id} system'
        )


class AdmissibilityError(STDGError, ValueError):
    """
    A state has nonpositive density, water height or pressure

    Attributes:
        quantity:
            Name of the offending quantity (e.g. 'pressure')
        value:
            The offending value
        location:
            Index of the offending state inside the evaluated array. Callers
            may prepend context (e.g. the slab index) using with_context()
    """
    id = 'admissibility-loss'
    exit_code = EXIT_SOLVER_ERROR

    def __init__(
            self, quantity: str, value: float,
            location: tuple[Any, ...] = (),
            ):
        self.quantity = quantity
        self.value = float(value)
        self.location = tuple(location)
        super().__init__(
            f'Inadmissible state: {quantity}={self.value:.6e} at '
            f'{self.location}'
        )

    def with_context(self, **context) -> 'AdmissibilityError':
        """
        Returns a copy of the error of which the location is prefixed with
        the given keyword context, e.g. with_context(slab=3)
        """
        prefix = tuple(f'{key}={value}' for key, value in context.items())
        return AdmissibilityError(
            self.quantity, self.value, prefix + self.location
        )


class NonConvergenceError(STDGError):
    """
    The Newton iteration of a slab solve did not reach the tolerance

    Attributes:
        iterations: Number of Newton iterations performed
        residual_norm: Max-norm of the last residual
        slab: Index of the (first) slab of the failed solve, if known
    """
    id = 'nonconvergence'
    exit_code = EXIT_SOLVER_ERROR

    def __init__(
            self, iterations: int, residual_norm: float,
            slab: int | None = None,
            ):
        self.iterations = iterations
        self.residual_norm = float(residual_norm)
        self.slab = slab
        where = '' if slab is None else f' (slab {slab})'
        super().__init__(
            f'Newton iteration did not converge{where}: residual '
            f'{self.residual_norm:.3e} after {iterations} iterations'
        )
