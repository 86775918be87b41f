"""
Tests for the stdg.errors module


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
import pytest
import tools  # noqa: F401

from stdg import errors


@pytest.mark.parametrize('error, error_id, exit_code, builtin', [
    (errors.ConfigurationError('bad'), 'configuration-error', 2, ValueError),
    (errors.UnsupportedSystemError('sw1d', 'march'), 'unsupported-system', 2,
     TypeError),
    (errors.AdmissibilityError('pressure', -1.0), 'admissibility-loss', 3,
     ValueError),
    (errors.NonConvergenceError(5, 1e-3), 'nonconvergence', 3, Exception),
])
def test_error_ids_and_exit_codes(error, error_id, exit_code, builtin):
    """
    Each error carries a stable id and the exit code of the command line
    interface
    """
    assert isinstance(error, errors.STDGError)
    assert isinstance(error, builtin)
    assert error.id == error_id
    assert error.exit_code == exit_code
    assert error.message == str(error)


def test_admissibility_context():
    """
    Context is prepended to the location, leaving the original untouched
    """
    error = errors.AdmissibilityError('density', 0.0, (1, 2))
    with_slab = error.with_context(slab=3).with_context(newton_iteration=0)
    assert with_slab.location == ('newton_iteration=0', 'slab=3', 1, 2)
    assert with_slab.quantity == 'density'
    assert error.location == (1, 2)
    assert 'density' in with_slab.message


def test_nonconvergence_message():
    error = errors.NonConvergenceError(12, 0.25, slab=4)
    assert (error.iterations, error.residual_norm, error.slab) \
        == (12, 0.25, 4)
    assert 'slab 4' in error.message
    assert 'slab' not in errors.NonConvergenceError(1, 1.0).message
