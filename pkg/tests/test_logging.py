"""
Tests for the JSON-lines run logs


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
from pathlib import Path
import logging

import pytest
import tools

import stdg
from stdg import errors, problems
from stdg import logging as stdg_logging
from stdg.spacetime_solver import MeshConfig, SolverConfig, march

file_dir = Path(__file__).parent.absolute()
config_path = Path(file_dir, 'data/1/stdg-configuration.yaml')


@pytest.fixture
def log_file(monkeypatch, tmp_path):
    """
    Configures file logging as in data/1, and removes the handlers afterwards
    """
    monkeypatch.setenv('STDG_TEST_LOG_DIR', tmp_path.as_posix())
    configuration = stdg.load_run_configuration(config_path)
    stdg_logging.configure_logging(configuration['logs'])
    yield Path(configuration['logs']['file']['path'])
    stdg_logging.configure_logging({'source_name': 'stdg'})


def test_solver_logs(log_file):
    """
    Test if Newton iterations and converged slabs are logged with their
    details
    """
    solver_logger = logging.getLogger('stdg.spacetime_solver')
    assert solver_logger.isEnabledFor(logging.DEBUG)
    march(
        problems.density_wave_euler(), MeshConfig(K_S=2, K_T=2), 1, 1,
        SolverConfig(spatial_flux='es'),
    )

    logs = tools.load_jsonlines_file(log_file)
    iterations = [log for log in logs if log['message'] == 'Newton iteration']
    slabs = [log for log in logs if log['message'] == 'Slab converged']

    assert iterations
    assert all(log['level'] == 'DEBUG' for log in iterations)
    assert set(iterations[0]['details']) == {
        'slab', 'iteration', 'residual', 'step',
    }
    assert [log['details']['slab'] for log in slabs] == [0, 1]
    assert all(log['level'] == 'INFO' for log in slabs)
    for log in logs:
        assert log['source'] == 'stdg-tests'
        assert log['module'].startswith('stdg.')
        assert log['errorType'] is None


def test_error_logs(log_file):
    """
    Test if logged errors carry their type and id
    """
    logger = logging.getLogger('stdg.tests')
    try:
        raise errors.NonConvergenceError(3, 1.5, slab=2)
    except errors.NonConvergenceError:
        logger.error('Run aborted', exc_info=True,
                     extra={'details': {'subcommand': 'kep-check'}})

    log = tools.load_jsonlines_file(log_file)[-1]
    assert log['level'] == 'ERROR'
    assert log['errorType'] == 'NonConvergenceError'
    assert log['errorId'] == 'nonconvergence'
    assert 'slab 2' in log['errorInfo']
    assert log['details'] == {'subcommand': 'kep-check'}


def test_handlers_replaced(log_file):
    """
    Configuring the logs again must not duplicate the handlers
    """
    logger = logging.getLogger(stdg_logging.PACKAGE_LOGGER_NAME)
    configuration = stdg.load_run_configuration(config_path)
    stdg_logging.configure_logging(configuration['logs'])
    stdg_logging.configure_logging(configuration['logs'])
    formatted = [
        handler for handler in logger.handlers
        if isinstance(handler.formatter, stdg_logging.RunLogFormatter)
    ]
    assert len(formatted) == 1


def test_invalid_log_directory(tmp_path):
    """
    A log file in a directory that does not exist is rejected
    """
    settings = {
        'file': {
            'path': Path(tmp_path, 'missing', 'stdg.log').as_posix(),
            'max_size_mb': 1,
            'backup_count': 1,
            'level': 'INFO',
        },
        'source_name': 'stdg',
    }
    with pytest.raises(ValueError):
        stdg_logging.configure_logging(settings)
