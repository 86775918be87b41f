"""
Entropy-stable space-time discontinuous Galerkin spectral element methods
(stdg). This module loads and validates run configurations; the numerical
building blocks live in the submodules.


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
import copy
import os

import fastjsonschema
from yaml import YAMLError

from . import errors, yaml

module_dir = Path(__file__).absolute().parent

# Load the schema to validate configuration files against
_schema_path = Path(module_dir, 'schemas/stdg-configuration.yaml')
_configuration_schema = yaml.safe_load_file(_schema_path)
_validate = fastjsonschema.compile(_configuration_schema)

_presets_path = Path(module_dir, 'presets.yaml')

CONFIG_ENV_VAR = 'STDG_CONFIG'
THREADS_ENV_VAR = 'STDG_THREADS'


def load_run_configuration(path: Path | None = None) -> dict:
    """
    Returns the parsed and validated contents of a run configuration file

    Args:
        path:
            The YAML file to load. If omitted, the file named by the
            STDG_CONFIG environment variable is used, and if that is not set
            either, the default configuration is returned

    Returns:
        The configuration, with defaults filled for missing properties

    Raises:
        ConfigurationError:
            In case the file does not exist, cannot be parsed, references an
            undefined environment variable or fails validation
    """
    if path is None:
        if CONFIG_ENV_VAR not in os.environ:
            return validate_configuration({})
        path = Path(os.environ[CONFIG_ENV_VAR])

    path = Path(path).absolute()
    if not path.is_file():
        raise errors.ConfigurationError(
            f'The configuration file {path.as_posix()} does not exist!'
        )

    try:
        configuration_data = yaml.load_run_file(path)
    except (KeyError, YAMLError) as e:
        raise errors.ConfigurationError(
            f'Could not parse {path.as_posix()}: {e}'
        ) from e
    if configuration_data is None:
        configuration_data = {}

    return validate_configuration(configuration_data)


def validate_configuration(configuration_data: dict) -> dict:
    """
    Returns the configuration data, validated according to the JSON-schema,
    with defaults filled for missing properties

    Raises:
        ConfigurationError: In case the data fails validation
    """
    try:
        return _validate(copy.deepcopy(configuration_data))
    except fastjsonschema.JsonSchemaValueException as e:
        raise errors.ConfigurationError(
            f'Invalid run configuration: {e.message}'
        ) from e


def load_presets() -> dict:
    """
    Returns the experiment presets (grid ladders and configuration tables)
    """
    return yaml.safe_load_file(_presets_path)


def get_thread_count() -> int:
    """
    Returns the number of concurrent ladder runs, read from STDG_THREADS
    (default 1)

    Raises:
        ConfigurationError: In case STDG_THREADS is not a positive integer
    """
    value = os.environ.get(THREADS_ENV_VAR, '1')
    try:
        threads = int(value)
    except ValueError:
        threads = 0
    if threads < 1:
        raise errors.ConfigurationError(
            f'{THREADS_ENV_VAR} must be a positive integer, got {value!r}'
        )
    return threads
