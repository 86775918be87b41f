"""
YAML loading of run configuration files and package data files. Run
configurations may use the '!stdg-expand-env' tag, which substitutes
environment variables in a scalar, e.g. for log paths.


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
from typing import Any
import os
import re

from yaml import Node, SafeLoader, safe_load

EXPAND_ENV_TAG = '!stdg-expand-env'
_ENV_VAR_PATTERN = re.compile(r'\$\{([^}^{]+)\}')


def _environment_variable(match: re.Match) -> str:
    """
    Raises:
        KeyError naming the variable, if it is not set
    """
    name = match.group(1)
    try:
        return os.environ[name]
    except KeyError:
        raise KeyError(f'Environment Variable {name} not defined!') from None


class RunConfigLoader(SafeLoader):
    """
    SafeLoader for run configuration files, which remembers the file it reads
    and expands environment variables in '!stdg-expand-env' scalars
    """
    def __init__(self, stream, filepath: Path):
        self.filepath = filepath
        super().__init__(stream)

    def expand_env(self, node: Node) -> str:
        return _ENV_VAR_PATTERN.sub(
            _environment_variable, self.construct_scalar(node)
        )


RunConfigLoader.add_constructor(EXPAND_ENV_TAG, RunConfigLoader.expand_env)


def load_run_file(path: Path) -> Any:
    """
    Load a run configuration file

    Args:
        path: The YAML file to load

    Returns:
        The loaded data, None for an empty file

    Raises:
        KeyError: In case an expanded environment variable is not set
        yaml.YAMLError: In case the file is not valid YAML
    """
    with open(path, 'r', encoding='utf8') as yamlfile:
        loader = RunConfigLoader(yamlfile, filepath=path)
        try:
            return loader.get_single_data()
        finally:
            loader.dispose()


def safe_load_file(path: Path) -> Any:
    """
    Loads a package data file (schema or presets) with the pyyaml SafeLoader
    """
    with open(path, 'r', encoding='utf8') as yamlfile:
        return safe_load(yamlfile)
