# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.

"""Options of the command line tool.

The declared options and their defaults live in `config.yaml` at the repository root.
A user file is a flat YAML mapping from option names to values:

    seed: 7
    log-level: INFO
"""

import logging
from collections import namedtuple
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "config.yaml"

_TYPES = {"int": int, "string": str, "boolean": bool}
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

SynthesisConfig = namedtuple("SynthesisConfig", "seed commutator_budget log_level verify")
SynthesisConfig.__doc__ = """Validated option values, with dashes turned into underscores."""


class ConfigError(ValueError):
    """Unknown option, wrongly typed value or unreadable file."""


def load_schema(path: Path = SCHEMA_PATH) -> Dict[str, Dict[str, Any]]:
    """The `options` mapping of the option schema file."""
    try:
        schema = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read option schema {path}: {e}") from e
    return schema["options"]


def _check(name: str, value: Any, declared: str) -> Any:
    expected = _TYPES[declared]
    # YAML booleans load as bool, which is an int subclass
    if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
        raise ConfigError(f"option {name} must be of type {declared}, got {value!r}")
    if name == "log-level" and value.upper() not in LOG_LEVELS:
        raise ConfigError(f"log-level must be one of {', '.join(LOG_LEVELS)}, got {value}")
    if name in ("seed", "commutator-budget") and value < 0:
        raise ConfigError(f"option {name} must be non-negative, got {value}")
    return value.upper() if name == "log-level" else value


def load_config(path: Optional[Path] = None, schema_path: Path = SCHEMA_PATH) -> SynthesisConfig:
    """Read the user file at `path` over the defaults of the schema.

    A missing file, or no path at all, yields the defaults.

    Raises:
        ConfigError: on unreadable YAML, an unknown option or a wrongly typed value.
    """
    schema = load_schema(schema_path)
    values = {name: option["default"] for name, option in schema.items()}
    if path is not None and not path.exists():
        logger.warning("config file %s does not exist, using defaults", path)
    elif path is not None:
        try:
            user = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
        if not isinstance(user, dict):
            raise ConfigError(f"{path} must hold a mapping of option names to values")
        unknown = sorted(set(user) - set(schema))
        if unknown:
            raise ConfigError(f"unknown options in {path}: {', '.join(map(str, unknown))}")
        values.update(user)
    checked = {name: _check(name, values[name], schema[name]["type"]) for name in schema}
    return SynthesisConfig(
        seed=checked["seed"],
        commutator_budget=checked["commutator-budget"],
        log_level=checked["log-level"],
        verify=checked["verify"],
    )
