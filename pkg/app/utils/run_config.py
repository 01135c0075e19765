"""
Run configuration: built-in defaults, then a YAML file, then explicit command-line flags.
"""

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import typer
import yaml
from loguru import logger

ENV_OUTPUT_DIR = "SUBCRITICAL_GK_OUTPUT_DIR"
FORMATS = ("csv", "json")
TAIL_CHOICES = ("lemma", "fitted")

# YAML key -> RunConfig field
YAML_KEYS = {
    "k": "k",
    "n_max": "n_max",
    "trunc": "trunc_order",
    "tol": "tolerance",
    "jobs": "parallelism",
    "format": "output_format",
    "out": "output_path",
    "oracle_n": "oracle_n",
    "tail": "tail_constant",
}


def output_dir() -> Path:
    """Default directory for outputs and logs: $SUBCRITICAL_GK_OUTPUT_DIR or the working directory."""
    env_dir = os.getenv(ENV_OUTPUT_DIR)
    return Path(env_dir) if env_dir else Path.cwd()


@dataclass(frozen=True)
class RunConfig:
    command: str
    k: int = 4
    n_max: int = 6
    trunc_order: int = 50
    tolerance: float = 1e-10
    parallelism: int = 1
    output_format: str = "csv"
    output_path: Path | None = None
    oracle_n: int = 6
    tail_constant: str = "lemma"

    @classmethod
    def build(cls, command: str, config_path: str | None = None, **flags: Any) -> "RunConfig":
        """Merge defaults, the YAML file and the flags that were given (None means not given)."""
        config = cls(command=command)
        if config_path:
            config = replace(config, **load_yaml(config_path))
        given = {name: value for name, value in flags.items() if value is not None}
        unknown = set(given) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown configuration fields {sorted(unknown)}")
        config = replace(config, **given)
        if config.output_path is not None:
            config = replace(config, output_path=Path(config.output_path))
        config.validate()
        return config

    def validate(self) -> None:
        if self.k < 0:
            raise typer.BadParameter(f"k must be non-negative, got {self.k}")
        if self.trunc_order < 1:
            raise typer.BadParameter(f"truncation order must be at least 1, got {self.trunc_order}")
        if self.tolerance <= 0:
            raise typer.BadParameter(f"tolerance must be positive, got {self.tolerance}")
        if self.parallelism < 1:
            raise typer.BadParameter(f"jobs must be at least 1, got {self.parallelism}")
        if self.output_format not in FORMATS:
            raise typer.BadParameter(f"format must be one of {FORMATS}, got {self.output_format!r}")
        if self.tail_constant not in TAIL_CHOICES:
            raise typer.BadParameter(f"tail must be one of {TAIL_CHOICES}, got {self.tail_constant!r}")
        if not 4 <= self.oracle_n <= 8:
            raise typer.BadParameter(f"oracle_n must lie in 4..8, got {self.oracle_n}")
        if self.n_max < 1:
            raise typer.BadParameter(f"n_max must be positive, got {self.n_max}")

    def resolve_output(self) -> Path | None:
        """``output_path`` with relative paths taken from the output directory."""
        if self.output_path is None:
            return None
        path = Path(self.output_path)
        return path if path.is_absolute() else output_dir() / path


def load_yaml(config_path: str) -> dict[str, Any]:
    try:
        with open(config_path) as f:
            config_data = yaml.safe_load(f) or {}
        logger.info("Configuration loaded from {}", config_path)
    except Exception as e:
        logger.error("Error reading configuration file {}: {}", config_path, e)
        raise typer.Exit(code=1) from e
    if not isinstance(config_data, dict):
        logger.error("Configuration file {} does not hold a mapping", config_path)
        raise typer.Exit(code=1)
    unknown = set(config_data) - set(YAML_KEYS)
    if unknown:
        raise typer.BadParameter(f"unknown configuration keys {sorted(unknown)} in {config_path}")
    return {YAML_KEYS[key]: value for key, value in config_data.items()}
