"""Configuration management for restricted Monte Carlo experiments."""

import json
import os
from collections.abc import Mapping
from pathlib import Path
from typing import Any, cast

from dotenv import load_dotenv

from restricted_mc.algebra import ARITHMETIC_MODES, ArithmeticMode
from restricted_mc.models import ExperimentConfig

# Load environment variables from .env file
load_dotenv()

SUBCOMMANDS = ("verify", "derandomize", "rates", "bounds")
PROBLEM_KINDS = ("grid", "lipschitz")


def parse_seeds(value: str | int | list[int]) -> list[int]:
    """Parse a seed list: ``"0:100"`` (half-open range), ``"1,2,7"`` or a single integer.

    Args:
        value: Seed specification

    Returns:
        List of seeds

    Raises:
        ValueError: If the specification is malformed or empty
    """
    if isinstance(value, list):
        seeds = [int(v) for v in value]
    elif isinstance(value, int):
        seeds = [value]
    elif ":" in value:
        start, _, stop = value.partition(":")
        try:
            seeds = list(range(int(start), int(stop)))
        except ValueError:
            msg = f"Invalid seed range '{value}', expected 'start:stop'"
            raise ValueError(msg) from None
    else:
        try:
            seeds = [int(part) for part in value.split(",") if part.strip()]
        except ValueError:
            msg = f"Invalid seed list '{value}', expected comma-separated integers"
            raise ValueError(msg) from None
    if not seeds:
        msg = f"Seed specification '{value}' is empty"
        raise ValueError(msg)
    return seeds


def parse_n_values(value: str | int | list[int]) -> list[int]:
    """Parse ``--n``: a single integer, ``"1,2,4"`` or ``"8:257:2x"`` (doubling from 8 below 257).

    Raises:
        ValueError: If the specification is malformed
    """
    if isinstance(value, int):
        return [value]
    if isinstance(value, list):
        return [int(v) for v in value]
    if value.endswith("x") and value.count(":") == 2:
        start, stop, factor = value[:-1].split(":")
        current, limit, step = int(start), int(stop), int(factor)
        if current < 1 or step < 2:
            msg = f"Geometric range '{value}' needs start >= 1 and factor >= 2"
            raise ValueError(msg)
        values: list[int] = []
        while current < limit:
            values.append(current)
            current *= step
        return values
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        msg = f"Invalid value list '{value}'"
        raise ValueError(msg) from None


def load_config_from_file(config_path: str | Path) -> dict[str, Any]:
    """Load configuration values from JSON file.

    Args:
        config_path: Path to configuration JSON file

    Returns:
        Mapping of configuration keys to raw values

    Raises:
        FileNotFoundError: If config file doesn't exist
        ValueError: If config file is not a JSON object
    """
    config_file = Path(config_path)

    if not config_file.exists():
        msg = f"Configuration file not found: {config_path}"
        raise FileNotFoundError(msg)

    with config_file.open(encoding="utf-8") as f:
        try:
            config_data = json.load(f)
        except json.JSONDecodeError as e:
            msg = f"Configuration file {config_path} is not valid JSON: {e}"
            raise ValueError(msg) from e

    if not isinstance(config_data, dict):
        msg = f"Configuration file {config_path} must contain a JSON object"
        raise ValueError(msg)
    return cast("dict[str, Any]", config_data)


def _load_env_vars() -> dict[str, str]:
    """Environment overrides that are set.

    Returns:
        Dictionary of configuration keys to raw environment values
    """
    names = {"seeds": "RMC_SEEDS", "mode": "RMC_MODE", "samples": "RMC_SAMPLES", "out": "RMC_OUTPUT"}
    return {key: value for key, name in names.items() if (value := os.getenv(name))}


def _validate_config(config: ExperimentConfig) -> None:
    """Validate merged configuration.

    Raises:
        ValueError: If a value is out of range or unknown
        FileNotFoundError: If a referenced strategy or family file is missing
    """
    if config.subcommand not in SUBCOMMANDS:
        msg = f"Unknown subcommand '{config.subcommand}', expected one of {', '.join(SUBCOMMANDS)}"
        raise ValueError(msg)
    if config.mode not in ARITHMETIC_MODES:
        msg = f"Unknown arithmetic mode '{config.mode}', expected rational or float"
        raise ValueError(msg)
    if config.problem is not None and config.problem not in PROBLEM_KINDS:
        msg = f"Unknown problem '{config.problem}', expected grid or lipschitz"
        raise ValueError(msg)
    if not config.seeds:
        msg = "At least one seed is required"
        raise ValueError(msg)
    if any(n < 0 for n in config.n) or (config.k is not None and config.k < 0):
        msg = f"Budgets must be nonnegative, got n={config.n}, k={config.k}"
        raise ValueError(msg)
    if config.m is not None and config.m < 1:
        msg = f"Grid size must be >= 1, got {config.m}"
        raise ValueError(msg)
    if config.samples is not None and config.samples < 2:
        msg = f"At least 2 samples are required, got {config.samples}"
        raise ValueError(msg)
    if config.strategy and config.strategy.endswith(".json") and not Path(config.strategy).exists():
        msg = f"Strategy file not found: {config.strategy}"
        raise FileNotFoundError(msg)
    if isinstance(config.family, str) and not Path(config.family).exists():
        msg = f"Family file not found: {config.family}"
        raise FileNotFoundError(msg)


def _coerce(values: Mapping[str, Any]) -> dict[str, Any]:
    """Convert raw file, environment or flag values to ExperimentConfig field types."""
    kwargs: dict[str, Any] = {}
    for key, value in values.items():
        if value is None:
            continue
        if key == "seeds":
            kwargs[key] = parse_seeds(value)
        elif key == "n":
            kwargs[key] = parse_n_values(value)
        elif key in {"m", "k", "samples"}:
            kwargs[key] = int(value)
        elif key == "bits":
            kwargs[key] = str(value)
        elif key in {"strategy_params", "bound_params"}:
            kwargs[key] = dict(value)
        else:
            kwargs[key] = value
    return kwargs


def create_config(args: Mapping[str, Any], config_path: str | Path | None = None) -> ExperimentConfig:
    """Merge defaults, config file, environment and flags into an ExperimentConfig.

    Precedence is flags over environment over file over defaults.

    Args:
        args: Command-line values; ``None`` means the flag was not given
        config_path: Optional JSON configuration file

    Returns:
        Validated ExperimentConfig

    Raises:
        FileNotFoundError: If a referenced file doesn't exist
        ValueError: If a value is invalid
    """
    known = set(ExperimentConfig.__dataclass_fields__)
    merged: dict[str, Any] = {}
    if config_path is not None:
        raw_values = load_config_from_file(config_path)
        file_values = {key: value for key, value in raw_values.items() if not key.startswith("_")}
        unknown = sorted(set(file_values) - known)
        if unknown:
            msg = f"Unknown configuration keys: {', '.join(unknown)}"
            raise ValueError(msg)
        merged.update(_coerce(file_values))
    merged.update(_coerce(_load_env_vars()))
    merged.update(_coerce({key: value for key, value in args.items() if key in known}))

    if "mode" in merged:
        merged["mode"] = cast("ArithmeticMode", str(merged["mode"]))
    config = ExperimentConfig(**merged)
    _validate_config(config)
    return config
