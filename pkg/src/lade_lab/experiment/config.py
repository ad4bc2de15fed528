"""Experiment configuration files, overrides, hashing and named seeds.

Config files are TOML written as flat dotted keys, one per line:

    world.C = 10
    train.lr = 0.05
    loss.lambda = 0.1

Unknown keys are hard errors. Keys whose value is unset (None) are omitted
when writing, so a config round-trips through its file losslessly.
"""

import hashlib
import json
import logging
import tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from lade_lab import __version__
from lade_lab.errors import ArtifactError, ConfigError
from lade_lab.schemas import ExperimentConfig, TrainConfig

logger = logging.getLogger(__name__)

HASH_LENGTH = 16
SEED_NAMES = ("train-sample", "test-pool", "test-shift", "val-pool", "init", "order")


# ============================================================================
# Reading and writing
# ============================================================================


def _parse_value(text: str) -> Any:
    """Parse an override value as TOML, falling back to a bare string."""
    try:
        return tomllib.loads(f"value = {text}")["value"]
    except tomllib.TOMLDecodeError:
        return text


def _set_dotted(data: dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    if any(not part for part in parts):
        raise ConfigError(f"malformed key {key!r}")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"key {key!r} descends into non-section {part!r}")
        node = child
    node[parts[-1]] = value


def apply_overrides(data: dict[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """Apply ``key=value`` overrides to a nested config dict in order.

    Raises:
        ConfigError: If an override lacks ``=`` or its key is malformed
    """
    for item in overrides:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        _set_dotted(data, key.strip(), _parse_value(text.strip()))
    return data


def validate_config(data: dict[str, Any]) -> ExperimentConfig:
    """Validate a nested dict; pydantic errors become ConfigError."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from e


def load_config(
    path: Path | None = None,
    overrides: Sequence[str] = (),
    seed: int | None = None,
    out: str | Path | None = None,
) -> ExperimentConfig:
    """Build an ExperimentConfig from an optional file plus command-line overrides.

    Args:
        path: Flat dotted-key TOML file (defaults only when None)
        overrides: ``key=value`` strings applied after the file
        seed: Replaces run.seed when given
        out: Replaces run.out when given

    Raises:
        ConfigError: On unreadable syntax, unknown keys or invalid values
        ArtifactError: If the file cannot be read
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            with Path(path).open("rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
        except OSError as e:
            raise ArtifactError(f"cannot read config {path}: {e.strerror}") from e

    apply_overrides(data, overrides)
    if seed is not None:
        _set_dotted(data, "run.seed", seed)
    if out is not None:
        _set_dotted(data, "run.out", str(out))
    return validate_config(data)


def with_values(config: ExperimentConfig, updates: dict[str, Any]) -> ExperimentConfig:
    """Copy of config with dotted keys replaced, re-validated as a whole."""
    data = config.model_dump(mode="json", by_alias=True)
    for key, value in updates.items():
        _set_dotted(data, key, value)
    return validate_config(data)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise ConfigError(f"cannot write value {value!r} of type {type(value).__name__}")


def _flatten(data: dict[str, Any], prefix: str = "") -> list[tuple[str, Any]]:
    items: list[tuple[str, Any]] = []
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, f"{dotted}."))
        elif value is not None:
            items.append((dotted, value))
    return items


def dump_config(config: ExperimentConfig) -> str:
    """Flat dotted-key TOML text for a config."""
    data = config.model_dump(mode="json", by_alias=True)
    return "".join(f"{key} = {_format_value(value)}\n" for key, value in _flatten(data))


# ============================================================================
# Identity and seeds
# ============================================================================


def config_hash(config: ExperimentConfig) -> str:
    """First 16 hex digits of SHA-256 over the canonical config JSON.

    run.out is excluded so that moving an experiment does not change its identity.
    """
    data = config.model_dump(mode="json", by_alias=True)
    data["run"].pop("out", None)
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:HASH_LENGTH]


def header_line(digest: str) -> str:
    """Comment line that opens every artifact."""
    return f"# config_hash={digest} version={__version__}"


def sub_seed(run_seed: int, name: str) -> int:
    """Independent 63-bit seed for a named source of randomness.

    Raises:
        ConfigError: If name is not a known stream
    """
    if name not in SEED_NAMES:
        raise ConfigError(f"unknown seed stream {name!r}; expected one of {SEED_NAMES}")
    digest = hashlib.sha256(f"{run_seed}/{name}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def train_config(config: ExperimentConfig) -> TrainConfig:
    """Training-loop settings: optimizer section, loss section and the order seed."""
    return TrainConfig(
        **config.train.model_dump(),
        seed=sub_seed(config.run.seed, "order"),
        loss=config.loss,
    )
