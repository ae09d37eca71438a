import json
import logging
import os
from typing import Any, Optional

from stablefluct.api.run import RunConfig
from stablefluct.model import StableFluctError

SEED_ENV = "STABLEFLUCT_SEED"

logger = logging.getLogger("stablefluct")


class ConfigError(StableFluctError):
    """Error raised when a config file or the seed environment variable cannot be used.

    Attributes:
      source: Path or variable name the bad value came from.
    """

    def __init__(self, message: str, source: str):
        super().__init__(message)
        self.source = source


def get_default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}", SEED_ENV)


def _normalise_key(key: str) -> str:
    key = key.lstrip("-").replace("-", "_")
    return "lam" if key == "lambda" else key


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}", path)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e.msg} at line {e.lineno}", path)
    if not isinstance(document, dict):
        raise ConfigError(f"config {path} must hold a JSON object", path)
    logger.info(f"loaded {len(document)} keys from {path}")
    return {_normalise_key(k): v for k, v in document.items()}


def resolve(command: str, flags: dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """Merge the seed default, the config file and the explicit flags, in that order."""
    merged: dict[str, Any] = {"seed": get_default_seed()}
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update({_normalise_key(k): v for k, v in flags.items()})
    merged["command"] = command
    return RunConfig.model_validate(merged)
