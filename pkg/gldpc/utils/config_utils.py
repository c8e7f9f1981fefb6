import logging
import os
from typing import Any, Dict, Optional

from pydantic import ValidationError

from gldpc.schemas.experiment_schema import ExperimentConfig
from gldpc.storage.files import read_text
from gldpc.utils.exceptions import InvalidParameterError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "GLDPC_OUTPUT_DIR"

LIST_KEYS = {"snr_grid", "schedules", "zeta"}


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    Parse flat `key = value` lines. `#` starts a comment; list keys take comma-separated
    values. Values stay strings and are coerced by ExperimentConfig.

    Raises:
        InvalidParameterError: On a line without '=' or a repeated key.
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or not key:
            raise InvalidParameterError(f"config line {number}: expected 'key = value'")
        if key in values:
            raise InvalidParameterError(f"config line {number}: duplicate key '{key}'")
        if key in LIST_KEYS:
            values[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            values[key] = value
    return values


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
                ) -> ExperimentConfig:
    """
    Resolve the experiment config: flags (overrides) > config file > environment >
    compiled defaults. Overrides whose value is None are ignored.
    """
    values: Dict[str, Any] = {}
    env_output = os.getenv(OUTPUT_DIR_ENV)
    if env_output:
        values["output_dir"] = env_output
    if path:
        values.update(parse_config_text(read_text(path)))
        logger.debug("loaded config file %s", path)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise InvalidParameterError(f"invalid configuration: {e}")
