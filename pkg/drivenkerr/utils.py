"""
Utility functions for drivenkerr.
"""

import os
import sys
import json
import math
import logging
import warnings
from datetime import datetime
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
import yaml

from .config import CSV_FLOAT_FORMAT, JSON_INDENT, DEFAULTS
from .errors import ConfigError, RegimeWarning

logger = logging.getLogger("drivenkerr")
logger.addHandler(logging.NullHandler())

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(log_dir: Optional[str] = DEFAULTS['LOG_DIR'],
                  debug: bool = False) -> logging.Logger:
    """
    Attach file and console handlers to the package logger.

    Args:
        log_dir: Directory for the daily log file, or None to skip file logging
        debug: Whether the console handler should show DEBUG records

    Returns:
        The configured package logger
    """
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        if not isinstance(handler, logging.NullHandler):
            logger.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(_FORMAT)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        log_file = os.path.join(log_dir, f"drivenkerr_{datetime.now().strftime('%Y%m%d')}.log")
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if debug else logging.WARNING)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)
    return logger


def warn_regime(message: str, stacklevel: int = 3) -> None:
    """Emit a regime-validity warning through both logging and the warnings module."""
    logger.warning(message)
    warnings.warn(message, RegimeWarning, stacklevel=stacklevel)


# Unit conversions. Internal frequencies are angular and measured in units of alpha.

def to_hz(value: float, alpha_hz: float) -> float:
    """Convert an internal frequency (units of alpha) to Hz (f = omega / 2 pi)."""
    return value * alpha_hz


def from_hz(value_hz: float, alpha_hz: float) -> float:
    """Convert a frequency in Hz to internal units of alpha."""
    return value_hz / alpha_hz


def us_to_internal(t_us, alpha_hz: float):
    """Convert microseconds to internal time (units of 1/alpha, alpha angular)."""
    return np.asarray(t_us, dtype=float) * 1e-6 * 2.0 * np.pi * alpha_hz


def internal_to_us(t, alpha_hz: float):
    """Convert internal time back to microseconds."""
    return np.asarray(t, dtype=float) / (1e-6 * 2.0 * np.pi * alpha_hz)


def gauge_fix(vectors: np.ndarray) -> np.ndarray:
    """
    Fix the global phase of each column so its largest-magnitude component is real positive.

    Args:
        vectors: Matrix whose columns are state vectors

    Returns:
        Phase-fixed copy of the matrix
    """
    vectors = np.array(vectors, dtype=complex, copy=True)
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return vectors / phases[np.newaxis, :]


def falling_factorial(n: int, k: int) -> float:
    """n!/(n-k)!, the value of the normal-ordered power :N^k: on Fock state n."""
    if k > n:
        return 0.0
    return float(math.perm(n, k))


def double_factorial(n: int) -> float:
    """Double factorial extended to odd negatives: (-1)!! = 1, (-3)!! = -1."""
    if n == -1 or n == 0:
        return 1.0
    if n == -3:
        return -1.0
    if n < -3:
        raise ValueError(f"double factorial undefined for {n}")
    result = 1.0
    while n > 1:
        result *= n
        n -= 2
    return result


def write_csv(frame: pd.DataFrame, path: str) -> str:
    """Write a DataFrame as full-precision CSV and return the path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': float(value.real), 'im': float(value.imag)}
    return value


def write_json(data: Any, path: str) -> str:
    """Write data as sorted, indented JSON and return the path."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=JSON_INDENT, sort_keys=True)
        fh.write("\n")
    logger.debug(f"Wrote JSON to {path}")
    return path


def load_config(path: str) -> Dict[str, Any]:
    """
    Load a run configuration from JSON (or YAML by extension).

    Args:
        path: Path to the configuration document

    Returns:
        Parsed configuration mapping

    Raises:
        ConfigError: When the file is missing, unparsable or not a mapping
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {str(e)}")

    if path.endswith((".yaml", ".yml")):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, 'problem_mark', None)
            raise ConfigError(f"invalid YAML: {str(e)}", line=mark.line + 1 if mark else None)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", line=e.lineno)

    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    return data
