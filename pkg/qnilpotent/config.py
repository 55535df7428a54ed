"""Tunables for the solvers and enumerations, with JSON file overrides."""
import copy
import json
from os.path import isfile
from typing import Any, Dict, Optional

from ovos_utils.json_helper import merge_dict

from qnilpotent.exceptions import DomainError

try:
    from ovos_utils.log import LOG
except ImportError:
    from logging import getLogger
    LOG = getLogger("qnilpotent")

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    "growth": {
        "element_budget": 5_000_000,
        "n_jobs": 1,
        "max_residual": 0.05,
        "min_radius": 5,
    },
    "ccdist": {
        "max_iter": 200,
        "samples": 33,
    },
    "maxent": {
        "tol": 1e-10,
        "max_iter": 200,
    },
    "curvature": {
        "step": 1e-4,
    },
    "volume": {
        "samples": 400_000,
    },
}


def load_config(path: Optional[str] = None,
                overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Dict[str, Any]]:
    """Build the effective configuration.

    Args:
        path: Optional JSON file whose sections are merged over the defaults.
        overrides: Optional dict merged last, e.g. values from CLI flags.

    Returns:
        A fresh dict; ``DEFAULT_CONFIG`` is never mutated.

    Raises:
        FileNotFoundError: when ``path`` does not exist.
        DomainError: when the file is not a JSON object.
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path:
        if not isfile(path):
            LOG.error(f"Config file not found: {path}")
            raise FileNotFoundError(path)
        with open(path) as f:
            try:
                user = json.load(f)
            except json.JSONDecodeError as e:
                raise DomainError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(user, dict):
            raise DomainError(f"config file {path} must hold a JSON object")
        LOG.debug(f"Loaded config overrides from {path}: {sorted(user)}")
        config = merge_dict(config, user)
    if overrides:
        config = merge_dict(config, overrides)
    return config


def setting(value: Any, name: str, key: str) -> Any:
    """``value`` if it was given, the default ``DEFAULT_CONFIG[name][key]`` otherwise.

    Only ``None`` counts as not given, so zero or negative values reach the
    caller's own validation.
    """
    return DEFAULT_CONFIG[name][key] if value is None else value


def section(config: Optional[Dict[str, Any]], name: str) -> Dict[str, Any]:
    """Return one config section, falling back to the defaults."""
    config = config or DEFAULT_CONFIG
    return config.get(name) or DEFAULT_CONFIG.get(name, {})
