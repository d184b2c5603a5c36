"""
Data handling functions for the trawl simulator
===============================================
Scenario file loading, validation and resolution against the defaults
in :mod:`config`, plus the CSV / summary / resolved-config writers used
by every subcommand.
"""

import copy
import json
import logging
import os
from typing import Dict, List, Optional, Tuple

import pandas as pd

from config import (
    SCENARIO_DEFAULTS, LAKE_PRESETS, OUTPUT_CONFIG, VALIDATION_RULES,
    get_lake_preset, get_peak_sun_hours
)
from errors import ConfigError

logger = logging.getLogger(__name__)
if not logger.handlers:
    logger.addHandler(logging.NullHandler())


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_whole(value) -> bool:
    return _is_number(value) and float(value).is_integer()


def _is_pair(value) -> bool:
    return isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value)


def _is_field(value, cell_check) -> bool:
    if not isinstance(value, dict) or 'values' not in value or set(value) - {'values', 'origin', 'cell_size'}:
        return False
    grid = value['values']
    if not isinstance(grid, list) or not grid:
        return False
    if not all(isinstance(row, list) and row and len(row) == len(grid[0]) for row in grid):
        return False
    if not all(cell_check(cell) for row in grid for cell in row):
        return False
    return all(_is_pair(value[k]) for k in ('origin', 'cell_size') if k in value)


# keys whose default does not describe every accepted value: (description, check)
_KEY_SHAPES = {
    ('lake', 'preset'): ("null or a string", lambda v: v is None or isinstance(v, str)),
    ('power', 'preset'): ("null or a string", lambda v: v is None or isinstance(v, str)),
    ('lake', 'fixed_trawls'): ("null or a whole number", lambda v: v is None or _is_whole(v)),
    ('lake', 'target_trawls'): ("null or a whole number", lambda v: v is None or _is_whole(v)),
    ('lake', 'calibration_interval'): ("null or a whole number", lambda v: v is None or _is_whole(v)),
    ('stability', 'coefficients'): (
        "a non-empty list of numbers",
        lambda v: isinstance(v, list) and len(v) > 0 and all(_is_number(c) for c in v)),
    ('stability', 'valid_domain'): ("a list of two numbers", _is_pair),
    ('mission', 'current'): (
        "[vx, vy] or a field object of [vx, vy] cells",
        lambda v: _is_pair(v) or _is_field(v, _is_pair)),
    ('mission', 'concentration'): (
        "a number or a field object of number cells",
        lambda v: _is_number(v) or _is_field(v, _is_number)),
    ('mission', 'start'): ("null or a list of two numbers", lambda v: v is None or _is_pair(v)),
    ('mission', 'boundary'): (
        "null or a list of at least three [x, y] points",
        lambda v: v is None or (isinstance(v, list) and len(v) >= 3 and all(_is_pair(p) for p in v))),
    ('cost', 'items'): (
        "an object of item costs",
        lambda v: isinstance(v, dict) and all(_is_number(c) for c in v.values())),
}


def _type_error(section: str, key: str, value, default) -> Optional[str]:
    if (section, key) in _KEY_SHAPES:
        expected, check = _KEY_SHAPES[(section, key)]
        ok = check(value)
    elif isinstance(default, bool):
        expected, ok = 'bool', isinstance(value, bool)
    elif isinstance(default, int):
        expected, ok = 'a whole number', _is_whole(value)
    elif isinstance(default, float):
        expected, ok = 'float', _is_number(value)
    elif isinstance(default, str):
        expected, ok = 'str', isinstance(value, str)
    else:
        expected, ok = type(default).__name__, isinstance(value, type(default))
    if ok:
        return None
    return f"'{section}.{key}' must be {expected}, got {type(value).__name__} ({value!r})"


def validate_scenario_config(config: Dict) -> Tuple[bool, List[str]]:
    """
    Validate a scenario document against the known sections and keys.

    Args:
        config: Parsed scenario JSON

    Returns:
        Tuple of (is_valid, list_of_errors)
    """
    errors = []

    if not isinstance(config, dict):
        errors.append("Scenario must be a JSON object")
        return False, errors

    for section, values in config.items():
        if section not in VALIDATION_RULES['sections']:
            errors.append(f"Unknown section '{section}'. Valid sections: {VALIDATION_RULES['sections']}")
            continue
        if not isinstance(values, dict):
            errors.append(f"Section '{section}' must be an object")
            continue
        defaults = SCENARIO_DEFAULTS[section]
        for key, value in values.items():
            if key not in defaults:
                errors.append(f"Unknown key '{section}.{key}'")
                continue
            problem = _type_error(section, key, value, defaults[key])
            if problem:
                errors.append(problem)

    lake = config.get('lake', {}) if isinstance(config.get('lake'), dict) else {}
    if lake.get('preset') is not None and str(lake['preset']).lower() not in LAKE_PRESETS:
        errors.append(f"Unknown lake preset '{lake['preset']}'. Choose from {sorted(LAKE_PRESETS)}")
    power = config.get('power', {}) if isinstance(config.get('power'), dict) else {}
    if power.get('preset') is not None:
        try:
            get_peak_sun_hours(power['preset'])
        except KeyError as e:
            errors.append(e.args[0])

    return len(errors) == 0, errors


def load_scenario(path: Optional[str]) -> Dict:
    """
    Load and validate a scenario file.

    Args:
        path: JSON file path, or None for an all-defaults scenario

    Returns:
        The scenario as written (unresolved)

    Raises:
        ConfigError: Missing file, invalid JSON or failed validation
    """
    if path is None:
        return {}
    if not os.path.exists(path):
        raise ConfigError(f"Scenario file not found: {path}")
    try:
        with open(path, 'r') as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Scenario file {path} is not valid JSON: {e}")
    except OSError as e:
        raise ConfigError(f"Cannot read scenario file {path}: {e}")

    is_valid, errors = validate_scenario_config(config)
    if not is_valid:
        raise ConfigError(f"Scenario file {path} failed validation", errors)
    logger.debug(f"load_scenario: {path} with sections {sorted(config)}")
    return config


def resolve_scenario(config: Optional[Dict] = None, seed: Optional[int] = None) -> Dict:
    """
    Overlay a validated scenario on the defaults, applying presets.

    Presets are applied first and explicit fields win over them.  An
    Erie lake preset brings its 802-trawl calibration target along
    unless the scenario fixes an influx or target of its own.

    Returns:
        A fully-resolved scenario with every section and key present
    """
    config = config or {}
    is_valid, errors = validate_scenario_config(config)
    if not is_valid:
        raise ConfigError("Scenario failed validation", errors)

    resolved = copy.deepcopy(SCENARIO_DEFAULTS)
    for section, values in config.items():
        overrides = copy.deepcopy(values)
        if section == 'lake' and overrides.get('preset'):
            preset_name = str(overrides['preset']).lower()
            resolved['lake'].update(get_lake_preset(preset_name))
            target = LAKE_PRESETS[preset_name].get('target_trawls')
            if target is not None and 'daily_influx' not in overrides and 'target_trawls' not in overrides:
                resolved['lake']['target_trawls'] = target
                resolved['lake']['calibration_interval'] = LAKE_PRESETS[preset_name]['deployment_interval']
        if section == 'power' and overrides.get('preset') and 'peak_sun_hours' not in overrides:
            resolved['power']['peak_sun_hours'] = get_peak_sun_hours(overrides['preset'])
        resolved[section].update(overrides)

    if seed is not None:
        resolved['mission']['seed'] = int(seed)
    return resolved


def format_value(value) -> str:
    """Render a summary value; floats use the CSV float format."""
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        return OUTPUT_CONFIG['float_format'] % value
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(format_value(v) for v in value) + ']'
    return str(value)


def write_csv(df: pd.DataFrame, path: str) -> str:
    """Write ``df`` with a header row and 6-significant-digit floats."""
    df.to_csv(path, index=False, float_format=OUTPUT_CONFIG['float_format'],
              lineterminator=OUTPUT_CONFIG['line_terminator'])
    return path


def write_summary(summary: Dict, path: str) -> str:
    """Write ``key: value`` lines in insertion order."""
    with open(path, 'w', newline='') as f:
        for key, value in summary.items():
            f.write(f"{key}: {format_value(value)}{OUTPUT_CONFIG['line_terminator']}")
    return path


def save_resolved_config(config: Dict, path: str) -> str:
    """Echo the resolved scenario next to the outputs."""
    with open(path, 'w', newline='') as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write('\n')
    return path
