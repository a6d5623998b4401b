"""Scenario files: ``key = value`` lines with dotted keys for nested sections.

Example::

    # heterogeneous 3-user network
    users = 3
    antennas.n_tx = 2, 1, 3
    antennas.n_rx = 2, 1, 3
    topology.gamma = 0.5
    snr_db = 20, 30, 40
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .channel import AntennaConfig
from .errors import ConfigError

Flat = Dict[str, Any]


def parse_value(text: str) -> Any:
    """int, float, bool, comma-separated tuple or plain string."""

    text = text.strip()
    if "," in text:
        return tuple(parse_value(part) for part in text.split(",") if part.strip())
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def parse_config_text(text: str) -> Dict[str, Any]:
    """Parse scenario text into a nested dict."""

    nested: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not part for part in key.split(".")):
            raise ConfigError(f"line {number}: malformed key '{key}'")
        node = nested
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"line {number}: '{part}' is both a value and a section")
            node = child
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError(f"line {number}: '{key}' is both a value and a section")
        node[parts[-1]] = parse_value(value)
    return nested


def load_config(path: str) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    return parse_config_text(text)


def flatten(nested: Mapping[str, Any], prefix: str = "") -> Flat:
    flat: Flat = {}
    for key, value in nested.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, dotted + "."))
        else:
            flat[dotted] = value
    return flat


def _coerce(key: str, value: Any, default: Any) -> Any:
    if default is None:
        return value
    if isinstance(default, tuple):
        values = value if isinstance(value, tuple) else (value,)
        if default:
            return tuple(_coerce(key, item, default[0]) for item in values)
        return values
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"'{key}' expects true or false, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' expects an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' expects a number, got {value!r}")
        return float(value)
    return str(value)


def resolve(defaults: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> Flat:
    """Merge ``overrides`` (nested or dotted) over ``defaults``; unknown keys are rejected."""

    settings = dict(defaults)
    for key, value in flatten(overrides or {}).items():
        if key not in defaults:
            valid = ", ".join(sorted(defaults))
            raise ConfigError(f"Unknown setting '{key}'. Valid settings: {valid}")
        settings[key] = _coerce(key, value, defaults[key])
    return settings


def _per_user(settings: Mapping[str, Any], key: str, K: int) -> Tuple[int, ...]:
    value = settings[key]
    values = value if isinstance(value, tuple) else (value,)
    if len(values) == 1:
        values = values * K
    if len(values) != K:
        raise ConfigError(f"'{key}' lists {len(values)} values for {K} users")
    return tuple(int(v) for v in values)


def antenna_config(settings: Mapping[str, Any]) -> AntennaConfig:
    """Build the antenna configuration from ``users`` and ``antennas.*`` settings."""

    K = int(settings["users"])
    return AntennaConfig(
        K=K,
        n_tx=_per_user(settings, "antennas.n_tx", K),
        n_rx=_per_user(settings, "antennas.n_rx", K),
        d=_per_user(settings, "antennas.d", K),
    )


def describe(defaults: Mapping[str, Any]) -> str:
    """One ``key = value`` line per default, as accepted in scenario files."""

    lines = []
    for key in sorted(defaults):
        value = defaults[key]
        text = ", ".join(str(v) for v in value) if isinstance(value, tuple) else str(value).lower() if isinstance(value, bool) else str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines)


__all__ = [
    "antenna_config",
    "describe",
    "flatten",
    "load_config",
    "parse_config_text",
    "parse_value",
    "resolve",
]
