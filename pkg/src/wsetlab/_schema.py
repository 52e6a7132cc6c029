"""Strict-record helpers for JSON literals."""

from __future__ import annotations


class ConfigError(ValueError):
    """Schema violation; ``where`` is a dotted field path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def strict(d, required, where, optional=()):
    if not isinstance(d, dict):
        raise ConfigError(where, f"expected an object, got {type(d).__name__}")
    allowed = set(required) | set(optional)
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}", "unknown field")
    for key in required:
        if key not in d:
            raise ConfigError(f"{where}.{key}", "missing required field")
    return d
