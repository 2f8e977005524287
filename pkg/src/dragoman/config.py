"""Flat key=value config files (one `key = value` per line, `#` comments)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

from .errors import ConfigError


def read_kv(path: str | Path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if not key:
                raise ConfigError(f"{path}:{line_no}: empty key")
            if key in values:
                raise ConfigError(f"{path}:{line_no}: duplicate key '{key}'")
            values[key] = value.strip()
    return values


def write_kv(path: str | Path, values: Mapping[str, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in values.items():
            fh.write(f"{key} = {value}\n")


def parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")
