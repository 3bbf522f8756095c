"""Plain-text `key = value` configuration with [section] headers, and the
run manifest.  The parser reports the offending line number on errors so the
CLI can exit with a usable diagnostic."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["ConfigError", "parse_config", "get_typed", "RunManifest"]

MANIFEST_SCHEMA_VERSION = 1
ARTIFACT_VERSION = "0.1.0"


class ConfigError(Exception):
    def __init__(self, message: str, line_no: int | None = None, line: str = ""):
        self.line_no = line_no
        self.line = line
        loc = f" (line {line_no}: {line.strip()!r})" if line_no is not None else ""
        super().__init__(message + loc)


def parse_config(path: str | Path) -> dict:
    """Sections of key = value pairs; values stay strings, typed on access."""
    sections: dict[str, dict[str, str]] = {}
    current = None
    text = Path(path).read_text()
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ConfigError("empty section name", no, raw)
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", no, raw)
        if current is None:
            raise ConfigError("key outside any [section]", no, raw)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", no, raw)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", no, raw)
        sections[current][key] = value
    return sections


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def get_typed(sections: dict, section: str, key: str, typ, default=None):
    sec = sections.get(section, {})
    if key not in sec:
        return default
    raw = sec[key]
    try:
        if typ is bool:
            return _BOOL[raw.lower()]
        return typ(raw)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"cannot parse [{section}] {key} = {raw!r} as {typ.__name__}") from exc


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    outputs: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    wall_seconds: float = 0.0
    artifact_version: str = ARTIFACT_VERSION
    schema_version: int = MANIFEST_SCHEMA_VERSION

    def add_output(self, path: str | Path):
        self.outputs.append(str(path))

    def write(self, path: str | Path):
        payload = {
            "schema_version": self.schema_version,
            "artifact_version": self.artifact_version,
            "subcommand": self.subcommand,
            "config": self.config,
            "outputs": sorted(self.outputs),
            "verdicts": self.verdicts,
            "wall_seconds": round(self.wall_seconds, 3),
        }
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False
