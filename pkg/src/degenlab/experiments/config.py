"""Flat scenario configuration: one `section.key = value` per line.

The format is deliberately line-oriented so that sweep configs diff
cleanly: no nesting, no continuation lines.  Values are booleans
(true/false), integers, floats, bare words, or bracketed lists of
those.  `#` starts a comment anywhere on a line.

    scenario.name = trace-sweep
    scenario.measurements = [rayleigh]
    grid.cells = [64, 64]
    problem.a = 0.5
    sweep.eps = [1.0, 0.1, 0.0]

Parsing keeps the source line of every key so later validation can
point at the offending line, not just the offending field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError

__all__ = ["ConfigMap", "parse_config", "parse_config_text"]


def _scalar(token: str, where: str):
    low = token.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    if token and all(c.isalnum() or c in "_-./" for c in token):
        return token
    raise ConfigError(f"{where}: cannot read value {token!r}")


@dataclass
class ConfigMap:
    """Parsed key/value pairs plus the line each came from."""

    source: str
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    used: set = field(default_factory=set)

    def where(self, key: str) -> str:
        line = self.lines.get(key)
        return f"{self.source}:{line}" if line else self.source

    def get(self, key: str, default=None, required=False, kind=None):
        if key not in self.values:
            if required:
                raise ConfigError(f"{self.source}: missing required key {key}")
            return default
        self.used.add(key)
        val = self.values[key]
        if kind is not None and not isinstance(val, kind):
            if kind is float and isinstance(val, int):
                return float(val)
            wanted = getattr(kind, "__name__", str(kind))
            raise ConfigError(
                f"{self.where(key)}: {key} must be {wanted}, "
                f"got {val!r}")
        return val

    def get_list(self, key: str, default=None, required=False):
        val = self.get(key, default=default, required=required)
        if val is None or isinstance(val, list):
            return val
        raise ConfigError(f"{self.where(key)}: {key} must be a [list]")

    def section(self, name: str) -> dict:
        prefix = name + "."
        out = {}
        for key in self.values:
            if key.startswith(prefix):
                out[key[len(prefix):]] = self.get(key)
        return out

    def unused_keys(self):
        return sorted(set(self.values) - self.used)


def parse_config_text(text: str, source: str = "<config>") -> ConfigMap:
    cfg = ConfigMap(source=source)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected `section.key = value`")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if "." not in key or not all(p.strip() for p in key.split(".")):
            raise ConfigError(f"{where}: key {key!r} needs a section prefix")
        if key in cfg.values:
            first = cfg.lines[key]
            raise ConfigError(f"{where}: duplicate key {key} "
                              f"(first set on line {first})")
        if rhs.startswith("["):
            if not rhs.endswith("]"):
                raise ConfigError(f"{where}: unterminated list")
            body = rhs[1:-1].strip()
            items = [t.strip() for t in body.split(",")] if body else []
            value = [_scalar(t, where) for t in items if t != ""]
        elif not rhs:
            raise ConfigError(f"{where}: empty value for {key}")
        else:
            value = _scalar(rhs, where)
        cfg.values[key] = value
        cfg.lines[key] = lineno
    return cfg


def parse_config(path) -> ConfigMap:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))
