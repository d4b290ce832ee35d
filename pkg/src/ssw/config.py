"""Run configuration: a small key=value grammar with line-numbered errors.

One ``key=value`` pair per line, ``#`` starts a comment, blank lines are
ignored.  Keys of the form ``params.NAME`` override case parameters, e.g.
``params.Cf=0.0036``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .grid import CASES, list_cases, split_overrides
from .riemann import SOLVERS


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if isinstance(line, int) else (f"{line}: " if line else "")
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    case: str
    solver: str = "hllc5"
    order: int = 2
    nx: Optional[int] = None
    ny: Optional[int] = None
    cfl: float = 0.5
    theta: Optional[float] = None
    beta: float = 1.0
    t_end: Optional[float] = None
    snapshot_every: float = 0.0
    out_dir: str = "out"
    levels: int = 3
    overrides: dict = field(default_factory=dict)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise ValueError("must be a positive integer")
    return v


def _in_range(lo, hi, lo_open=False):
    def conv(s):
        v = float(s)
        ok = (v > lo if lo_open else v >= lo) and v <= hi
        if not ok:
            left = "(" if lo_open else "["
            raise ValueError(f"must lie in {left}{lo}, {hi}]")
        return v
    return conv


def _non_negative(s):
    v = float(s)
    if not v >= 0:
        raise ValueError("must be non-negative")
    return v


def _choice(options, cast=str):
    def conv(s):
        v = cast(s)
        if v not in options:
            raise ValueError(f"{s!r} is not one of {list(options)}")
        return v
    return conv


def _case(s):
    if s not in CASES:
        raise ValueError(f"unknown case {s!r}; available: {list_cases()}")
    return s


FIELDS = {
    "case": _case,
    "solver": _choice(SOLVERS),
    "order": _choice((1, 2), int),
    "nx": _positive_int,
    "ny": _positive_int,
    "cfl": _in_range(0.0, 1.0, lo_open=True),
    "theta": _in_range(0.0, 1.0),
    "beta": _in_range(1.0, 2.0),
    "t_end": _non_negative,
    "snapshot_every": _non_negative,
    "out_dir": str,
    "levels": _positive_int,
}


def parse_items(items):
    """Validate ``(key, value, line)`` triples into a dict of typed values."""
    values, overrides, seen = {}, {}, {}
    for key, raw, line in items:
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})", line)
        seen[key] = line
        if key.startswith("params."):
            name = key[len("params."):]
            if not name:
                raise ConfigError("empty parameter name after 'params.'", line)
            try:
                overrides[name] = (float(raw), line)
            except ValueError:
                raise ConfigError(f"cannot parse value {raw!r} for {key}", line) from None
            continue
        if key not in FIELDS:
            raise ConfigError(f"unknown key {key!r}; known keys: {sorted(FIELDS)} or params.NAME", line)
        try:
            values[key] = FIELDS[key](raw)
        except ValueError as err:
            raise ConfigError(f"bad value {raw!r} for {key}: {err}", line) from None
    return values, overrides


def split_line(text, line):
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    if "=" not in body:
        raise ConfigError(f"expected key=value, got {body!r}", line)
    key, value = body.split("=", 1)
    key, value = key.strip(), value.strip()
    if not key:
        raise ConfigError("missing key before '='", line)
    return key, value, line


def _build(values, overrides):
    if "case" not in values:
        raise ConfigError("missing required key 'case'")
    case = CASES[values["case"]]
    params = {}
    for name, (v, line) in overrides.items():
        try:
            split_overrides(case, {name: v})
        except KeyError as err:
            raise ConfigError(err.args[0], line) from None
        params[name] = v
    if case.ndim == 1 and values.get("ny", 1) != 1:
        raise ConfigError(f"case {case.name} is one-dimensional; ny must be 1")
    return RunConfig(overrides=params, **values)


def parse_config(text):
    items = []
    for n, raw in enumerate(text.splitlines(), start=1):
        item = split_line(raw, n)
        if item is not None:
            items.append(item)
    return _build(*parse_items(items))


def parse_flags(flags):
    """Turn ``--key=value`` command-line flags into ``(key, value, line)`` items."""
    items = []
    for flag in flags:
        if not flag.startswith("--") or "=" not in flag:
            raise ConfigError(f"expected --key=value, got {flag!r}", "command line")
        key, value = flag[2:].split("=", 1)
        items.append((key.strip(), value.strip(), "command line"))
    return items


def apply_flags(text, flags):
    """Parse ``text`` and let ``--key=value`` flags replace file values."""
    file_items = []
    for n, raw in enumerate(text.splitlines(), start=1):
        item = split_line(raw, n)
        if item is not None:
            file_items.append(item)
    flag_items = parse_flags(flags)
    flagged = {k for k, _, _ in flag_items}
    merged = [it for it in file_items if it[0] not in flagged] + flag_items
    return _build(*parse_items(merged))


def with_resolution(config, nx, ny):
    return replace(config, nx=nx, ny=ny)
