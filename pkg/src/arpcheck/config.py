"""Analysis configuration.

The config file is plain ``key = value`` text; ``#`` starts a comment::

    lav = 30
    path_bound = 16
    estimate = over          # or: under
    verbose = false
    precedence = onCreate < onStart, onStart < onResume, onResume < onClick

``precedence`` replaces the whole default callback-order table.  Only the
config file location may come from the environment (``ARPCHECK_CONFIG``).
"""

from __future__ import annotations

import graphlib
import os
from dataclasses import dataclass, field, replace

from .air.model import DEFAULT_LAV, MIN_LEVEL, CallbackKind

CONFIG_ENV = "ARPCHECK_CONFIG"

_C = CallbackKind
DEFAULT_PRECEDENCE = (
    (_C.ON_CREATE, _C.ON_START),
    (_C.ON_START, _C.ON_RESUME),
    (_C.ON_RESUME, _C.ON_CLICK),
    (_C.ON_RESUME, _C.RUN),
    (_C.ON_RESUME, _C.ON_PAUSE),
    (_C.ON_PAUSE, _C.ON_STOP),
    (_C.ON_STOP, _C.ON_DESTROY),
    (_C.ON_CREATE, _C.ON_REQUEST_PERMISSIONS_RESULT),
)


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Config:
    lav: int = DEFAULT_LAV
    path_bound: int = 16
    estimate: str = "over"
    verbose: bool = False
    precedence: tuple = field(default=DEFAULT_PRECEDENCE)

    def __post_init__(self):
        if self.lav < MIN_LEVEL:
            raise ConfigError(f"lav must be >= {MIN_LEVEL}")
        if self.path_bound < 1:
            raise ConfigError("path_bound must be positive")
        if self.estimate not in ("over", "under"):
            raise ConfigError("estimate must be 'over' or 'under'")
        order = graphlib.TopologicalSorter()
        for a, b in self.precedence:
            order.add(b, a)
        try:
            order.prepare()
        except graphlib.CycleError as e:
            raise ConfigError(f"callback precedence has a cycle: {[k.value for k in e.args[1]]}") from None

    def with_(self, **kw) -> "Config":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _precedence(text: str) -> tuple:
    pairs = []
    for item in filter(None, (p.strip() for p in text.split(","))):
        a, sep, b = item.partition("<")
        if not sep:
            raise ConfigError(f"precedence entry {item!r} must look like 'a < b'")
        try:
            pairs.append((CallbackKind(a.strip()), CallbackKind(b.strip())))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    return tuple(pairs)


def parse_config(text: str) -> Config:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        try:
            if key in ("lav", "path_bound"):
                values[key] = int(value)
            elif key == "estimate":
                values[key] = value
            elif key == "verbose":
                values[key] = _bool(value)
            elif key == "precedence":
                values[key] = _precedence(value)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ValueError as e:
            raise ConfigError(f"line {lineno}: {e}") from None
    return Config(**values)


def load_config(path: str | None = None) -> Config:
    """Load *path*, else the file named by ``$ARPCHECK_CONFIG``, else defaults."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return Config()
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())
