"""Versioned API-to-permission mappings."""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from functools import total_ordering

from ..air.model import DEFAULT_LAV, MIN_LEVEL


class MappingError(Exception):
    pass


class UnknownPermission(MappingError):
    def __init__(self, name: str, level: int | None = None):
        self.name = name
        where = f" at level {level}" if level is not None else ""
        super().__init__(f"permission {name} has no declared protection level{where}")


@total_ordering
class ProtectionLevel(enum.Enum):
    NORMAL = "normal"
    DANGEROUS = "dangerous"
    SIGNATURE = "signature"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def __lt__(self, other):
        if not isinstance(other, ProtectionLevel):
            return NotImplemented
        return self.rank < other.rank

    @classmethod
    def parse(cls, text: str) -> "ProtectionLevel":
        text = text.strip()
        # signatureOrSystem is folded into signature
        if text.lower() in ("signatureorsystem", "signature|privileged", "signature"):
            return cls.SIGNATURE
        try:
            return cls(text.lower())
        except ValueError:
            raise MappingError(f"unknown protection level {text!r}") from None


_RANK = {ProtectionLevel.NORMAL: 0, ProtectionLevel.DANGEROUS: 1, ProtectionLevel.SIGNATURE: 2}


class Mode(enum.Enum):
    ANY_OF = "anyOf"
    ALL_OF = "allOf"


@dataclass(frozen=True)
class Requirement:
    mode: Mode
    permissions: frozenset  # of (name, ProtectionLevel)

    def __post_init__(self):
        if not self.permissions:
            raise MappingError("a requirement needs at least one permission")
        names = [n for n, _ in self.permissions]
        if len(set(names)) != len(names):
            raise MappingError(f"duplicate permission in requirement: {sorted(names)}")

    @classmethod
    def of(cls, mode: Mode | str, perms: dict) -> "Requirement":
        return cls(Mode(mode) if isinstance(mode, str) else mode, frozenset(perms.items()))

    @property
    def names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.permissions)

    @property
    def max_level(self) -> ProtectionLevel:
        return max(lvl for _, lvl in self.permissions)

    def level_of(self, name: str) -> ProtectionLevel:
        return dict(self.permissions)[name]

    def names_at(self, level: ProtectionLevel) -> frozenset[str]:
        return frozenset(n for n, lvl in self.permissions if lvl == level)

    @property
    def obtainable(self) -> bool:
        """Whether an ordinary third-party app can ever satisfy this requirement."""
        usable = [lvl != ProtectionLevel.SIGNATURE for _, lvl in self.permissions]
        return any(usable) if self.mode is Mode.ANY_OF else all(usable)

    @property
    def needs_runtime_check(self) -> bool:
        """True when a runtime grant of some dangerous permission is what gates the call."""
        levels = [lvl for _, lvl in self.permissions]
        if self.mode is Mode.ANY_OF:
            return ProtectionLevel.NORMAL not in levels and ProtectionLevel.DANGEROUS in levels
        return ProtectionLevel.DANGEROUS in levels and ProtectionLevel.SIGNATURE not in levels

    def to_json(self) -> dict:
        return {"mode": self.mode.value, "perms": sorted(self.names)}

    def __str__(self):
        perms = ", ".join(f"{n}:{lvl.value}" for n, lvl in sorted(self.permissions, key=lambda p: p[0]))
        return f"{self.mode.value}{{{perms}}}"


@dataclass(frozen=True)
class LevelMapping:
    """Mappings of a single API level.

    ``unprotected`` lists APIs known to exist at this level without needing
    any permission; it lets the detector tell "no permission required" apart
    from "API not available".
    """
    level: int
    permissions: dict = field(default_factory=dict)   # name -> ProtectionLevel
    apis: dict = field(default_factory=dict)          # sig -> Requirement
    unprotected: frozenset = frozenset()

    @classmethod
    def from_json(cls, data: dict) -> "LevelMapping":
        try:
            level = int(data["level"])
            perms = {name: ProtectionLevel.parse(lvl) for name, lvl in data.get("permissions", {}).items()}
            apis = {}
            for sig, spec in data.get("apis", {}).items():
                names = spec["perms"]
                missing = [n for n in names if n not in perms]
                if missing:
                    raise UnknownPermission(missing[0], level)
                apis[sig] = Requirement.of(spec.get("mode", "anyOf"), {n: perms[n] for n in names})
        except (KeyError, TypeError, ValueError) as e:
            raise MappingError(f"malformed mapping file: {e}") from e
        return cls(level, perms, apis, frozenset(data.get("unprotected", ())))

    def to_json(self) -> dict:
        out = {
            "level": self.level,
            "permissions": {n: self.permissions[n].value for n in sorted(self.permissions)},
            "apis": {sig: self.apis[sig].to_json() for sig in sorted(self.apis)},
        }
        if self.unprotected:
            out["unprotected"] = sorted(self.unprotected)
        return out


class MappingStore:
    """Per-level mappings covering every level in ``[23, lav]``."""

    def __init__(self, levels, lav: int = DEFAULT_LAV):
        self.lav = lav
        self.levels: dict[int, LevelMapping] = {}
        for lm in levels:
            if lm.level in self.levels:
                raise MappingError(f"level {lm.level} given twice")
            self.levels[lm.level] = lm
        missing = [v for v in range(MIN_LEVEL, lav + 1) if v not in self.levels]
        if missing:
            raise MappingError(f"mapping levels not contiguous from {MIN_LEVEL} to {lav}; missing {missing}")

    @property
    def level_range(self) -> range:
        return range(MIN_LEVEL, self.lav + 1)

    def _check_level(self, level: int):
        if level not in self.levels or not MIN_LEVEL <= level <= self.lav:
            raise ValueError(f"level {level} outside [{MIN_LEVEL}, {self.lav}]")

    def lookup(self, api: str, level: int) -> Requirement | None:
        self._check_level(level)
        return self.levels[level].apis.get(api)

    def exists(self, api: str, level: int) -> bool:
        """Whether *api* is available at *level*, protected or not."""
        self._check_level(level)
        lm = self.levels[level]
        return api in lm.apis or api in lm.unprotected

    def known(self, api: str) -> bool:
        return any(api in lm.apis or api in lm.unprotected for lm in self.levels.values())

    def all_apis(self) -> set[str]:
        return {sig for v in self.level_range for sig in self.levels[v].apis}


def lookup(store: MappingStore, api: str, level: int) -> Requirement | None:
    return store.lookup(api, level)


def load_level(path) -> LevelMapping:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise MappingError(f"{path}: {e}") from e
    return LevelMapping.from_json(data)


def load_store(directory, lav: int = DEFAULT_LAV) -> MappingStore:
    """Load every ``*.json`` level file in *directory*; levels above *lav* are ignored."""
    if not os.path.isdir(directory):
        raise MappingError(f"mapping directory not found: {directory}")
    levels = []
    for name in sorted(os.listdir(directory)):
        if name.endswith(".json"):
            lm = load_level(os.path.join(directory, name))
            if MIN_LEVEL <= lm.level <= lav:
                levels.append(lm)
    return MappingStore(levels, lav)


def dump_level(lm: LevelMapping) -> str:
    return json.dumps(lm.to_json(), indent=2, sort_keys=True) + "\n"
