from __future__ import annotations

import enum
from dataclasses import dataclass

from .store import MappingStore, Requirement


class ChangeKind(enum.Enum):
    RESTRICTED = "restricted"
    RELAXED = "relaxed"
    SAME_LEVEL = "same-level"


@dataclass(frozen=True)
class EvolutionReport:
    from_level: int
    to_level: int
    added: frozenset
    deleted: frozenset
    changed: frozenset  # of (sig, ChangeKind)

    def to_json(self) -> dict:
        return {
            "from": self.from_level,
            "to": self.to_level,
            "added": sorted(self.added),
            "deleted": sorted(self.deleted),
            "changed": [{"api": sig, "change": kind.value} for sig, kind in sorted(self.changed, key=lambda c: c[0])],
        }

    def to_text(self) -> str:
        lines = [f"API level {self.from_level} -> {self.to_level}: "
                 f"{len(self.added)} added, {len(self.deleted)} deleted, {len(self.changed)} changed"]
        lines += [f"  + {sig}" for sig in sorted(self.added)]
        lines += [f"  - {sig}" for sig in sorted(self.deleted)]
        lines += [f"  ~ {sig} [{kind.value}]" for sig, kind in sorted(self.changed, key=lambda c: c[0])]
        return "\n".join(lines)


def classify_change(old: Requirement, new: Requirement) -> ChangeKind:
    """Compare the strongest permission of each side."""
    if new.max_level > old.max_level:
        return ChangeKind.RESTRICTED
    if new.max_level < old.max_level:
        return ChangeKind.RELAXED
    return ChangeKind.SAME_LEVEL


def diff_levels(store: MappingStore, from_level: int, to_level: int) -> EvolutionReport:
    if not from_level < to_level:
        raise ValueError(f"from level ({from_level}) must be below to level ({to_level})")
    old = store.levels[from_level].apis if from_level in store.levels else None
    new = store.levels[to_level].apis if to_level in store.levels else None
    if old is None or new is None:
        raise ValueError(f"levels must lie in [{store.level_range.start}, {store.lav}]")
    changed = frozenset(
        (sig, classify_change(old[sig], new[sig]))
        for sig in old.keys() & new.keys()
        if old[sig] != new[sig]
    )
    return EvolutionReport(
        from_level, to_level,
        added=frozenset(new.keys() - old.keys()),
        deleted=frozenset(old.keys() - new.keys()),
        changed=changed,
    )


def is_evolving(store: MappingStore, api: str) -> bool:
    levels = list(store.level_range)
    return any(store.lookup(api, a) != store.lookup(api, b) for a, b in zip(levels, levels[1:]))
