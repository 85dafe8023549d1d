from .evolution import ChangeKind, EvolutionReport, classify_change, diff_levels, is_evolving
from .store import (
    LevelMapping, MappingError, MappingStore, Mode, ProtectionLevel,
    Requirement, UnknownPermission, dump_level, load_level, load_store, lookup,
)
from .stubs import StubSyntaxError, parse_stubs

__all__ = [
    "ChangeKind", "EvolutionReport", "classify_change", "diff_levels",
    "is_evolving", "LevelMapping", "MappingError", "MappingStore", "Mode",
    "ProtectionLevel", "Requirement", "UnknownPermission", "dump_level",
    "load_level", "load_store", "lookup", "StubSyntaxError", "parse_stubs",
]
