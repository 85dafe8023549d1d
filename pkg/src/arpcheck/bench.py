"""Buggy/patched corpus runner and precision/recall arithmetic.

Each corpus entry pairs a buggy app carrying exactly one bug of an expected
kind with its patched version.  Per kind:

* TP: buggy version with a warning of the expected kind
* FN: buggy version without one (strict; ``lenient`` accepts any warning)
* FP: patched version with any warning, whatever its kind
* TN: patched version without warnings
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .air.parser import AirError, load_app
from .config import Config
from .dataflow import DataflowError
from .detector import TYPE1, TYPE2, analyze
from .permspec.store import MappingStore

KINDS = (TYPE1, TYPE2)
_KIND_ALIASES = {"type1": TYPE1, "type-1": TYPE1, "Type1": TYPE1, "Type-1": TYPE1,
                 "type2": TYPE2, "type-2": TYPE2, "Type2": TYPE2, "Type-2": TYPE2}


@dataclass(frozen=True)
class Metrics:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self) -> Fraction | None:
        d = self.tp + self.fp
        return Fraction(self.tp, d) if d else None

    @property
    def recall(self) -> Fraction | None:
        d = self.tp + self.fn
        return Fraction(self.tp, d) if d else None

    @property
    def f1(self) -> Fraction | None:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    def as_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
                "precision": pct(self.precision), "recall": pct(self.recall), "f1": pct(self.f1)}


def pct(x: Fraction | None) -> str:
    """Percentage with two decimals, or ``N/A``."""
    if x is None:
        return "N/A"
    return f"{float(x * 100):.2f}"


class ManifestError(Exception):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    buggy_path: str
    patched_path: str
    expected_kind: str


def load_manifest(path) -> list[CorpusEntry]:
    """Read a corpus manifest; relative paths resolve against the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"{path}: {e}") from e
    raw = doc["entries"] if isinstance(doc, dict) else doc
    entries, names = [], set()
    for item in raw:
        try:
            name = item["name"]
            kind = _KIND_ALIASES[item["expected_kind"]]
            buggy = os.path.join(base, item["buggy_path"])
            patched = os.path.join(base, item["patched_path"])
        except KeyError as e:
            raise ManifestError(f"manifest entry {item!r}: missing or bad field {e}") from None
        if name in names:
            raise ManifestError(f"duplicate entry name {name!r}")
        for p in (buggy, patched):
            if not os.path.exists(p):
                raise ManifestError(f"{name}: no such file {p}")
        names.add(name)
        entries.append(CorpusEntry(name, buggy, patched, kind))
    return entries


@dataclass
class EntryOutcome:
    entry: CorpusEntry
    buggy_kinds: tuple = ()
    patched_kinds: tuple = ()
    error: str | None = None

    def counts(self, lenient: bool = False) -> Metrics:
        hit = bool(self.buggy_kinds) if lenient else self.entry.expected_kind in self.buggy_kinds
        return Metrics(tp=int(hit), fn=int(not hit),
                       fp=int(bool(self.patched_kinds)), tn=int(not self.patched_kinds))


@dataclass
class BenchResult:
    outcomes: list
    lenient: bool = False
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def table(self) -> str:
        head = f"{'':8}{'TP':>5}{'TN':>5}{'FP':>5}{'FN':>5}{'P(%)':>9}{'R(%)':>9}{'F1(%)':>9}"
        rows = [head]
        for kind in KINDS:
            m = self.metrics[kind]
            d = m.as_dict()
            label = "Type-1" if kind == TYPE1 else "Type-2"
            rows.append(f"{label:8}{m.tp:>5}{m.tn:>5}{m.fp:>5}{m.fn:>5}"
                        f"{d['precision']:>9}{d['recall']:>9}{d['f1']:>9}")
        rows.append(f"{'Failed':8}{len(self.failures):>5}")
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {
            "metrics": {k: self.metrics[k].as_dict() for k in KINDS},
            "failed": [{"name": o.entry.name, "error": o.error} for o in self.failures],
            "entries": [
                {"name": o.entry.name, "expected": o.entry.expected_kind,
                 "buggy": list(o.buggy_kinds), "patched": list(o.patched_kinds)}
                for o in sorted(self.outcomes, key=lambda o: o.entry.name) if o.error is None
            ],
        }


def _kinds(path: str, store: MappingStore, config: Config) -> tuple:
    app = load_app(path, config.lav)
    return tuple(sorted({r.kind for r in analyze(app, store, config).visible(False)}))


def run_entry(entry: CorpusEntry, store: MappingStore, config: Config) -> EntryOutcome:
    try:
        return EntryOutcome(entry, _kinds(entry.buggy_path, store, config),
                            _kinds(entry.patched_path, store, config))
    except (AirError, DataflowError, OSError, ValueError) as e:
        return EntryOutcome(entry, error=f"{type(e).__name__}: {e}")


def aggregate(outcomes, lenient: bool = False) -> BenchResult:
    metrics = {k: Metrics() for k in KINDS}
    failures = []
    for o in outcomes:
        if o.error is not None:
            failures.append(o)
            continue
        metrics[o.entry.expected_kind] += o.counts(lenient)
    return BenchResult(list(outcomes), lenient, metrics, failures)


def run_bench(entries, store: MappingStore, config: Config | None = None,
              lenient: bool = False, jobs: int = 1) -> BenchResult:
    config = config or Config()
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(lambda e: run_entry(e, store, config), entries))
    else:
        outcomes = [run_entry(e, store, config) for e in entries]
    return aggregate(outcomes, lenient)
