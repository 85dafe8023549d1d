"""Calling contexts of dangerous, CHECK, REQUEST and launch sites, and how they relate."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .air.model import AppModel, CallCheck, CallDangerous, CallRequest, LaunchComponent, Site
from .dataflow import SiteResolution, resolve_site
from .graphs.callgraph import CallGraph, Entry, IccGraph
from .permspec.store import MappingStore, Mode, Requirement

DEFAULT_PATH_BOUND = 16


class TargetKind(str, enum.Enum):
    DANGEROUS = "dangerous"
    CHECK = "check"
    REQUEST = "request"
    LAUNCH = "launch"


class ManagementKind(enum.IntEnum):
    """Ordered by locality: lower is closer."""
    INTRA_PROCEDURE = 0
    INTER_PROCEDURE = 1
    INTER_CALLBACK = 2
    INTER_COMPONENT = 3

    @property
    def label(self) -> str:
        return {0: "intra-procedure", 1: "inter-procedure", 2: "inter-callback", 3: "inter-component"}[self.value]


SYNCHRONOUS = (ManagementKind.INTRA_PROCEDURE, ManagementKind.INTER_PROCEDURE)


class NoRequirement(Exception):
    pass


@dataclass(frozen=True)
class CallingContext:
    """A call-graph path ``p1 -> ... -> pn`` from an entry method to a target site.

    ``p1 .. p(n-1)`` are method-call sites; ``pn`` is the target.  ``entry``
    is None only for truncated contexts whose origin lies beyond the path bound.
    """
    entry: Entry | None
    path: tuple[Site, ...]
    kind: TargetKind
    target: str | None = None  # API signature, or launched component
    truncated: bool = False

    @property
    def site(self) -> Site:
        return self.path[-1]

    @property
    def component(self) -> str | None:
        return self.entry.component if self.entry else None

    def sort_key(self):
        ent = (self.entry.component, self.entry.kind.value, self.entry.method) if self.entry else ("", "", "")
        return (ent, self.path, self.kind.value, self.target or "", self.truncated)

    def to_json(self) -> dict:
        return {
            "entry": str(self.entry) if self.entry else None,
            "path": [str(s) for s in self.path],
            "target": self.target,
            "kind": self.kind.value,
            "truncated": self.truncated,
        }


def _targets(app: AppModel):
    for site, stmt, _ in app.sites():
        if isinstance(stmt, CallDangerous):
            yield site, TargetKind.DANGEROUS, stmt.api
        elif isinstance(stmt, CallCheck):
            yield site, TargetKind.CHECK, None
        elif isinstance(stmt, CallRequest):
            yield site, TargetKind.REQUEST, None
        elif isinstance(stmt, LaunchComponent):
            yield site, TargetKind.LAUNCH, stmt.component


def extract_contexts(cg: CallGraph, app: AppModel, max_len: int = DEFAULT_PATH_BOUND,
                     diagnostics: list | None = None) -> list[CallingContext]:
    """Enumerate every CG path from an entry to each target site.

    Paths never reuse a call edge.  When a path reaches *max_len* sites while
    callers remain, a truncated context (no entry) is emitted and a
    diagnostic recorded.
    """
    out = []

    def walk(method, path, used, site, kind, target):
        for ent in cg.entries_of(method):
            out.append(CallingContext(ent, path, kind, target))
        callers = [e for e in cg.callers(method) if e not in used]
        if callers and len(path) >= max_len:
            out.append(CallingContext(None, path, kind, target, truncated=True))
            if diagnostics is not None:
                diagnostics.append(f"path bound {max_len} exceeded for {kind.value} site {site}")
            return
        for e in callers:
            walk(e.caller, (e.site,) + path, used | {e}, site, kind, target)

    for site, kind, target in _targets(app):
        walk(site.method, (site,), frozenset(), site, kind, target)
    return sorted(set(out), key=CallingContext.sort_key)


def _in_package(pkg: str, package_id: str) -> bool:
    return pkg == package_id or pkg.startswith(package_id + ".")


def filter_app_only(contexts, package_id: str, app: AppModel, mode: str = "under") -> list[CallingContext]:
    """Drop contexts whose entry component lies outside the app's package (under-estimation).

    In ``over`` mode the list is returned unchanged.
    """
    if mode == "over":
        return list(contexts)
    packages = {c.name: c.package for c in app.components}
    return [c for c in contexts if c.entry and _in_package(packages[c.entry.component], package_id)]


def classify(d: CallingContext, c: CallingContext, icc: IccGraph) -> ManagementKind | None:
    if d.entry is None or c.entry is None:
        return None
    if d.entry == c.entry:
        if d.path[:-1] == c.path[:-1]:
            return ManagementKind.INTRA_PROCEDURE
        return ManagementKind.INTER_PROCEDURE
    if d.entry.component == c.entry.component:
        return ManagementKind.INTER_CALLBACK
    if icc.linked(d.entry.component, c.entry.component):
        return ManagementKind.INTER_COMPONENT
    return None


def satisfies(req: Requirement, checked) -> bool:
    checked = set(checked)
    if req.mode is Mode.ANY_OF:
        return bool(req.names & checked)
    return req.names <= checked


@dataclass(frozen=True)
class ContextMatch:
    dangerous: CallingContext
    check: CallingContext
    kind: ManagementKind
    permissions: frozenset
    fallback: bool
    permissions_satisfied: bool

    def to_json(self) -> dict:
        return {
            "site": str(self.check.site),
            "entry": str(self.check.entry) if self.check.entry else None,
            "kind": self.kind.label,
            "permissions": sorted(self.permissions),
            "fallback": self.fallback,
        }


def candidate_matches(d: CallingContext, candidates, resolution: SiteResolution,
                      icc: IccGraph, app: AppModel | None = None):
    """Yield ``(check_context, kind, permissions, fallback)`` for CHECK contexts related to *d*."""
    for c in candidates:
        if c.kind is not TargetKind.CHECK:
            continue
        kind = classify(d, c, icc)
        if kind is None:
            continue
        perms, fallback = resolve_site(resolution, c.site, app)
        yield c, kind, perms, fallback


def best_matches(d: CallingContext, candidates, store: MappingStore, level: int,
                 resolution: SiteResolution, icc: IccGraph, app: AppModel | None = None) -> list[ContextMatch]:
    """Satisfying CHECK contexts of the closest management kind."""
    req = store.lookup(d.target, level)
    if req is None:
        raise NoRequirement(f"{d.target} has no permission mapping at level {level}")
    found = [
        ContextMatch(d, c, kind, perms, fb, True)
        for c, kind, perms, fb in candidate_matches(d, candidates, resolution, icc, app)
        if satisfies(req, perms)
    ]
    if not found:
        return []
    closest = min(m.kind for m in found)
    return [m for m in found if m.kind == closest]


def contexts_to_json(contexts) -> str:
    return json.dumps([c.to_json() for c in contexts], indent=2, sort_keys=True) + "\n"
