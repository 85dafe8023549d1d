"""Reachable runtime versions and Type-1/Type-2 detection.

Type-1 (missing permission check): at the app's target SDK a dangerous call
can run without a CHECK that protects it.  A CHECK protects a call when

1. it is synchronous (same entry method) and the call is reachable only
   through the CHECK's granted branch;
2. it runs in a callback that must precede the dangerous call's callback;
3. it runs in another component and its granted branch guards every
   launch of the dangerous call's component.

Type-2 (incompatible permission usage): on some other reachable runtime
version the API is missing, needs a permission no ordinary app can hold,
or needs a different permission that is not checked.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

from .air.model import (
    HANDLE_CALLBACK, MIN_LEVEL, AppModel, Branch, CallCheck, CallDangerous,
    CallExplain, CheckResultCond, GrantResultCond, RvCond, Site,
)
from .config import Config
from .contexts import (
    SYNCHRONOUS, CallingContext, ContextMatch, ManagementKind, TargetKind,
    best_matches, candidate_matches, extract_contexts, filter_app_only,
)
from .dataflow import SiteResolution, resolve_site, solve_reaching
from .graphs.callgraph import (
    CallGraph, IccGraph, build_call_graph, build_icc, build_icfg, callback_precedes,
)
from .graphs.dominance import EdgeNode, edge_dominators
from .permspec.store import MappingStore, ProtectionLevel, Requirement

log = logging.getLogger(__name__)

TYPE1, TYPE2 = "type1", "type2"
MISSING_CHECK = "missing_check"
INCOMPATIBLE_LEVEL = "incompatible_level"
PERMISSION_CHANGE = "permission_change"
TRYCATCH, HANDLE_GUARD = "trycatch", "handle_guard"


@dataclass(frozen=True)
class BugReport:
    kind: str
    context: CallingContext
    api: str
    levels: frozenset
    evidence: str
    matched_checks: tuple = ()
    suppressed_by: str | None = None

    def sort_key(self):
        return (*self.context.sort_key(), self.kind, self.evidence, tuple(sorted(self.levels)), self.suppressed_by or "")


class _DomCache(dict):
    def __init__(self, app: AppModel):
        super().__init__()
        self.app = app

    def __missing__(self, method_name):
        tree = edge_dominators(self.app.method(method_name))
        self[method_name] = tree
        return tree


def rv_constraints(app: AppModel, site: Site, edoms=None):
    """Yield ``(RvCond, taken)`` for every version branch with exactly one edge dominating *site*."""
    edoms = edoms if edoms is not None else _DomCache(app)
    tree = edoms[site.method]
    for b in app.method(site.method).blocks:
        term = b.terminator
        if isinstance(term, Branch) and isinstance(term.cond, RvCond):
            on_true = tree.dominates(EdgeNode(b.id, True), site.block)
            on_false = tree.dominates(EdgeNode(b.id, False), site.block)
            if on_true != on_false:
                yield term.cond, on_true


def reachable_rvs(context: CallingContext, app: AppModel, lav: int = 30, edoms=None) -> frozenset:
    levels = set(range(MIN_LEVEL, lav + 1))
    for site in context.path:
        for cond, taken in rv_constraints(app, site, edoms):
            levels &= {v for v in range(MIN_LEVEL, lav + 1) if cond.holds(v) == taken}
    return frozenset(levels)


@dataclass
class AnalysisResult:
    app: AppModel
    reports: list
    diagnostics: list = field(default_factory=list)
    contexts: list = field(default_factory=list)
    resolution: SiteResolution | None = None
    explains: list = field(default_factory=list)

    def visible(self, verbose: bool = False) -> list[BugReport]:
        return [r for r in self.reports if verbose or r.suppressed_by is None]


class Detector:
    """Holds the per-app graphs and caches shared by both detection passes."""

    def __init__(self, app: AppModel, store: MappingStore, config: Config | None = None,
                 contexts=None, resolution: SiteResolution | None = None,
                 cg: CallGraph | None = None, icc: IccGraph | None = None):
        self.app = app
        self.store = store
        self.config = config or Config()
        self.cg = cg or build_call_graph(app)
        self.icc = icc or build_icc(app, self.cg)
        self.resolution = resolution or solve_reaching(app, build_icfg(app), self.cg)
        if contexts is None:
            contexts = extract_contexts(self.cg, app, self.config.path_bound)
        self.contexts = list(contexts)
        self.edoms = _DomCache(app)
        self.universe = range(MIN_LEVEL, self.config.lav + 1)
        self.guarded = {site for site, _, g in app.sites() if g}
        self.checks = [c for c in self.contexts if c.kind is TargetKind.CHECK]
        self.launches = defaultdict(list)
        for c in self.contexts:
            if c.kind is TargetKind.LAUNCH:
                self.launches[c.target].append(c)
        self._rvs = {}
        self._launch_ok = {}
        self._cands = {}

    # -- building blocks ---------------------------------------------------

    def rvs(self, d: CallingContext) -> frozenset:
        if d not in self._rvs:
            self._rvs[d] = reachable_rvs(d, self.app, self.config.lav, self.edoms)
        return self._rvs[d]

    def candidates(self, d: CallingContext):
        if d not in self._cands:
            self._cands[d] = list(candidate_matches(d, self.checks, self.resolution, self.icc, self.app))
        return self._cands[d]

    def guards_sync(self, path: tuple, check: CallingContext) -> bool:
        """Is the site at the end of *path* reachable only through *check*'s granted branch?

        Both contexts must share the entry method; the check must sit directly
        in the method where the two paths diverge, and its block must end in
        the ``check_granted`` branch that consumes it.
        """
        j = 0
        while j < min(len(path), len(check.path)) and path[j] == check.path[j]:
            j += 1
        if j != len(check.path) - 1 or j >= len(path):
            return False
        cs, ds = check.path[j], path[j]
        if cs.method != ds.method:
            return False
        block = self.app.method(cs.method).block(cs.block)
        term = block.terminator
        if not (isinstance(term, Branch) and isinstance(term.cond, CheckResultCond)):
            return False
        last_check = [idx for idx, st, _ in block.flat_statements() if isinstance(st, CallCheck)][-1]
        if last_check != cs.index:
            return False
        return self.edoms[cs.method].dominates(EdgeNode(cs.block, True), ds.block)

    def launches_guarded(self, component: str, perm: str) -> bool:
        key = (component, perm)
        if key not in self._launch_ok:
            launches = self.launches.get(component, [])
            ok = bool(launches)
            for launch in launches:
                if launch.entry is None:
                    ok = False
                    break
                if self.grant_guarded(launch, {perm}):
                    continue
                if not any(
                    c.entry == launch.entry
                    and perm in resolve_site(self.resolution, c.site, self.app)[0]
                    and self.guards_sync(launch.path, c)
                    for c in self.checks
                ):
                    ok = False
                    break
            self._launch_ok[key] = ok
        return self._launch_ok[key]

    def permission_protected(self, d: CallingContext, perm: str) -> bool:
        for c, kind, perms, _fb in self.candidates(d):
            if perm not in perms:
                continue
            if kind in SYNCHRONOUS and self.guards_sync(d.path, c):
                return True
            if kind is ManagementKind.INTER_CALLBACK and callback_precedes(
                    c.entry.kind, d.entry.kind, self.config.precedence):
                return True
        if d.entry is not None and self.launches_guarded(d.entry.component, perm):
            return True
        return False

    def protected(self, d: CallingContext, req: Requirement) -> bool:
        perms = sorted(req.names_at(ProtectionLevel.DANGEROUS))
        if not perms:
            return True
        if req.mode.value == "anyOf":
            return any(self.permission_protected(d, p) for p in perms)
        return all(self.permission_protected(d, p) for p in perms)

    def grant_guarded(self, ctx: CallingContext, perms) -> bool:
        """Does a granted-result test for one of *perms* guard *ctx* inside the HANDLE callback?"""
        if ctx.entry is None or ctx.entry.kind != HANDLE_CALLBACK:
            return False
        first = ctx.path[0]
        tree = self.edoms[first.method]
        for b in self.app.method(first.method).blocks:
            term = b.terminator
            if (isinstance(term, Branch) and isinstance(term.cond, GrantResultCond)
                    and term.cond.permission in perms
                    and tree.dominates(EdgeNode(b.id, True), first.block)):
                return True
        return False

    def suppression(self, d: CallingContext, req: Requirement | None) -> str | None:
        if any(s in self.guarded for s in d.path):
            return TRYCATCH
        if req is not None and self.grant_guarded(d, req.names):
            return HANDLE_GUARD
        return None

    def matched(self, d: CallingContext, level: int) -> tuple:
        if self.store.lookup(d.target, level) is None:
            return ()
        ms = best_matches(d, self.checks, self.store, level, self.resolution, self.icc, self.app)
        return tuple(sorted(ms, key=lambda m: m.check.sort_key()))

    # -- detection ---------------------------------------------------------

    def dangerous_contexts(self):
        return [c for c in self.contexts if c.kind is TargetKind.DANGEROUS]

    def detect_type1(self) -> list[BugReport]:
        target = self.app.manifest.target_sdk
        out = []
        for d in self.dangerous_contexts():
            req = self.store.lookup(d.target, target)
            if req is None or not req.needs_runtime_check:
                continue
            if target not in self.rvs(d):
                continue
            if self.protected(d, req):
                continue
            out.append(BugReport(TYPE1, d, d.target, frozenset({target}), MISSING_CHECK,
                                 self.matched(d, target), self.suppression(d, req)))
        return out

    def detect_type2(self) -> list[BugReport]:
        target = self.app.manifest.target_sdk
        out = []
        for d in self.dangerous_contexts():
            rvs = self.rvs(d)
            req_t = self.store.lookup(d.target, target)
            groups = defaultdict(set)
            for v in sorted(rvs - {target}):
                if not self.store.exists(d.target, v):
                    groups[(INCOMPATIBLE_LEVEL, None)].add(v)
                    continue
                req_v = self.store.lookup(d.target, v)
                if req_v is None:
                    continue
                if not req_v.obtainable:
                    groups[(PERMISSION_CHANGE, self.suppression(d, None))].add(v)
                    continue
                if not req_v.needs_runtime_check:
                    continue
                if req_v != req_t:
                    evidence = PERMISSION_CHANGE
                elif target not in rvs:
                    # never analysed as Type-1: this context cannot run on the target level
                    evidence = MISSING_CHECK
                else:
                    continue
                if not self.protected(d, req_v):
                    groups[(evidence, self.suppression(d, req_v))].add(v)
            for (evidence, sup), levels in groups.items():
                out.append(BugReport(TYPE2, d, d.target, frozenset(levels), evidence,
                                     self.matched(d, min(levels)), sup))
        return out


def detect_type1(app, store, contexts, resolution, config: Config | None = None) -> list[BugReport]:
    return Detector(app, store, config, contexts, resolution).detect_type1()


def detect_type2(app, store, contexts, resolution, config: Config | None = None) -> list[BugReport]:
    return Detector(app, store, config, contexts, resolution).detect_type2()


def analyze(app: AppModel, store: MappingStore, config: Config | None = None) -> AnalysisResult:
    """Run the full pipeline on one app: graphs, string dataflow, contexts, detectors."""
    config = config or Config()
    missing = [v for v in range(MIN_LEVEL, config.lav + 1) if v not in store.levels]
    if missing:
        raise ValueError(f"mapping store does not cover levels {missing}")
    diagnostics = []
    cg = build_call_graph(app)
    icc = build_icc(app, cg)
    resolution = solve_reaching(app, build_icfg(app), cg)
    contexts = extract_contexts(cg, app, config.path_bound, diagnostics)
    contexts = filter_app_only(contexts, app.manifest.package_id, app, config.estimate)

    declared = set(app.manifest.declared_permissions)
    for site, stmt, _ in app.sites():
        if isinstance(stmt, CallDangerous):
            if not store.known(stmt.api):
                diagnostics.append(f"warning: unknown API {stmt.api} at {site}")
                continue
            req = store.lookup(stmt.api, app.manifest.target_sdk)
            if req is not None:
                undeclared = sorted(req.names_at(ProtectionLevel.DANGEROUS) - declared)
                if undeclared and (req.mode.value == "allOf" or len(undeclared) == len(req.names_at(ProtectionLevel.DANGEROUS))):
                    diagnostics.append(f"info: {stmt.api} at {site} needs undeclared {', '.join(undeclared)}")
    for site, vals in sorted(resolution.sites.items()):
        if vals is None:
            diagnostics.append(f"info: permission string at {site} unresolved; using all literals")

    det = Detector(app, store, config, contexts, resolution, cg, icc)
    reports = det.detect_type1() + det.detect_type2()
    reports.sort(key=BugReport.sort_key)
    explains = [
        (site, resolve_site(resolution, site, app)[0])
        for site, stmt, _ in app.sites() if isinstance(stmt, CallExplain)
    ]
    for r in reports:
        log.debug("%s %s at %s levels=%s", r.kind, r.api, r.context.site, sorted(r.levels))
    return AnalysisResult(app, reports, diagnostics, contexts, resolution, explains)
