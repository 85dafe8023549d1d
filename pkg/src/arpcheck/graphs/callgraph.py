from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from functools import lru_cache

from ..air.model import AppModel, CallbackKind, CallMethod, LaunchComponent, Return, Site
from ..config import DEFAULT_PRECEDENCE


@dataclass(frozen=True, order=True)
class Entry:
    component: str
    kind: CallbackKind
    method: str

    def __str__(self):
        return f"{self.component}.{self.kind.value}:{self.method}"


@dataclass(frozen=True, order=True)
class CallEdge:
    caller: str
    site: Site
    callee: str


class CallGraph:
    def __init__(self, nodes, edges, entries):
        self.nodes = tuple(nodes)
        self.edges = tuple(sorted(edges))
        self.entries = tuple(sorted(entries, key=lambda e: (e.component, e.kind.value, e.method)))
        self._callers = defaultdict(list)
        self._callees = defaultdict(list)
        for e in self.edges:
            self._callers[e.callee].append(e)
            self._callees[e.caller].append(e)
        self._entries_of = defaultdict(list)
        for ent in self.entries:
            self._entries_of[ent.method].append(ent)

    def callers(self, method: str) -> list[CallEdge]:
        return self._callers.get(method, [])

    def callees(self, method: str) -> list[CallEdge]:
        return self._callees.get(method, [])

    def entries_of(self, method: str) -> list[Entry]:
        return self._entries_of.get(method, [])

    def reachable_from(self, method: str) -> set[str]:
        seen = {method}
        todo = deque([method])
        while todo:
            m = todo.popleft()
            for e in self.callees(m):
                if e.callee not in seen:
                    seen.add(e.callee)
                    todo.append(e.callee)
        return seen


def build_call_graph(app: AppModel) -> CallGraph:
    edges = [
        CallEdge(site.method, site, stmt.target)
        for site, stmt, _ in app.sites()
        if isinstance(stmt, CallMethod)
    ]
    entries = [Entry(c.name, kind, m) for c in app.components for kind, m in c.callbacks]
    return CallGraph([m.name for m in app.methods], edges, entries)


# -- ICFG -------------------------------------------------------------------

NORMAL, CALL, RETURN = "normal", "call", "return"


class Icfg:
    """Statement-level interprocedural CFG.

    Nodes are ``Site`` objects: one per (flattened) statement and one per
    block terminator.  A ``CallMethod`` node has a normal call-to-return edge
    to its successor plus a call edge into the callee; the callee's
    ``return`` terminators have return edges back to that successor.
    API calls (dangerous/check/request) are plain nodes with no
    interprocedural edges.
    """

    def __init__(self, app: AppModel):
        self.app = app
        self.nodes: list[Site] = []
        self.succ: dict[Site, list[tuple[Site, str]]] = defaultdict(list)
        self.pred: dict[Site, list[tuple[Site, str]]] = defaultdict(list)
        self.stmt: dict[Site, object] = {}
        self.method_entry: dict[str, Site] = {}
        self.block_head: dict[tuple[str, str], Site] = {}

        after_call: dict[Site, Site] = {}
        for m in app.methods:
            for b in m.blocks:
                seq = [(Site(m.name, b.id, idx), stmt) for idx, stmt, _ in b.flat_statements()]
                seq.append((Site(m.name, b.id, (len(b.statements),)), b.terminator))
                for site, stmt in seq:
                    self.nodes.append(site)
                    self.stmt[site] = stmt
                self.block_head[(m.name, b.id)] = seq[0][0]
                for (s1, st1), (s2, _) in zip(seq, seq[1:]):
                    self._add(s1, s2, NORMAL)
                    if isinstance(st1, CallMethod):
                        after_call[s1] = s2
            self.method_entry[m.name] = self.block_head[(m.name, m.entry_block)]
        for m in app.methods:
            for b in m.blocks:
                term_site = Site(m.name, b.id, (len(b.statements),))
                for succ in b.successors:
                    self._add(term_site, self.block_head[(m.name, succ)], NORMAL)
        for call_site, ret_site in after_call.items():
            callee = app.method(self.stmt[call_site].target)
            self._add(call_site, self.method_entry[callee.name], CALL)
            for b in callee.blocks:
                if isinstance(b.terminator, Return):
                    self._add(Site(callee.name, b.id, (len(b.statements),)), ret_site, RETURN)

    def _add(self, a: Site, b: Site, kind: str):
        self.succ[a].append((b, kind))
        self.pred[b].append((a, kind))

    def edges(self):
        for a in self.nodes:
            for b, kind in self.succ.get(a, ()):
                yield a, b, kind


def build_icfg(app: AppModel) -> Icfg:
    return Icfg(app)


# -- ICC --------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class IccEdge:
    source: str
    site: Site
    target: str


class IccGraph:
    def __init__(self, edges):
        self.edges = tuple(sorted(set(edges)))
        self._pairs = {(e.source, e.target) for e in self.edges}

    def linked(self, a: str, b: str) -> bool:
        """Is there a launch edge between the two components, in either direction?"""
        return (a, b) in self._pairs or (b, a) in self._pairs

    def launches(self, source: str, target: str) -> bool:
        return (source, target) in self._pairs


def component_reach(app: AppModel, cg: CallGraph) -> dict[str, set[str]]:
    """Map each method to the components whose entry methods reach it."""
    owners = defaultdict(set)
    for ent in cg.entries:
        for m in cg.reachable_from(ent.method):
            owners[m].add(ent.component)
    return owners


def build_icc(app: AppModel, cg: CallGraph | None = None) -> IccGraph:
    """One edge per launch statement and per component that can execute it."""
    cg = cg or build_call_graph(app)
    owners = component_reach(app, cg)
    edges = []
    for site, stmt, _ in app.sites():
        if isinstance(stmt, LaunchComponent):
            for src in owners.get(site.method, ()):
                edges.append(IccEdge(src, site, stmt.component))
    return IccGraph(edges)


# -- callback ordering ------------------------------------------------------

@lru_cache(maxsize=32)
def _closure(table: tuple) -> frozenset:
    rel = set(table)
    while True:
        extra = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
        if not extra:
            return frozenset(rel)
        rel |= extra


def callback_precedes(a: CallbackKind, b: CallbackKind, table: tuple = DEFAULT_PRECEDENCE) -> bool:
    """True iff callback *a* must have completed before *b* first runs."""
    return a != b and (a, b) in _closure(tuple(table))


# -- debug export -----------------------------------------------------------

def to_dot(cg: CallGraph, icc: IccGraph) -> str:
    lines = ["digraph app {", "  node [shape=box];"]
    for m in cg.nodes:
        lines.append(f'  "{m}";')
    for ent in cg.entries:
        lines.append(f'  "{ent.component}" [shape=ellipse];')
        lines.append(f'  "{ent.component}" -> "{ent.method}" [label="{ent.kind.value}", style=dotted];')
    for e in cg.edges:
        lines.append(f'  "{e.caller}" -> "{e.callee}" [label="{e.site}"];')
    for e in icc.edges:
        lines.append(f'  "{e.source}" -> "{e.target}" [label="launch {e.site}", color=blue];')
    lines.append("}")
    return "\n".join(lines) + "\n"
