"""Interprocedural reaching definitions for permission strings.

A forward may-analysis over the ICFG.  Facts map each string or
string-array variable of a method to the set of literals it may hold::

    IN(s)  = U OUT(p) for p in pred(s)
    OUT(s) = gen(s) U (IN(s) - kill(s))

Array element stores are weak updates merged into the array variable.
Arguments flow into callee parameters along call edges; nothing flows back
along return edges since AIR methods return no strings.  ``TOP`` marks a
value the analysis cannot see (opaque or int sources, callback parameters).
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .air.model import (
    AppModel, ArrayStore, CallCheck, CallExplain, CallMethod, CallRequest,
    DefArray, DefString, DefStringFromParam, Lit, Num, Opaque, Site, Var,
)
from .graphs.callgraph import CALL, RETURN, CallGraph, Icfg, build_call_graph, build_icfg
from .graphs.dominance import reverse_postorder


class _Top:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TOP"

    def __reduce__(self):
        return (_Top, ())


TOP = _Top()
_TOP_SET = frozenset({TOP})
STRING_TYPES = ("string", "string_array")


class DataflowError(Exception):
    pass


def _values(src, facts: dict) -> frozenset:
    if isinstance(src, Lit):
        return frozenset({src.value})
    if isinstance(src, Var):
        return facts.get(src.name, frozenset())
    if isinstance(src, (Num, Opaque)):
        return _TOP_SET
    raise TypeError(src)


def transfer(stmt, facts: dict) -> dict:
    """Apply one statement's gen/kill to *facts* (returns a new dict when it changes)."""
    if isinstance(stmt, DefString):
        new = dict(facts)
        new[stmt.var] = frozenset({stmt.value})
    elif isinstance(stmt, DefStringFromParam):
        new = dict(facts)
        new[stmt.var] = facts.get(stmt.param, frozenset())
    elif isinstance(stmt, DefArray):
        new = dict(facts)
        vals = frozenset()
        for e in stmt.elements:
            vals |= _values(e, facts)
        new[stmt.var] = vals
    elif isinstance(stmt, ArrayStore):
        new = dict(facts)
        new[stmt.var] = facts.get(stmt.var, frozenset()) | _values(stmt.source, facts)
    else:
        return facts
    return new


def _join(into: dict, other: dict) -> dict:
    if not other:
        return into
    out = dict(into)
    for k, v in other.items():
        cur = out.get(k)
        out[k] = v if cur is None else cur | v
    return out


@dataclass
class SiteResolution:
    """Resolved permission strings at every CHECK/REQUEST/EXPLAIN site.

    ``sites[s]`` is ``None`` when the site is unresolved (``TOP`` reaches the
    argument, or no definition does).
    """
    sites: dict = field(default_factory=dict)
    literals: frozenset = frozenset()
    in_facts: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> str:
        out = {}
        for site in sorted(self.sites):
            vals = self.sites[site]
            out[str(site)] = None if vals is None else sorted(vals)
        return json.dumps(out, indent=2, sort_keys=True) + "\n"


def _method_order(app: AppModel, cg: CallGraph) -> list[str]:
    """Callers before callees: reverse post-order of the call graph from the entries."""
    root = object()
    entry_methods = sorted({e.method for e in cg.entries})
    rest = [m.name for m in app.methods]

    def succs(n):
        if n is root:
            return entry_methods + rest
        return sorted({e.callee for e in cg.callees(n)})
    return [m for m in reverse_postorder(root, succs) if m is not root]


def solve_reaching(app: AppModel, icfg: Icfg | None = None, cg: CallGraph | None = None,
                   max_steps: int | None = None) -> SiteResolution:
    icfg = icfg or build_icfg(app)
    cg = cg or build_call_graph(app)

    # node priorities: methods callers-first, blocks in reverse post-order
    order: list[Site] = []
    for m_name in _method_order(app, cg):
        m = app.method(m_name)
        succ = {b.id: b.successors for b in m.blocks}
        blocks = reverse_postorder(m.entry_block, lambda b: succ[b])
        blocks += [b.id for b in m.blocks if b.id not in blocks]
        for bid in blocks:
            b = m.block(bid)
            order += [Site(m_name, bid, idx) for idx, _, _ in b.flat_statements()]
            order.append(Site(m_name, bid, (len(b.statements),)))
    prio = {s: i for i, s in enumerate(order)}

    # parameters of callbacks and uncalled methods are unknown
    seed: dict[str, dict] = {}
    entry_methods = {e.method for e in cg.entries}
    for m in app.methods:
        facts = {}
        for p in m.params:
            if p.type not in STRING_TYPES or m.name in entry_methods or not cg.callers(m.name):
                facts[p.name] = _TOP_SET
        seed[m.name] = facts
    entry_nodes = {icfg.method_entry[m.name]: m.name for m in app.methods}

    var_count = sum(1 for _ in _all_vars(app))
    lits = len(app.string_literals())
    cap = max_steps or (len(order) + 1) * ((var_count + 1) * (lits + 2) + 1) * 4

    out: dict[Site, dict] = {s: {} for s in order}
    in_facts: dict[Site, dict] = {}
    heap = list(range(len(order)))
    queued = set(heap)
    steps = 0
    while heap:
        steps += 1
        if steps > cap:
            raise DataflowError(f"reaching-definition solver exceeded {cap} steps")
        node = order[heapq.heappop(heap)]
        queued.discard(prio[node])
        facts = seed[entry_nodes[node]] if node in entry_nodes else {}
        for pred, kind in icfg.pred.get(node, ()):
            if kind == RETURN:
                continue
            if kind == CALL:
                facts = _join(facts, _bind_args(app, icfg.stmt[pred], out[pred]))
            else:
                facts = _join(facts, out[pred])
        in_facts[node] = facts
        new_out = transfer(icfg.stmt[node], facts)
        if new_out != out[node]:
            out[node] = new_out
            for succ, _ in icfg.succ.get(node, ()):
                p = prio[succ]
                if p not in queued:
                    queued.add(p)
                    heapq.heappush(heap, p)

    sites = {}
    for node in order:
        stmt = icfg.stmt[node]
        if isinstance(stmt, (CallCheck, CallRequest, CallExplain)):
            vals = _values(stmt.source, in_facts.get(node, {}))
            sites[node] = None if (not vals or TOP in vals) else vals
    return SiteResolution(sites, app.string_literals(), in_facts)


def _bind_args(app: AppModel, call: CallMethod, caller_facts: dict) -> dict:
    callee = app.method(call.target)
    bound = {}
    for p, arg in zip(callee.params, call.args):
        bound[p.name] = _values(arg, caller_facts) if p.type in STRING_TYPES else _TOP_SET
    return bound


def _all_vars(app: AppModel):
    for m in app.methods:
        names = {p.name for p in m.params}
        for _, stmt, _ in m.sites():
            if hasattr(stmt, "var"):
                names.add(stmt.var)
        yield from ((m.name, n) for n in names)


def resolve_site(resolution: SiteResolution, site: Site, app: AppModel | None = None) -> tuple[frozenset, bool]:
    """Return ``(permissions, fallback)``.

    Unresolved sites fall back to every string literal referenced in the app.
    """
    vals = resolution.sites.get(site)
    if vals is not None:
        return vals, False
    literals = app.string_literals() if app is not None else resolution.literals
    return literals, True
