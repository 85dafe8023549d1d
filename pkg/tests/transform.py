"""Mechanical fixture rewrites: wrap a dangerous call in dominating guards."""

from __future__ import annotations

from dataclasses import replace

from arpcheck.air.model import (
    BasicBlock, Branch, CallCheck, CheckResultCond, Goto, Lit, RvCond,
)
from arpcheck.permspec import ProtectionLevel


def wrap_site(app, site, guards):
    """Split the block holding *site* so the statement runs only when every guard holds.

    *guards* is a list of ``(prelude_statements, condition)``; each prelude is
    placed right before its branch.  The false edge of every guard skips the
    statement.
    """
    if not guards:
        return app
    if len(site.index) != 1:
        raise ValueError("only top-level statements can be wrapped")
    method = app.method(site.method)
    block = method.block(site.block)
    i = site.index[0]
    stmt = block.statements[i]
    rest = f"{block.id}_w{i}_rest"
    ids = [block.id] + [f"{block.id}_w{i}_g{k}" for k in range(1, len(guards) + 1)]
    new_blocks = []
    for k, (prelude, cond) in enumerate(guards):
        body = (block.statements[:i] if k == 0 else ()) + tuple(prelude)
        new_blocks.append(BasicBlock(ids[k], body, Branch(cond, ids[k + 1], rest)))
    new_blocks.append(BasicBlock(ids[-1], (stmt,), Goto(rest)))
    new_blocks.append(BasicBlock(rest, block.statements[i + 1:], block.terminator))
    blocks = []
    for b in method.blocks:
        blocks.extend(new_blocks if b.id == block.id else [b])
    methods = tuple(replace(m, blocks=tuple(blocks)) if m.name == method.name else m for m in app.methods)
    return replace(app, methods=methods)


def check_guards(permissions):
    return [((CallCheck(Lit(p)),), CheckResultCond()) for p in permissions]


def sdk_guards(flagged, lav=30):
    allowed = [v for v in range(23, lav + 1) if v not in flagged]
    if not allowed:
        raise ValueError("every level is flagged")
    if allowed == list(range(allowed[0], allowed[-1] + 1)):
        conds = []
        if allowed[0] > 23:
            conds.append(RvCond(">=", allowed[0]))
        if allowed[-1] < lav:
            conds.append(RvCond("<=", allowed[-1]))
    else:
        conds = [RvCond("!=", v) for v in sorted(flagged)]
    return [((), c) for c in conds]


def suppress_reports(app, store, reports, lav=30):
    """Wrap every reported dangerous site: checks for Type-1, sdk guards for Type-2."""
    by_site = {}
    for r in reports:
        entry = by_site.setdefault(r.context.site, {"type1": set(), "type2": set()})
        if r.kind == "type1":
            req = store.lookup(r.api, app.manifest.target_sdk)
            entry["type1"] |= set(req.names_at(ProtectionLevel.DANGEROUS))
        else:
            entry["type2"] |= set(r.levels)
    # later sites first so earlier indices in the same block stay valid
    for site in sorted(by_site, reverse=True):
        wanted = by_site[site]
        guards = sdk_guards(wanted["type2"], lav) if wanted["type2"] else []
        guards += check_guards(sorted(wanted["type1"]))
        app = wrap_site(app, site, guards)
    return app
