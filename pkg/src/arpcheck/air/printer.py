"""Canonical AIR pretty-printer; ``parse_app(pretty_print(m)) == m``."""

from __future__ import annotations

import json

from .model import (
    AppModel, ArrayStore, Branch, CallCheck, CallDangerous, CallExplain,
    CallMethod, CallRequest, CheckResultCond, DefArray, DefString,
    DefStringFromParam, Goto, GrantResultCond, LaunchComponent, Lit, Num,
    Opaque, Return, RvCond, TryCatchSecurity, Var,
)

INDENT = "  "


def _src(s) -> str:
    if isinstance(s, Var):
        return s.name
    if isinstance(s, Lit):
        return json.dumps(s.value)
    if isinstance(s, Num):
        return str(s.value)
    if isinstance(s, Opaque):
        return "null"
    raise TypeError(s)


def _args(args) -> str:
    return "(" + ", ".join(_src(a) for a in args) + ")"


def _stmt(s, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, DefString):
        return [f"{pad}def {s.var} = {json.dumps(s.value)}"]
    if isinstance(s, DefStringFromParam):
        return [f"{pad}def {s.var} = param {s.param}"]
    if isinstance(s, DefArray):
        return [f"{pad}array {s.var} = [{', '.join(_src(e) for e in s.elements)}]"]
    if isinstance(s, ArrayStore):
        return [f"{pad}store {s.var}[{s.index}] = {_src(s.source)}"]
    if isinstance(s, CallMethod):
        return [f"{pad}call {s.target}{_args(s.args)}"]
    if isinstance(s, CallDangerous):
        return [f"{pad}dangerous <{s.api}>{_args(s.args)}"]
    if isinstance(s, CallCheck):
        return [f"{pad}check {_src(s.source)}"]
    if isinstance(s, CallRequest):
        return [f"{pad}request {_src(s.source)} {s.request_code}"]
    if isinstance(s, CallExplain):
        return [f"{pad}explain {_src(s.source)}"]
    if isinstance(s, LaunchComponent):
        return [f"{pad}launch {s.component}"]
    if isinstance(s, TryCatchSecurity):
        lines = [f"{pad}trycatch_security {{"]
        for inner in s.body:
            lines.extend(_stmt(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(s)


def _term(t) -> str:
    if isinstance(t, Goto):
        return f"goto {t.target}"
    if isinstance(t, Return):
        return "return"
    c = t.cond
    if isinstance(c, RvCond):
        cond = f"sdk {c.op} {c.value}"
    elif isinstance(c, CheckResultCond):
        cond = "check_granted"
    elif isinstance(c, GrantResultCond):
        cond = f"grant_result {c.permission}"
    else:
        raise TypeError(c)
    return f"branch {cond} {t.true_target} {t.false_target}"


def pretty_print(app: AppModel) -> str:
    man = app.manifest
    out = [f"app {man.package_id} targetSdk {man.target_sdk}"]
    out += [f"uses-permission {p}" for p in man.declared_permissions]
    for c in app.components:
        out.append("")
        head = f"{c.kind.value} {c.name}"
        if c.package != man.package_id:
            head += f" package {c.package}"
        out.append(head + " {")
        out += [f"{INDENT}{k.value} = {m}" for k, m in c.callbacks]
        out.append("}")
    for m in app.methods:
        out.append("")
        params = ", ".join(f"{p.name}: {p.type}" for p in m.params)
        out.append(f"method {m.name}({params}) {{")
        for b in m.blocks:
            out.append(f"{INDENT}block {b.id}:")
            for s in b.statements:
                out.extend(_stmt(s, 2))
            out.append(f"{INDENT * 2}{_term(b.terminator)}")
        out.append("}")
    return "\n".join(out) + "\n"
