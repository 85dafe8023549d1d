import os
import random

import pytest

from arpcheck.air import load_app, parse_app
from arpcheck.air.model import CallbackKind, CallCheck, CallDangerous, CallMethod, CallRequest, Site
from arpcheck.contexts import (
    ManagementKind, NoRequirement, TargetKind, best_matches, classify, contexts_to_json,
    extract_contexts, filter_app_only, satisfies,
)
from arpcheck.dataflow import solve_reaching
from arpcheck.graphs import build_call_graph, build_icc
from arpcheck.permspec import Mode, ProtectionLevel, Requirement

from conftest import CORPUS

D = ProtectionLevel.DANGEROUS


def random_call_app(rng):
    n = rng.randint(2, 6)
    lines = ["app com.example.cg targetSdk 28", "activity A {", "  onClick = m0", "  onCreate = m1", "}"]
    for i in range(n):
        body = []
        for _ in range(rng.randint(0, 3)):
            r = rng.random()
            if r < 0.55:
                body.append(f"call m{rng.randrange(n)}()")
            elif r < 0.8:
                body.append("dangerous <java.io.File.delete()>()")
            else:
                body.append('check "android.permission.CAMERA"')
        lines.append(f"method m{i}() {{\n  block b0:\n" + "".join(f"    {s}\n" for s in body) + "    return\n}")
    return parse_app("\n".join(lines) + "\n")


def forward_contexts(app, max_len):
    """Brute force: walk forward from every entry, never reusing a call edge."""
    out = set()
    cg = build_call_graph(app)

    def walk(entry, method, path, used):
        for site, stmt, _ in app.method(method).sites():
            if isinstance(stmt, (CallDangerous, CallCheck, CallRequest)) and len(path) + 1 <= max_len:
                out.add((entry, path + (site,)))
            if isinstance(stmt, CallMethod) and site not in used and len(path) + 1 < max_len:
                walk(entry, stmt.target, path + (site,), used | {site})
    for ent in cg.entries:
        walk(ent, ent.method, (), frozenset())
    return out


def test_contexts_match_forward_enumeration():
    rng = random.Random(2)
    for _ in range(150):
        app = random_call_app(rng)
        bound = rng.choice((3, 5, 16))
        diags = []
        got = extract_contexts(build_call_graph(app), app, bound, diags)
        complete = {(c.entry, c.path) for c in got if not c.truncated}
        assert complete == forward_contexts(app, bound)
        truncated = [c for c in got if c.truncated]
        assert all(c.entry is None and len(c.path) == bound for c in truncated)
        assert len(diags) == len(truncated)


def test_recursion_terminates_with_truncation():
    app = parse_app("""
app a.b targetSdk 28
activity A { onClick = m }
method m() { block b0: call m() dangerous <java.io.File.delete()>() return }
""")
    ctxs = extract_contexts(build_call_graph(app), app, max_len=16)
    dangerous = [c for c in ctxs if c.kind is TargetKind.DANGEROUS]
    # one direct context and one through the single self edge, which may not be reused
    assert sorted(len(c.path) for c in dangerous) == [1, 2]
    assert not any(c.truncated for c in ctxs)


def test_settings_app_contexts_and_json():
    app = load_app(os.path.join(CORPUS, "apps", "icc_settings.buggy.air"))
    ctxs = extract_contexts(build_call_graph(app), app)
    kinds = sorted((c.kind.value, str(c.entry)) for c in ctxs)
    assert kinds == [
        ("check", "MainActivity.onCreate:main_onCreate"),
        ("dangerous", "SettingsActivity.onClick:settings_onClick"),
        ("launch", "MainActivity.onClick:main_onClick"),
        ("request", "MainActivity.onCreate:main_onCreate"),
    ]
    assert '"truncated": false' in contexts_to_json(ctxs)


def test_filter_app_only():
    app = parse_app("""
app com.example targetSdk 28
activity A { onClick = a }
activity Lib package org.thirdparty { onClick = b }
activity Sub package com.example.ui { onClick = b }
method a() { block b0: call b() return }
method b() { block b0: dangerous <java.io.File.delete()>() return }
""")
    ctxs = extract_contexts(build_call_graph(app), app)
    assert len(filter_app_only(ctxs, "com.example", app, "over")) == 3
    under = filter_app_only(ctxs, "com.example", app, "under")
    assert sorted(c.entry.component for c in under) == ["A", "Sub"]


CLASSIFY_APP = """
app a.b targetSdk 28
activity A { onCreate = a1
  onClick = a2 }
activity B { onClick = b1 }
activity C { onClick = c1 }
method a1() { block b0: launch B check "x" call h() return }
method a2() { block b0: dangerous <java.io.File.delete()>() return }
method b1() { block b0: dangerous <java.io.File.delete()>() return }
method c1() { block b0: check "x" return }
method h() { block b0: check "x" dangerous <java.io.File.delete()>() return }
"""


def _ctx(ctxs, kind, entry_method, last_method):
    return next(c for c in ctxs if c.kind is kind and c.entry.method == entry_method and c.site.method == last_method)


def test_classify_kinds():
    app = parse_app(CLASSIFY_APP)
    cg = build_call_graph(app)
    icc = build_icc(app, cg)
    ctxs = extract_contexts(cg, app)
    chk_a1 = _ctx(ctxs, TargetKind.CHECK, "a1", "a1")
    chk_h = _ctx(ctxs, TargetKind.CHECK, "a1", "h")
    chk_c1 = _ctx(ctxs, TargetKind.CHECK, "c1", "c1")
    d_h = _ctx(ctxs, TargetKind.DANGEROUS, "a1", "h")
    d_a2 = _ctx(ctxs, TargetKind.DANGEROUS, "a2", "a2")
    d_b1 = _ctx(ctxs, TargetKind.DANGEROUS, "b1", "b1")
    assert classify(d_h, chk_h, icc) is ManagementKind.INTRA_PROCEDURE
    assert classify(d_h, chk_a1, icc) is ManagementKind.INTER_PROCEDURE
    assert classify(d_a2, chk_a1, icc) is ManagementKind.INTER_CALLBACK
    assert classify(d_b1, chk_a1, icc) is ManagementKind.INTER_COMPONENT
    assert classify(d_b1, chk_c1, icc) is None
    # symmetric in its two arguments
    for x, y in [(d_h, chk_a1), (d_a2, chk_a1), (d_b1, chk_a1), (d_b1, chk_c1)]:
        assert classify(x, y, icc) == classify(y, x, icc)
    assert ManagementKind.INTRA_PROCEDURE < ManagementKind.INTER_COMPONENT


def test_satisfies():
    anyof = Requirement.of(Mode.ANY_OF, {"a": D, "b": D})
    allof = Requirement.of(Mode.ALL_OF, {"a": D, "b": D})
    assert satisfies(anyof, {"b"}) and not satisfies(anyof, {"c"})
    assert satisfies(allof, {"a", "b", "c"}) and not satisfies(allof, {"a"})


def test_best_matches_prefers_closest(store):
    app = parse_app("""
app a.b targetSdk 28
activity A { onCreate = a1
  onClick = a2 }
method a1() { block b0: check "android.permission.CAMERA" return }
method a2() {
  block b0:
    check "android.permission.CAMERA"
    check "android.permission.RECORD_AUDIO"
    dangerous <android.hardware.Camera.open()>()
    return
}
""")
    cg = build_call_graph(app)
    ctxs = extract_contexts(cg, app)
    d = next(c for c in ctxs if c.kind is TargetKind.DANGEROUS)
    checks = [c for c in ctxs if c.kind is TargetKind.CHECK]
    res = solve_reaching(app)
    got = best_matches(d, checks, store, 28, res, build_icc(app, cg), app)
    assert [(m.kind, str(m.check.site)) for m in got] == [(ManagementKind.INTRA_PROCEDURE, "a2/b0/0")]
    d2 = type(d)(d.entry, d.path, d.kind, "unknown.Api()")
    with pytest.raises(NoRequirement):
        best_matches(d2, checks, store, 28, res, build_icc(app, cg), app)


def test_context_sort_is_deterministic():
    app = parse_app(CLASSIFY_APP)
    cg = build_call_graph(app)
    a = extract_contexts(cg, app)
    b = extract_contexts(build_call_graph(parse_app(CLASSIFY_APP)), app)
    assert a == b
    assert a[0].entry.kind in (CallbackKind.ON_CREATE, CallbackKind.ON_CLICK)
