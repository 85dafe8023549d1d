"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line; run with ``pytest -s`` to
see them, or execute this file directly.
"""

import json
import os
import random
import sys
import time

import pytest

from arpcheck import report
from arpcheck.air import load_app, parse_app, pretty_print
from arpcheck.bench import Metrics, load_manifest, pct, run_bench
from arpcheck.contexts import TargetKind, extract_contexts
from arpcheck.dataflow import solve_reaching
from arpcheck.detector import TYPE1, TYPE2, analyze, reachable_rvs
from arpcheck.graphs import build_call_graph, compute_dominators
from arpcheck.permspec import ChangeKind, diff_levels, load_store

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import oracles  # noqa: E402
import transform  # noqa: E402
from conftest import MANIFEST, MAPPINGS  # noqa: E402


def verdict(number, title, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} [{number}] {title}" + (f": {detail}" if detail else ""))
    assert ok, detail


@pytest.fixture(scope="module")
def store():
    return load_store(MAPPINGS)


def test_1_metric_reproduction():
    start = time.perf_counter()
    t1 = Metrics(tp=26, tn=32, fp=3, fn=9)
    t2 = Metrics(tp=23, tn=19, fp=6, fn=2)
    got = [float(x * 100) for m in (t1, t2) for x in (m.precision, m.recall, m.f1)]
    want = [89.66, 74.29, 81.25, 79.31, 92.00, 85.19]
    elapsed = time.perf_counter() - start
    ok = all(abs(g - w) <= 0.01 for g, w in zip(got, want)) and elapsed < 1.0
    shown = "/".join(pct(x) for m in (t1, t2) for x in (m.precision, m.recall, m.f1))
    verdict(1, "metric reproduction", ok, f"{shown} in {elapsed * 1000:.1f} ms")


def test_2_corpus_verdicts(store):
    entries = load_manifest(MANIFEST)
    result = run_bench(entries, store)
    wrong = []
    for o in result.outcomes:
        if o.error or o.entry.expected_kind not in o.buggy_kinds or o.patched_kinds:
            wrong.append(o.entry.name)
    names = {e.name for e in entries}
    required = {"icc_settings", "icc_picker", "sync_location", "device_id", "create_group"}
    levels_ok = True
    for name in ("device_id",):
        entry = next(e for e in entries if e.name == name)
        reps = analyze(load_app(entry.buggy_path), store).visible()
        levels_ok &= [sorted(r.levels) for r in reps] == [[29, 30]]
    ok = len(entries) >= 12 and not wrong and required <= names and levels_ok
    agree = len(entries) - len(wrong)
    verdict(2, "corpus verdicts", ok, f"{agree}/{len(entries)} pairs agree" + (f"; wrong: {wrong}" if wrong else ""))


def test_3_dominator_oracle():
    rng = random.Random(20240)
    start = time.perf_counter()
    bad = 0
    n = 600
    for _ in range(n):
        entry, succ = oracles.random_cfg(rng, 12)
        tree = compute_dominators(entry, lambda x: succ[x])
        expected = oracles.dominator_sets(entry, succ)
        if set(tree.nodes) != set(expected) or any(tree.dominators_of(v) != d for v, d in expected.items()):
            bad += 1
    elapsed = time.perf_counter() - start
    verdict(3, "dominator oracle", bad == 0 and elapsed < 10.0, f"{n - bad}/{n} CFGs exact in {elapsed:.2f} s")


def test_4_reaching_definition_oracle():
    rng = random.Random(4242)
    n, bad, wrappers = 250, 0, 0
    for _ in range(n):
        app = parse_app(oracles.flow_app(rng))
        wrappers += app.has_method("helper")
        expected = oracles.dataflow_oracle(app)
        got = solve_reaching(app).sites
        if {s: got.get(s, "missing") for s in expected} != expected:
            bad += 1
    ok = bad == 0 and wrappers > 0 and n - wrappers > 0
    verdict(4, "reaching-definition oracle", ok,
            f"{n - bad}/{n} programs exact ({wrappers} with a wrapper method)")


def test_5_reachable_rv_oracle():
    rng = random.Random(555)
    n, bad = 250, 0
    for _ in range(n):
        app = parse_app(oracles.guarded_app(rng))
        ctx = next(c for c in extract_contexts(build_call_graph(app), app) if c.kind is TargetKind.DANGEROUS)
        if reachable_rvs(ctx, app) != oracles.rvs_oracle(app, ctx):
            bad += 1
    plain = parse_app("app a.b targetSdk 28\nactivity A { onClick = m }\n"
                      "method m() { block b0: dangerous <java.io.File.delete()>() return }\n")
    ctx = next(c for c in extract_contexts(build_call_graph(plain), plain) if c.kind is TargetKind.DANGEROUS)
    unguarded = reachable_rvs(ctx, plain, lav=30) == frozenset(range(23, 31))
    verdict(5, "reachable-RV oracle", bad == 0 and unguarded,
            f"{n - bad}/{n} contexts exact; unguarded = 23..30: {unguarded}")


def test_6_evolution_diff_oracle(store):
    rng = random.Random(66)
    n, bad = 150, 0
    for _ in range(n):
        st = oracles.random_store(rng)
        a = rng.randint(23, 29)
        b = rng.randint(a + 1, 30)
        rep = diff_levels(st, a, b)
        got = (sorted(rep.added), sorted(rep.deleted), sorted((s, k.value) for s, k in rep.changed))
        if got != oracles.diff_oracle(st, a, b):
            bad += 1
    changed = dict(diff_levels(store, 28, 29).changed)
    fixture = changed.get("android.telephony.TelephonyManager.getDeviceId()") is ChangeKind.RESTRICTED
    verdict(6, "evolution diff oracle", bad == 0 and fixture,
            f"{n - bad}/{n} store pairs exact; getDeviceId 28->29 restricted: {fixture}")


def test_7_monotone_suppression(store):
    failures = []
    for entry in load_manifest(MANIFEST):
        app = load_app(entry.buggy_path)
        reports = [r for r in analyze(app, store).visible() if r.kind == entry.expected_kind]
        if not reports:
            failures.append(f"{entry.name}: nothing to suppress")
            continue
        patched = parse_app(pretty_print(transform.suppress_reports(app, store, reports)))
        left = analyze(patched, store).visible()
        if left:
            failures.append(f"{entry.name}: {len(left)} finding(s) remain")
    verdict(7, "monotone suppression", not failures,
            "; ".join(failures) if failures else "every buggy fixture is clean after wrapping")


def test_8_determinism(store):
    files = []
    for e in load_manifest(MANIFEST):
        files += [e.buggy_path, e.patched_path]
    differing = []
    for path in files:
        first = report.to_json(analyze(load_app(path), store), verbose=True)
        second = report.to_json(analyze(load_app(path), store), verbose=True)
        json.loads(first)
        if first != second:
            differing.append(os.path.basename(path))
    verdict(8, "determinism", not differing,
            f"{len(files) - len(differing)}/{len(files)} files byte-identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
