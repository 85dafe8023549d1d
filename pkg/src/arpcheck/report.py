"""JSON and text rendering of analysis results."""

from __future__ import annotations

import json

from .detector import AnalysisResult, BugReport


def finding_to_json(r: BugReport) -> dict:
    ent = r.context.entry
    return {
        "kind": r.kind,
        "api": r.api,
        "component": ent.component if ent else None,
        "entry": f"{ent.kind.value}:{ent.method}" if ent else None,
        "path": [str(s) for s in r.context.path],
        "levels": sorted(r.levels),
        "evidence": r.evidence,
        "suppressed_by": r.suppressed_by,
        "matched_checks": [m.to_json() for m in r.matched_checks],
    }


def report_dict(result: AnalysisResult, verbose: bool = False) -> dict:
    return {
        "app": result.app.manifest.package_id,
        "findings": [finding_to_json(r) for r in result.visible(verbose)],
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def to_json(result: AnalysisResult, verbose: bool = False) -> str:
    return dumps(report_dict(result, verbose))


def loads(text: str) -> dict:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "app" not in doc or not isinstance(doc.get("findings"), list):
        raise ValueError("not an analysis report")
    return doc


_KIND_LABEL = {"type1": "Type-1", "type2": "Type-2"}


def to_text(result: AnalysisResult, verbose: bool = False) -> str:
    shown = result.visible(verbose)
    lines = []
    for r in shown:
        f = finding_to_json(r)
        where = f"{f['component']}.{f['entry']}" if f["component"] else "<truncated context>"
        levels = ",".join(map(str, f["levels"]))
        head = f"{_KIND_LABEL[r.kind]} {r.api} in {where} [{r.evidence}] levels {levels}"
        if r.suppressed_by:
            head += f" (suppressed: {r.suppressed_by})"
        lines.append(head)
        lines.append("    path: " + " -> ".join(f["path"]))
        for m in f["matched_checks"]:
            lines.append(f"    check {m['kind']} at {m['site']} {m['permissions']}" + (" (fallback)" if m["fallback"] else ""))
    if verbose:
        for site, perms in result.explains:
            lines.append(f"explain at {site}: {sorted(perms)}")
        lines.extend(result.diagnostics)
    n = len(shown)
    lines.append(f"{result.app.manifest.package_id}: {n} finding{'s' if n != 1 else ''}")
    return "\n".join(lines) + "\n"
