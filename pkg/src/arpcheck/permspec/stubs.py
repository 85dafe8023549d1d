"""Extract API-to-permission mappings from framework stub sources.

The stub format is a simplified Java skeleton::

    permission android.permission.ACCESS_FINE_LOCATION dangerous

    class android.location.LocationManager {
        @RequiresPermission(anyOf = {ACCESS_COARSE_LOCATION, ACCESS_FINE_LOCATION})
        public void requestLocationUpdates(String provider, long minTime, float minDistance, LocationListener listener);

        /** Requires {@link android.Manifest.permission#READ_PHONE_STATE}. */
        public String getLine1Number();
    }

``@RequiresPermission`` annotations take precedence over Javadoc links on
the same method; a set of links yields an ``anyOf`` requirement.
"""

from __future__ import annotations

import re

from .store import LevelMapping, MappingError, Mode, ProtectionLevel, Requirement, UnknownPermission
from ..air.model import MIN_LEVEL, DEFAULT_LAV


class StubSyntaxError(MappingError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


_PERM_DECL = re.compile(r"^permission\s+(\S+)\s+(\S+)\s*$")
_CLASS = re.compile(r"^(?:(?:public|final|abstract|static)\s+)*(?:class|interface)\s+([\w.$]+)[^{]*\{\s*$")
_METHOD = re.compile(r"^(?:[\w$<>\[\],.?@\s]+\s)?([\w$]+)\s*\(([^()]*)\)\s*(?:throws\s+[\w.,\s]+)?[;{]?\s*}?\s*$")
_LINK = re.compile(r"\{@link\s+(?:android\.)?Manifest\.permission#(\w+)\s*\}")
_ANNOT_START = re.compile(r"^@(?:android\.annotation\.|androidx\.annotation\.)?RequiresPermission\b")
_PERM_REF = re.compile(r'"([^"]+)"|((?:android\.)?Manifest\.permission\.)?([A-Za-z_][\w.]*)')


def _param_types(params: str) -> list[str]:
    out = []
    for p in filter(None, (p.strip() for p in params.split(","))):
        p = re.sub(r"@\w+(\([^)]*\))?\s*", "", p)
        p = re.sub(r"<[^<>]*>", "", p)
        words = [w for w in p.split() if w != "final"]
        if not words:
            continue
        out.append(words[0] if len(words) == 1 else " ".join(words[:-1]))
    return out


def _annotation_requirement(body: str, lineno: int):
    """Return ``(mode, [raw perm refs])`` for the text inside ``@RequiresPermission(...)``."""
    m = re.match(r"^\s*(anyOf|allOf|value)\s*=\s*(.*)$", body, re.S)
    mode, refs = Mode.ANY_OF, body
    if m:
        if m.group(1) == "allOf":
            mode = Mode.ALL_OF
        refs = m.group(2)
    refs = re.split(r",\s*conditional\s*=.*$", refs.strip(), flags=re.S)[0].strip()
    if refs.startswith("{"):
        if not refs.endswith("}"):
            raise StubSyntaxError(lineno, "unterminated permission list")
        refs = refs[1:-1]
    names = []
    for part in filter(None, (p.strip() for p in refs.split(","))):
        pm = _PERM_REF.fullmatch(part)
        if not pm:
            raise StubSyntaxError(lineno, f"cannot read permission reference {part!r}")
        names.append(pm.group(1) if pm.group(1) else pm.group(3))
    if not names:
        raise StubSyntaxError(lineno, "annotation names no permission")
    return mode, names


def _resolve(name: str, declared: dict, level: int) -> str:
    for cand in (name, "android.permission." + name):
        if cand in declared:
            return cand
    raise UnknownPermission(name, level)


def parse_stubs(text: str, level: int, lav: int = DEFAULT_LAV) -> LevelMapping:
    if not MIN_LEVEL <= level <= lav:
        raise ValueError(f"level {level} outside [{MIN_LEVEL}, {lav}]")
    declared: dict[str, ProtectionLevel] = {}
    found: dict[str, tuple] = {}  # sig -> (mode, refs, lineno)
    classes: list[str] = []
    pending_annot = None
    pending_links: list[str] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("//") or line.startswith("#"):
            continue
        m = _PERM_DECL.match(line)
        if m:
            try:
                declared[m.group(1)] = ProtectionLevel.parse(m.group(2))
            except MappingError as e:
                raise StubSyntaxError(lineno, str(e)) from None
            continue
        if line.startswith("/*"):
            chunk = [line]
            while "*/" not in chunk[-1]:
                if i >= len(lines):
                    raise StubSyntaxError(lineno, "unterminated comment")
                chunk.append(lines[i])
                i += 1
            comment = " ".join(chunk)
            if comment.startswith("/**"):
                pending_links = _LINK.findall(comment)
            rest = chunk[-1].split("*/", 1)[1].strip()
            if not rest:
                continue
            line = rest
        if _ANNOT_START.match(line):
            text_acc = line
            while text_acc.count("(") > text_acc.count(")"):
                if i >= len(lines):
                    raise StubSyntaxError(lineno, "unterminated @RequiresPermission")
                text_acc += " " + lines[i].strip()
                i += 1
            open_at = text_acc.find("(")
            if open_at < 0:
                raise StubSyntaxError(lineno, "@RequiresPermission without arguments")
            close_at = text_acc.rfind(")")
            pending_annot = (*_annotation_requirement(text_acc[open_at + 1:close_at], lineno), lineno)
            continue
        if line.startswith("@"):
            continue  # other annotations
        m = _CLASS.match(line)
        if m:
            classes.append(m.group(1))
            continue
        if line == "}":
            if not classes:
                raise StubSyntaxError(lineno, "unbalanced '}'")
            classes.pop()
            continue
        m = _METHOD.match(line)
        if not m:
            raise StubSyntaxError(lineno, f"unrecognized line {line!r}")
        owner = ".".join(classes[-1:])
        sig = f"{owner + '.' if owner else ''}{m.group(1)}({','.join(_param_types(m.group(2)))})"
        if pending_annot is not None:
            found[sig] = pending_annot
        elif pending_links:
            found[sig] = (Mode.ANY_OF, list(dict.fromkeys(pending_links)), lineno)
        pending_annot, pending_links = None, []
    if classes:
        raise StubSyntaxError(len(lines), f"class {classes[-1]} not closed")

    apis = {}
    for sig, (mode, refs, _lineno) in found.items():
        names = [_resolve(r, declared, level) for r in refs]
        apis[sig] = Requirement.of(mode, {n: declared[n] for n in names})
    return LevelMapping(level, declared, apis)
