"""Tokenizer, recursive-descent parser and validator for AIR text."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .model import (
    DEFAULT_LAV, MIN_LEVEL, PARAM_TYPES, RV_OPS, VALID_CALLBACKS, HANDLE_CALLBACK,
    AppModel, ArrayStore, BasicBlock, Branch, CallbackKind, CallCheck,
    CallDangerous, CallExplain, CallMethod, CallRequest, CheckResultCond,
    Component, ComponentKind, DefArray, DefString, DefStringFromParam, Goto,
    GrantResultCond, LaunchComponent, Lit, Manifest, Method, Num, Opaque,
    Param, Return, RvCond, TryCatchSecurity, Var,
)


class AirError(Exception):
    """Base class for everything ``parse_app`` raises."""


class AirSyntaxError(AirError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line, self.col, self.expected, self.found = line, col, expected, found
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class ResolutionError(AirError):
    def __init__(self, symbol: str, detail: str = ""):
        self.symbol = symbol
        super().__init__(f"unresolved {symbol}" + (f" ({detail})" if detail else ""))


class InvariantError(AirError):
    pass


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<apisig><[A-Za-z_$][^<>\n]*>)
  | (?P<cmp><=|>=|==|!=|<|>)
  | (?P<int>-?\d+)
  | (?P<keyword>uses-permission\b)
  | (?P<ident>[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*)
  | (?P<punct>[{}()\[\],:=])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise AirSyntaxError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_STMT_KEYWORDS = {"def", "array", "store", "call", "dangerous", "check",
                  "request", "explain", "launch", "trycatch_security"}
_TERM_KEYWORDS = {"goto", "branch", "return"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, expected: str):
        tok = self.peek()
        raise AirSyntaxError(tok.line, tok.col, expected, tok.text or "end of input")

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("ident", "keyword", "punct", "cmp") and tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        return self.next()

    def expect_kind(self, kind: str, what: str | None = None) -> Token:
        if self.peek().kind != kind:
            self.fail(what or kind)
        return self.next()

    def ident(self, what: str = "identifier", dotted: bool = False) -> str:
        tok = self.expect_kind("ident", what)
        if not dotted and "." in tok.text:
            raise AirSyntaxError(tok.line, tok.col, what, tok.text)
        return tok.text

    def integer(self) -> int:
        return int(self.expect_kind("int", "integer").text)

    def string(self) -> str:
        return json.loads(self.expect_kind("string", "string literal").text)

    # grammar
    def app(self):
        self.expect("app")
        package_id = self.ident("package id", dotted=True)
        self.expect("targetSdk")
        target = self.integer()
        perms = []
        while self.at("uses-permission"):
            self.next()
            perms.append(self.ident("permission name", dotted=True))
        components = []
        while self.peek().kind == "ident" and self.peek().text in {k.value for k in ComponentKind}:
            components.append(self.component(package_id))
        methods = []
        while self.at("method"):
            methods.append(self.method())
        if self.peek().kind != "eof":
            self.fail("component, method or end of input")
        return Manifest(package_id, target, tuple(perms)), tuple(components), tuple(methods)

    def component(self, default_package: str) -> Component:
        kind = ComponentKind(self.next().text)
        name = self.ident("component name")
        package = default_package
        if self.at("package"):
            self.next()
            package = self.ident("package", dotted=True)
        self.expect("{")
        callbacks = []
        while not self.at("}"):
            tok = self.peek()
            try:
                cb = CallbackKind(self.ident("callback kind"))
            except ValueError:
                raise AirSyntaxError(tok.line, tok.col, "callback kind", tok.text) from None
            self.expect("=")
            callbacks.append((cb, self.ident("method name")))
        self.expect("}")
        return Component(name, kind, package, tuple(callbacks))

    def method(self) -> Method:
        self.expect("method")
        name = self.ident("method name")
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.ident("parameter name")
                ptype = "string"
                if self.at(":"):
                    self.next()
                    tok = self.peek()
                    ptype = self.ident("parameter type")
                    if ptype not in PARAM_TYPES:
                        raise AirSyntaxError(tok.line, tok.col, "one of " + "/".join(PARAM_TYPES), ptype)
                params.append(Param(pname, ptype))
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        self.expect("{")
        blocks = [self.block()]
        while self.at("block"):
            blocks.append(self.block())
        self.expect("}")
        return Method(name, tuple(params), tuple(blocks))

    def block(self) -> BasicBlock:
        self.expect("block")
        bid = self.ident("block id")
        self.expect(":")
        stmts = []
        while self.peek().kind == "ident" and self.peek().text in _STMT_KEYWORDS:
            stmts.append(self.statement())
        if not (self.peek().kind == "ident" and self.peek().text in _TERM_KEYWORDS):
            self.fail("statement or terminator (goto/branch/return)")
        return BasicBlock(bid, tuple(stmts), self.terminator())

    def source(self):
        tok = self.peek()
        if tok.kind == "string":
            return Lit(self.string())
        if tok.kind == "int":
            return Num(self.integer())
        if tok.kind == "ident" and "." not in tok.text:
            self.next()
            return Opaque() if tok.text == "null" else Var(tok.text)
        self.fail("variable, string literal, integer or null")

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.source())
            while self.at(","):
                self.next()
                out.append(self.source())
        self.expect(")")
        return tuple(out)

    def statement(self):
        kw = self.next().text
        if kw == "def":
            var = self.ident("variable")
            self.expect("=")
            if self.at("param"):
                self.next()
                return DefStringFromParam(var, self.ident("parameter name"))
            return DefString(var, self.string())
        if kw == "array":
            var = self.ident("variable")
            self.expect("=")
            self.expect("[")
            elems = []
            if not self.at("]"):
                elems.append(self.source())
                while self.at(","):
                    self.next()
                    elems.append(self.source())
            self.expect("]")
            return DefArray(var, tuple(elems))
        if kw == "store":
            var = self.ident("variable")
            self.expect("[")
            idx = self.integer()
            self.expect("]")
            self.expect("=")
            return ArrayStore(var, idx, self.source())
        if kw == "call":
            target = self.ident("method name")
            return CallMethod(target, self.args())
        if kw == "dangerous":
            sig = self.expect_kind("apisig", "API signature <...>").text[1:-1]
            return CallDangerous(sig, self.args())
        if kw == "check":
            return CallCheck(self.source())
        if kw == "request":
            src = self.source()
            return CallRequest(src, self.integer())
        if kw == "explain":
            return CallExplain(self.source())
        if kw == "launch":
            return LaunchComponent(self.ident("component name"))
        # trycatch_security
        self.expect("{")
        body = []
        while self.peek().kind == "ident" and self.peek().text in _STMT_KEYWORDS:
            body.append(self.statement())
        self.expect("}")
        return TryCatchSecurity(tuple(body))

    def terminator(self):
        kw = self.next().text
        if kw == "goto":
            return Goto(self.ident("block id"))
        if kw == "return":
            return Return()
        tok = self.peek()
        if self.at("sdk"):
            self.next()
            op = self.expect_kind("cmp", "comparison operator").text
            cond = RvCond(op, self.integer())
        elif self.at("check_granted"):
            self.next()
            cond = CheckResultCond()
        elif self.at("grant_result"):
            self.next()
            cond = GrantResultCond(self.ident("permission name", dotted=True))
        else:
            raise AirSyntaxError(tok.line, tok.col, "sdk, check_granted or grant_result", tok.text)
        t = self.ident("block id")
        f = self.ident("block id")
        return Branch(cond, t, f)


def _api_arity(sig: str) -> int | None:
    m = re.search(r"\(([^()]*)\)\s*$", sig)
    if not m:
        return None
    inner = m.group(1).strip()
    return 0 if not inner else inner.count(",") + 1


def validate(app: AppModel, lav: int = DEFAULT_LAV) -> None:
    """Raise ``ResolutionError``/``InvariantError`` if *app* breaks a model invariant."""
    man = app.manifest
    if not MIN_LEVEL <= man.target_sdk <= lav:
        raise InvariantError(f"targetSdk {man.target_sdk} outside [{MIN_LEVEL}, {lav}]")
    if any(not p for p in man.declared_permissions):
        raise InvariantError("empty permission name")

    comp_names = [c.name for c in app.components]
    dup = {n for n in comp_names if comp_names.count(n) > 1}
    if dup:
        raise InvariantError(f"duplicate component name(s): {sorted(dup)}")
    meth_names = [m.name for m in app.methods]
    dup = {n for n in meth_names if meth_names.count(n) > 1}
    if dup:
        raise InvariantError(f"duplicate method name(s): {sorted(dup)}")

    handle_methods = set()
    for c in app.components:
        seen = set()
        for kind, mname in c.callbacks:
            if kind in seen:
                raise InvariantError(f"{c.name}: callback {kind.value} bound twice")
            seen.add(kind)
            if kind not in VALID_CALLBACKS[c.kind]:
                raise InvariantError(f"{c.name}: {kind.value} is not a {c.kind.value} callback")
            if not app.has_method(mname):
                raise ResolutionError(mname, f"callback {c.name}.{kind.value}")
            if kind == HANDLE_CALLBACK:
                handle_methods.add(mname)

    comps = set(comp_names)
    for m in app.methods:
        ids = [b.id for b in m.blocks]
        if len(set(ids)) != len(ids):
            raise InvariantError(f"{m.name}: duplicate block ids")
        pnames = [p.name for p in m.params]
        if len(set(pnames)) != len(pnames):
            raise InvariantError(f"{m.name}: duplicate parameter names")
        for b in m.blocks:
            for succ in b.successors:
                if succ not in ids:
                    raise ResolutionError(succ, f"successor of {m.name}/{b.id}")
            checks_in_block = 0
            for _, stmt, _ in b.flat_statements():
                if isinstance(stmt, CallCheck):
                    checks_in_block += 1
                elif isinstance(stmt, CallMethod):
                    if not app.has_method(stmt.target):
                        raise ResolutionError(stmt.target, f"call in {m.name}/{b.id}")
                    want = len(app.method(stmt.target).params)
                    if len(stmt.args) != want:
                        raise InvariantError(
                            f"{m.name}/{b.id}: call {stmt.target} with {len(stmt.args)} args, expected {want}")
                elif isinstance(stmt, CallDangerous):
                    want = _api_arity(stmt.api)
                    if want is not None and len(stmt.args) != want:
                        raise InvariantError(
                            f"{m.name}/{b.id}: {stmt.api} called with {len(stmt.args)} args, expected {want}")
                elif isinstance(stmt, LaunchComponent):
                    if stmt.component not in comps:
                        raise ResolutionError(stmt.component, f"launch in {m.name}/{b.id}")
                elif isinstance(stmt, DefStringFromParam):
                    if stmt.param not in pnames:
                        raise ResolutionError(stmt.param, f"parameter of {m.name}")
            term = b.terminator
            if isinstance(term, Branch):
                cond = term.cond
                if isinstance(cond, RvCond):
                    if cond.op not in RV_OPS:
                        raise InvariantError(f"{m.name}/{b.id}: bad operator {cond.op}")
                    if not 1 <= cond.value <= lav:
                        raise InvariantError(f"{m.name}/{b.id}: sdk constant {cond.value} outside [1, {lav}]")
                elif isinstance(cond, CheckResultCond):
                    if not checks_in_block:
                        raise InvariantError(f"{m.name}/{b.id}: check_granted without a check in the block")
                elif isinstance(cond, GrantResultCond):
                    if m.name not in handle_methods:
                        raise InvariantError(
                            f"{m.name}/{b.id}: grant_result outside an onRequestPermissionsResult callback")


def parse_app(text: str, lav: int = DEFAULT_LAV) -> AppModel:
    """Parse and validate AIR source text."""
    manifest, components, methods = _Parser(text).app()
    app = AppModel(manifest, components, methods)
    validate(app, lav)
    return app


def load_app(path, lav: int = DEFAULT_LAV) -> AppModel:
    with open(path, encoding="utf-8") as f:
        return parse_app(f.read(), lav)
