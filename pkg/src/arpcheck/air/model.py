"""Data model for AIR, the textual app representation consumed by the analyzer.

An AIR program stands in for an APK: a manifest header, a list of
components that bind lifecycle/event callbacks to methods, and a flat list
of methods made of basic blocks.  All classes are frozen so a parsed model
can be shared across analyses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Union

DEFAULT_LAV = 30
MIN_LEVEL = 23


class ComponentKind(str, enum.Enum):
    ACTIVITY = "activity"
    SERVICE = "service"
    RECEIVER = "receiver"


class CallbackKind(str, enum.Enum):
    ON_CREATE = "onCreate"
    ON_START = "onStart"
    ON_RESUME = "onResume"
    ON_PAUSE = "onPause"
    ON_STOP = "onStop"
    ON_DESTROY = "onDestroy"
    ON_CLICK = "onClick"
    ON_REQUEST_PERMISSIONS_RESULT = "onRequestPermissionsResult"
    RUN = "run"


HANDLE_CALLBACK = CallbackKind.ON_REQUEST_PERMISSIONS_RESULT

# Receivers only get onCreate (standing in for onReceive) and posted runnables.
VALID_CALLBACKS = {
    ComponentKind.ACTIVITY: frozenset(CallbackKind),
    ComponentKind.SERVICE: frozenset({
        CallbackKind.ON_CREATE, CallbackKind.ON_START,
        CallbackKind.ON_DESTROY, CallbackKind.RUN,
    }),
    ComponentKind.RECEIVER: frozenset({CallbackKind.ON_CREATE, CallbackKind.RUN}),
}

PARAM_TYPES = ("string", "string_array", "int", "opaque")


# -- argument sources -------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    """A string literal."""
    value: str


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Opaque:
    """A value the analysis cannot see (``null`` in AIR text)."""


Source = Union[Var, Lit, Num, Opaque]


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class DefString:
    var: str
    value: str


@dataclass(frozen=True)
class DefStringFromParam:
    var: str
    param: str


@dataclass(frozen=True)
class DefArray:
    var: str
    elements: tuple[Source, ...]


@dataclass(frozen=True)
class ArrayStore:
    var: str
    index: int
    source: Source


@dataclass(frozen=True)
class CallMethod:
    target: str
    args: tuple[Source, ...] = ()


@dataclass(frozen=True)
class CallDangerous:
    api: str
    args: tuple[Source, ...] = ()


@dataclass(frozen=True)
class CallCheck:
    source: Source


@dataclass(frozen=True)
class CallRequest:
    source: Source
    request_code: int


@dataclass(frozen=True)
class CallExplain:
    source: Source


@dataclass(frozen=True)
class LaunchComponent:
    component: str


@dataclass(frozen=True)
class TryCatchSecurity:
    body: tuple["Statement", ...] = ()


Statement = Union[
    DefString, DefStringFromParam, DefArray, ArrayStore, CallMethod,
    CallDangerous, CallCheck, CallRequest, CallExplain, LaunchComponent,
    TryCatchSecurity,
]


# -- conditions and terminators --------------------------------------------

RV_OPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class RvCond:
    """``SDK_INT <op> value``."""
    op: str
    value: int

    def holds(self, level: int) -> bool:
        v = self.value
        return {
            "<": level < v, "<=": level <= v, ">": level > v,
            ">=": level >= v, "==": level == v, "!=": level != v,
        }[self.op]


@dataclass(frozen=True)
class CheckResultCond:
    """Tests the result of the last CHECK call in the same block."""


@dataclass(frozen=True)
class GrantResultCond:
    permission: str


Cond = Union[RvCond, CheckResultCond, GrantResultCond]


@dataclass(frozen=True)
class Goto:
    target: str


@dataclass(frozen=True)
class Branch:
    cond: Cond
    true_target: str
    false_target: str


@dataclass(frozen=True)
class Return:
    pass


Terminator = Union[Goto, Branch, Return]


def successors(term: Terminator) -> tuple[str, ...]:
    if isinstance(term, Goto):
        return (term.target,)
    if isinstance(term, Branch):
        return (term.true_target, term.false_target)
    return ()


# -- structure --------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Site:
    """Position of a statement: method, block and index path.

    The index path has one element per nesting level of ``trycatch_security``.
    An index equal to the block's statement count denotes the terminator.
    """
    method: str
    block: str
    index: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.method}/{self.block}/{'.'.join(map(str, self.index))}"


@dataclass(frozen=True)
class BasicBlock:
    id: str
    statements: tuple[Statement, ...]
    terminator: Terminator

    @property
    def successors(self) -> tuple[str, ...]:
        return successors(self.terminator)

    def flat_statements(self) -> Iterator[tuple[tuple[int, ...], Statement, bool]]:
        """Yield ``(index_path, stmt, in_trycatch)`` in execution order, descending into regions."""
        def walk(stmts, prefix, guarded):
            for i, s in enumerate(stmts):
                path = prefix + (i,)
                if isinstance(s, TryCatchSecurity):
                    yield from walk(s.body, path, True)
                else:
                    yield path, s, guarded
        yield from walk(self.statements, (), False)


@dataclass(frozen=True)
class Param:
    name: str
    type: str = "string"


@dataclass(frozen=True)
class Method:
    name: str
    params: tuple[Param, ...]
    blocks: tuple[BasicBlock, ...]

    @property
    def entry_block(self) -> str:
        return self.blocks[0].id

    def block(self, block_id: str) -> BasicBlock:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise KeyError(block_id)

    def sites(self) -> Iterator[tuple[Site, Statement, bool]]:
        for b in self.blocks:
            for idx, stmt, guarded in b.flat_statements():
                yield Site(self.name, b.id, idx), stmt, guarded

    def statement_at(self, site: Site) -> Statement:
        stmts = self.block(site.block).statements
        stmt = None
        for i in site.index:
            stmt = stmts[i]
            if isinstance(stmt, TryCatchSecurity):
                stmts = stmt.body
        return stmt


@dataclass(frozen=True)
class Component:
    name: str
    kind: ComponentKind
    package: str
    callbacks: tuple[tuple[CallbackKind, str], ...] = ()

    def callback(self, kind: CallbackKind) -> str | None:
        for k, m in self.callbacks:
            if k == kind:
                return m
        return None


@dataclass(frozen=True)
class Manifest:
    package_id: str
    target_sdk: int
    declared_permissions: tuple[str, ...] = ()


@dataclass(frozen=True)
class AppModel:
    manifest: Manifest
    components: tuple[Component, ...] = ()
    methods: tuple[Method, ...] = ()
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {m.name: m for m in self.methods})

    def method(self, name: str) -> Method:
        return self._index[name]

    def has_method(self, name: str) -> bool:
        return name in self._index

    def component(self, name: str) -> Component:
        for c in self.components:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def free_methods(self) -> tuple[Method, ...]:
        bound = {m for c in self.components for _, m in c.callbacks}
        return tuple(m for m in self.methods if m.name not in bound)

    def sites(self) -> Iterator[tuple[Site, Statement, bool]]:
        for m in self.methods:
            yield from m.sites()

    def string_literals(self) -> frozenset[str]:
        """Every string literal referenced anywhere in the program."""
        found = set()

        def from_source(src):
            if isinstance(src, Lit):
                found.add(src.value)

        for _, stmt, _ in self.sites():
            if isinstance(stmt, DefString):
                found.add(stmt.value)
            elif isinstance(stmt, DefArray):
                for e in stmt.elements:
                    from_source(e)
            elif isinstance(stmt, ArrayStore):
                from_source(stmt.source)
            elif isinstance(stmt, (CallMethod, CallDangerous)):
                for a in stmt.args:
                    from_source(a)
            elif isinstance(stmt, (CallCheck, CallRequest, CallExplain)):
                from_source(stmt.source)
        return frozenset(found)
