"""Dominator trees over basic-block CFGs.

Immediate dominators are computed with the iterative algorithm of Cooper,
Harvey and Kennedy over reverse post-order.  ``edge_dominators`` splits each
conditional edge with a synthetic node so that "the true edge of branch B
dominates block X" becomes an ordinary dominance query.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, NamedTuple

from ..air.model import Branch, Method


class EdgeNode(NamedTuple):
    """Synthetic node placed on the true (``taken=True``) or false edge leaving ``block``."""
    block: str
    taken: bool


def reverse_postorder(entry, succs: Callable[[Hashable], Iterable[Hashable]]) -> list:
    seen = {entry}
    order = []
    stack = [(entry, iter(succs(entry)))]
    while stack:
        node, it = stack[-1]
        for nxt in it:
            if nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(succs(nxt))))
                break
        else:
            stack.pop()
            order.append(node)
    order.reverse()
    return order


class DominatorTree:
    def __init__(self, entry, idom: dict):
        self.entry = entry
        self.idom = idom  # node -> immediate dominator; entry -> None
        self._depth = {}
        for n in idom:
            self._depth_of(n)

    def _depth_of(self, n) -> int:
        chain = []
        while n not in self._depth:
            parent = self.idom[n]
            if parent is None:
                self._depth[n] = 0
                break
            chain.append(n)
            n = parent
        d = self._depth[n]
        for c in reversed(chain):
            d += 1
            self._depth[c] = d
        return self._depth[chain[0]] if chain else d

    @property
    def nodes(self):
        return self.idom.keys()

    def __contains__(self, n) -> bool:
        return n in self.idom

    def dominates(self, a, b) -> bool:
        """Reflexive dominance; unreachable nodes dominate and are dominated by nothing."""
        if a not in self.idom or b not in self.idom:
            return False
        da = self._depth[a]
        while self._depth[b] > da:
            b = self.idom[b]
        return a == b

    def strictly_dominates(self, a, b) -> bool:
        return a != b and self.dominates(a, b)

    def dominators_of(self, n) -> set:
        out = set()
        while n is not None:
            out.add(n)
            n = self.idom[n]
        return out

    def children(self) -> dict:
        kids = {n: [] for n in self.idom}
        for n, p in self.idom.items():
            if p is not None:
                kids[p].append(n)
        return kids


def compute_dominators(entry, succs: Callable[[Hashable], Iterable[Hashable]]) -> DominatorTree:
    rpo = reverse_postorder(entry, succs)
    number = {n: i for i, n in enumerate(rpo)}
    preds = {n: [] for n in rpo}
    for n in rpo:
        for s in succs(n):
            if s in preds:
                preds[s].append(n)

    idom = {entry: entry}

    def intersect(a, b):
        while a != b:
            while number[a] > number[b]:
                a = idom[a]
            while number[b] > number[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            new = None
            for p in preds[n]:
                if p in idom:
                    new = p if new is None else intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    idom[entry] = None
    return DominatorTree(entry, idom)


def dominators(method: Method) -> DominatorTree:
    succ = {b.id: b.successors for b in method.blocks}
    return compute_dominators(method.entry_block, lambda n: succ[n])


def split_successors(method: Method) -> dict:
    """Successor map with every branch edge routed through an ``EdgeNode``."""
    succ = {}
    for b in method.blocks:
        if isinstance(b.terminator, Branch):
            t = EdgeNode(b.id, True)
            f = EdgeNode(b.id, False)
            succ[b.id] = (t, f)
            succ[t] = (b.terminator.true_target,)
            succ[f] = (b.terminator.false_target,)
        else:
            succ[b.id] = b.successors
    return succ


def edge_dominators(method: Method) -> DominatorTree:
    succ = split_successors(method)
    return compute_dominators(method.entry_block, lambda n: succ[n])
