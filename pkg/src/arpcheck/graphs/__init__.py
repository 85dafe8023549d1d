from .callgraph import (
    CALL, NORMAL, RETURN, CallEdge, CallGraph, Entry, IccEdge, IccGraph, Icfg,
    build_call_graph, build_icc, build_icfg, callback_precedes, component_reach, to_dot,
)
from .dominance import (
    DominatorTree, EdgeNode, compute_dominators, dominators, edge_dominators,
    reverse_postorder, split_successors,
)

__all__ = [
    "CALL", "NORMAL", "RETURN", "CallEdge", "CallGraph", "Entry", "IccEdge",
    "IccGraph", "Icfg", "build_call_graph", "build_icc", "build_icfg",
    "callback_precedes", "component_reach", "to_dot", "DominatorTree",
    "EdgeNode", "compute_dominators", "dominators", "edge_dominators",
    "reverse_postorder", "split_successors",
]
