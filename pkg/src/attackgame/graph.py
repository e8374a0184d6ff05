"""Attack-graph data model, validation and path queries.

An attack graph is a DAG of assets. Attacks start at in-degree-0 entry
nodes and walk edges toward a single target asset. Each node carries a
baseline breach probability ``p0`` and a standalone ``loss``; nodes produced
by series reduction carry :class:`EquivalentNodeParams` instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Union

import networkx as nx

NodeId = str
Edge = tuple[NodeId, NodeId]
AttackPath = tuple[NodeId, ...]

DEFAULT_PATH_CAP = 10**6


class GraphError(ValueError):
    """Raised when an operation needs a structurally valid graph."""


class PathLimitExceeded(GraphError):
    pass


@dataclass(frozen=True)
class NodeParams:
    p0: float
    loss: float

    def __post_init__(self):
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError(f"p0 must lie in [0, 1], got {self.p0}")
        if self.loss < 0:
            raise ValueError(f"loss must be nonnegative, got {self.loss}")

    @property
    def own_loss_coeff(self) -> float:
        return self.p0 * self.loss

    @property
    def pass_through(self) -> float:
        return self.p0


@dataclass(frozen=True)
class EquivalentNodeParams:
    """Stand-in for a collapsed series stretch.

    ``own_loss_coeff`` is the stretch's compound loss with every internal
    baseline probability already multiplied in; ``pass_through`` is the
    product of the stretch's baseline probabilities and scales everything
    downstream of it.
    """

    own_loss_coeff: float
    pass_through: float

    def __post_init__(self):
        if not 0.0 <= self.pass_through <= 1.0:
            raise ValueError(f"pass_through must lie in [0, 1], got {self.pass_through}")
        if self.own_loss_coeff < 0:
            raise ValueError(f"own_loss_coeff must be nonnegative, got {self.own_loss_coeff}")

    @classmethod
    def from_plain(cls, params: NodeParams) -> "EquivalentNodeParams":
        return cls(params.own_loss_coeff, params.pass_through)


AnyNodeParams = Union[NodeParams, EquivalentNodeParams]


@dataclass(frozen=True)
class AttackGraph:
    nodes: Mapping[NodeId, AnyNodeParams]
    edges: frozenset[Edge]
    entries: frozenset[NodeId]
    target: NodeId
    budget: float | None = None
    _succ: Mapping[NodeId, tuple[NodeId, ...]] = field(init=False, repr=False, compare=False)
    _pred: Mapping[NodeId, tuple[NodeId, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = {str(k): v for k, v in sorted(self.nodes.items())}
        object.__setattr__(self, "nodes", MappingProxyType(nodes))
        object.__setattr__(self, "edges", frozenset((str(u), str(v)) for u, v in self.edges))
        object.__setattr__(self, "entries", frozenset(str(e) for e in self.entries))
        succ: dict[NodeId, list[NodeId]] = {}
        pred: dict[NodeId, list[NodeId]] = {}
        for u, v in self.edges:
            succ.setdefault(u, []).append(v)
            pred.setdefault(v, []).append(u)
        object.__setattr__(self, "_succ", {k: tuple(sorted(v)) for k, v in succ.items()})
        object.__setattr__(self, "_pred", {k: tuple(sorted(v)) for k, v in pred.items()})

    # -- construction helpers -------------------------------------------------

    @classmethod
    def build(
        cls,
        nodes: Mapping[NodeId, AnyNodeParams | tuple[float, float]],
        edges: Iterable[Edge],
        entries: Iterable[NodeId],
        target: NodeId,
        budget: float | None = None,
    ) -> "AttackGraph":
        """Convenience constructor accepting ``(p0, loss)`` tuples for nodes."""
        params = {
            k: v if isinstance(v, (NodeParams, EquivalentNodeParams)) else NodeParams(*v)
            for k, v in nodes.items()
        }
        return cls(params, frozenset(edges), frozenset(entries), target, budget)

    def replace(self, **changes) -> "AttackGraph":
        kw = dict(nodes=self.nodes, edges=self.edges, entries=self.entries,
                  target=self.target, budget=self.budget)
        kw.update(changes)
        return AttackGraph(**kw)

    # -- structure --------------------------------------------------------------

    def successors(self, v: NodeId) -> tuple[NodeId, ...]:
        return self._succ.get(v, ())

    def predecessors(self, v: NodeId) -> tuple[NodeId, ...]:
        return self._pred.get(v, ())

    def in_degree(self, v: NodeId) -> int:
        return len(self._pred.get(v, ()))

    def out_degree(self, v: NodeId) -> int:
        return len(self._succ.get(v, ()))

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def investable_nodes(self) -> list[NodeId]:
        """Non-target nodes, in id order."""
        return [v for v in self.nodes if v != self.target]

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.sorted_edges())
        return g

    def __contains__(self, v: object) -> bool:
        return v in self.nodes


# -- validation ---------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    nodes: tuple[NodeId, ...] = ()
    edges: tuple[Edge, ...] = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message,
                "nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def to_dict(self) -> dict:
        return {"valid": self.ok,
                "violations": [v.to_dict() for v in self.violations],
                "warnings": [w.to_dict() for w in self.warnings]}


def validate(graph: AttackGraph) -> ValidationReport:
    """Check the structural assumptions of the game; violations are returned, never raised."""
    bad: list[Violation] = []
    warn: list[Violation] = []

    dangling = tuple(e for e in graph.sorted_edges() if e[0] not in graph or e[1] not in graph)
    if dangling:
        missing = sorted({v for e in dangling for v in e if v not in graph})
        bad.append(Violation("dangling-edge", f"edges reference unknown nodes {missing}",
                             tuple(missing), dangling))

    if not graph.target or graph.target not in graph:
        bad.append(Violation("missing-target", f"target {graph.target!r} is not a node",
                             (graph.target,) if graph.target else ()))
    elif _loss_of(graph, graph.target) <= 0:
        bad.append(Violation("target-loss", "target loss must be > 0", (graph.target,)))

    g = graph.to_networkx()
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        cyc_edges = tuple((u, v) for u, v in cycle)
        bad.append(Violation("cycle", "graph contains a directed cycle",
                             tuple(sorted({u for u, _ in cyc_edges})), cyc_edges))

    if not graph.entries:
        bad.append(Violation("no-entries", "graph has no entry nodes"))
    unknown_entries = sorted(e for e in graph.entries if e not in graph)
    if unknown_entries:
        bad.append(Violation("unknown-entry", f"entries {unknown_entries} are not nodes",
                             tuple(unknown_entries)))
    inner = sorted(e for e in graph.entries if e in graph and graph.in_degree(e) > 0)
    if inner:
        bad.append(Violation("entry-indegree", f"entries {inner} have incoming edges", tuple(inner)))
    if graph.target in graph.entries:
        bad.append(Violation("entry-is-target", "target cannot be an entry", (graph.target,)))

    if cycle is None and graph.target in graph:
        reaches_target = nx.ancestors(g, graph.target) | {graph.target}
        stranded = sorted(e for e in graph.entries if e in graph and e not in reaches_target)
        if stranded:
            bad.append(Violation("entry-no-path", f"entries {stranded} cannot reach the target",
                                 tuple(stranded)))
        reachable = set()
        for e in graph.entries:
            if e in graph:
                reachable |= nx.descendants(g, e) | {e}
        dead = sorted(v for v in graph.nodes if v not in reachable or v not in reaches_target)
        if dead:
            warn.append(Violation("off-path", f"nodes {dead} lie on no entry-to-target path",
                                  tuple(dead)))
    return ValidationReport(tuple(bad), tuple(warn))


def _loss_of(graph: AttackGraph, v: NodeId) -> float:
    p = graph.nodes[v]
    return p.loss if isinstance(p, NodeParams) else p.own_loss_coeff


def require_valid(graph: AttackGraph) -> None:
    report = validate(graph)
    if not report.ok:
        detail = "; ".join(f"{v.kind}: {v.message}" for v in report.violations)
        raise GraphError(f"invalid attack graph ({detail})")


# -- reachability and paths -----------------------------------------------------------


def _closure(start: NodeId, step) -> set[NodeId]:
    seen: set[NodeId] = set()
    queue = deque(step(start))
    while queue:
        u = queue.popleft()
        if u not in seen:
            seen.add(u)
            queue.extend(step(u))
    return seen


def pre_set(graph: AttackGraph, v: NodeId) -> set[NodeId]:
    """All ancestors of ``v`` (excluding ``v``)."""
    if v not in graph:
        raise KeyError(f"unknown node {v!r}")
    return _closure(v, graph.predecessors)


def post_set(graph: AttackGraph, v: NodeId) -> set[NodeId]:
    """All descendants of ``v`` (excluding ``v``)."""
    if v not in graph:
        raise KeyError(f"unknown node {v!r}")
    return _closure(v, graph.successors)


def enumerate_paths(graph: AttackGraph, cap: int = DEFAULT_PATH_CAP) -> list[AttackPath]:
    """All simple entry-to-target paths in lexicographic order of node ids.

    Raises :class:`PathLimitExceeded` once more than ``cap`` paths are found;
    reduce the graph first in that case.
    """
    require_valid(graph)
    target = graph.target
    can_reach = pre_set(graph, target) | {target}
    paths: list[AttackPath] = []

    # sorted successors + sorted entries give lexicographic order for free
    def walk(prefix: list[NodeId]) -> None:
        v = prefix[-1]
        if v == target:
            if len(paths) >= cap:
                raise PathLimitExceeded(f"more than {cap} attack paths; reduce the graph first")
            paths.append(tuple(prefix))
            return
        for s in graph.successors(v):
            if s in can_reach:
                prefix.append(s)
                walk(prefix)
                prefix.pop()

    for e in sorted(graph.entries):
        walk([e])
    return paths


def is_attack_path(graph: AttackGraph, path: Sequence[NodeId]) -> bool:
    if not path or path[0] not in graph.entries or path[-1] != graph.target:
        return False
    if len(set(path)) != len(path):
        return False
    return all((u, v) in graph.edges for u, v in zip(path, path[1:]))
