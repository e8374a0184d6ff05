"""Network redesign by adding one node, and what it costs in security terms.

Four ways to add a node ``a``:

``series``    splice ``a`` into an edge (or in front of every in-edge of a node)
``parallel``  ``a`` mirrors an existing node's in- and out-edges
``hybrid``    mirror plus one zero-loss join node behind each branch, so the
              attacker has to get through both branches' joins
``entry``     ``a`` is a new entry node with an edge into the anchor
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import AttackGraph, Edge, GraphError, NodeId, NodeParams, validate
from .solver import SolveConfig, SolveReport, solve

KINDS = ("series", "parallel", "hybrid", "entry")


class InterventionError(GraphError):
    pass


@dataclass(frozen=True)
class InterventionSpec:
    kind: str
    node_id: NodeId
    p0: float
    loss: float
    anchor: NodeId | Edge
    join_ids: tuple[NodeId, NodeId] | None = None
    join_p0: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InterventionError(f"kind must be one of {KINDS}, got {self.kind!r}")
        NodeParams(self.p0, self.loss)  # range checks
        if isinstance(self.anchor, (list, tuple)):
            if len(self.anchor) != 2 or self.kind != "series":
                raise InterventionError("only series interventions take an edge anchor")
            object.__setattr__(self, "anchor", (str(self.anchor[0]), str(self.anchor[1])))
        if self.join_p0 is not None and not 0 <= self.join_p0 <= 1:
            raise InterventionError("join_p0 must lie in [0, 1]")

    @property
    def params(self) -> NodeParams:
        return NodeParams(self.p0, self.loss)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "node_id": self.node_id, "p0": self.p0, "loss": self.loss,
             "anchor": list(self.anchor) if isinstance(self.anchor, tuple) else self.anchor}
        if self.kind == "hybrid":
            d["join_ids"] = list(self.join_ids) if self.join_ids else None
            d["join_p0"] = self.join_p0
        return d


@dataclass(frozen=True)
class InterventionReport:
    spec: InterventionSpec
    base: SolveReport
    new: SolveReport
    graph: AttackGraph

    @property
    def base_loss(self) -> float:
        return self.base.equilibrium_loss

    @property
    def new_loss(self) -> float:
        return self.new.equilibrium_loss

    @property
    def security_cost(self) -> float:
        return self.new_loss - self.base_loss

    @property
    def break_even_benefit(self) -> float:
        """Smallest standalone benefit of the new node that pays for its security cost."""
        return max(0.0, self.security_cost)

    def to_dict(self) -> dict:
        return {
            "intervention": self.spec.to_dict(),
            "base_loss": self.base_loss,
            "new_loss": self.new_loss,
            "security_cost": self.security_cost,
            "break_even_benefit": self.break_even_benefit,
            "base": self.base.to_dict(),
            "new": self.new.to_dict(),
        }


def _node_p0(graph: AttackGraph, v: NodeId) -> float:
    p = graph.nodes[v]
    return p.p0 if isinstance(p, NodeParams) else p.pass_through


def apply_intervention(graph: AttackGraph, spec: InterventionSpec) -> AttackGraph:
    a = spec.node_id
    if not a or a in graph:
        raise InterventionError(f"new node id {a!r} is empty or already used")
    nodes = dict(graph.nodes)
    nodes[a] = spec.params
    edges = set(graph.edges)
    entries = set(graph.entries)

    if spec.kind == "series":
        if isinstance(spec.anchor, tuple):
            if spec.anchor not in graph.edges:
                raise InterventionError(f"edge {spec.anchor} is not in the graph")
            u, v = spec.anchor
            edges -= {(u, v)}
            edges |= {(u, a), (a, v)}
        else:
            v = _anchor_node(graph, spec)
            preds = graph.predecessors(v)
            edges -= {(u, v) for u in preds}
            edges |= {(u, a) for u in preds} | {(a, v)}
            if v in entries:
                entries = (entries - {v}) | {a}
    elif spec.kind in ("parallel", "hybrid"):
        n = _anchor_node(graph, spec)
        if n == graph.target:
            raise InterventionError("the target cannot be mirrored")
        edges |= {(u, a) for u in graph.predecessors(n)}
        if n in entries:
            entries.add(a)
        succs = graph.successors(n)
        if spec.kind == "parallel":
            edges |= {(a, w) for w in succs}
        else:
            jn, ja = spec.join_ids or (f"{n}'", f"{a}'")
            if len({jn, ja, a}) < 3 or jn in nodes or ja in nodes:
                raise InterventionError(f"join ids {jn!r}, {ja!r} must be new and distinct")
            join_p0 = spec.join_p0 if spec.join_p0 is not None else _node_p0(graph, n)
            nodes[jn] = NodeParams(join_p0, 0.0)
            nodes[ja] = NodeParams(join_p0, 0.0)
            edges -= {(n, w) for w in succs}
            edges |= {(n, jn), (a, ja)} | {(jn, w) for w in succs} | {(ja, w) for w in succs}
    else:  # entry
        v = _anchor_node(graph, spec)
        edges.add((a, v))
        entries.add(a)

    out = graph.replace(nodes=nodes, edges=frozenset(edges), entries=frozenset(entries))
    report = validate(out)
    if not report.ok:
        raise InterventionError("intervention produced an invalid graph: "
                                + "; ".join(v.message for v in report.violations))
    return out


def _anchor_node(graph: AttackGraph, spec: InterventionSpec) -> NodeId:
    if isinstance(spec.anchor, tuple):
        raise InterventionError(f"{spec.kind} intervention needs a node anchor")
    if spec.anchor not in graph:
        raise InterventionError(f"anchor {spec.anchor!r} is not in the graph")
    return spec.anchor


def evaluate_intervention(graph: AttackGraph, spec: InterventionSpec,
                          budget: float | None = None,
                          config: SolveConfig | None = None) -> InterventionReport:
    """Solve the game before and after the intervention.

    Closed forms are used where the topology has one unless ``config`` pins
    a method.
    """
    config = config or SolveConfig(method="auto")
    new_graph = apply_intervention(graph, spec)
    base = solve(graph, budget, config)
    new = solve(new_graph, budget, config)
    return InterventionReport(spec, base, new, new_graph)
