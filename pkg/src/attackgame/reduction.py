"""Equivalence-preserving attack-graph reduction.

Two rewrite rules are applied until neither changes the graph:

* series collapse -- a maximal chain ``u -> ... -> w`` in which every link
  leaves a node of out-degree 1 and enters a node of in-degree 1 becomes a
  single :class:`EquivalentNodeParams` node. The target is never merged.
* parallel pruning -- among two-hop detours ``i -> j -> k`` whose middles
  have no other edges, a middle is dropped when another middle is at least
  as bad for the defender in both own loss and pass-through probability.

Optimal investments on the reduced graph map back onto the original graph
with :func:`expand_investment`, reaching the same loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import AttackGraph, EquivalentNodeParams, NodeId, require_valid
from .loss import InvestmentProfile

MERGED_PREFIX = "EN"


@dataclass(frozen=True)
class SeriesStep:
    new_id: NodeId
    members: tuple[NodeId, ...]  # head first


@dataclass(frozen=True)
class PruneStep:
    origin: NodeId
    terminus: NodeId
    kept: tuple[NodeId, ...]
    removed: tuple[NodeId, ...]


@dataclass(frozen=True)
class PrunedFragment:
    origin: NodeId
    middle: NodeId
    terminus: NodeId
    originals: tuple[NodeId, ...]


@dataclass
class ReductionMap:
    """Where every original node ended up.

    ``groups`` maps each reduced node to the original nodes it stands for
    (stretch head first); ``pruned`` lists the dropped detours. ``steps`` is
    the ordered rewrite log used to expand investments.
    """

    groups: dict[NodeId, tuple[NodeId, ...]]
    pruned: list[PrunedFragment] = field(default_factory=list)
    steps: list[SeriesStep | PruneStep] = field(default_factory=list)

    @classmethod
    def identity(cls, graph: AttackGraph) -> "ReductionMap":
        return cls({v: (v,) for v in graph.nodes})

    @property
    def original_nodes(self) -> list[NodeId]:
        out = [v for members in self.groups.values() for v in members]
        out += [v for frag in self.pruned for v in frag.originals]
        return sorted(out)

    def then(self, later: "ReductionMap") -> "ReductionMap":
        """Compose: ``self`` applied first, ``later`` on its output."""
        groups = {rid: tuple(o for mid in members for o in self.groups[mid])
                  for rid, members in later.groups.items()}
        pruned = list(self.pruned) + [
            PrunedFragment(f.origin, f.middle, f.terminus,
                           tuple(o for mid in f.originals for o in self.groups[mid]))
            for f in later.pruned
        ]
        return ReductionMap(groups, pruned, list(self.steps) + list(later.steps))

    def to_dict(self) -> dict:
        steps = []
        for s in self.steps:
            if isinstance(s, SeriesStep):
                steps.append({"kind": "series", "new_id": s.new_id, "members": list(s.members)})
            else:
                steps.append({"kind": "prune", "origin": s.origin, "terminus": s.terminus,
                              "kept": list(s.kept), "removed": list(s.removed)})
        return {
            "groups": {k: list(v) for k, v in sorted(self.groups.items())},
            "pruned": [{"origin": f.origin, "middle": f.middle, "terminus": f.terminus,
                        "originals": list(f.originals)} for f in self.pruned],
            "steps": steps,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReductionMap":
        steps: list[SeriesStep | PruneStep] = []
        for s in d.get("steps", []):
            if s["kind"] == "series":
                steps.append(SeriesStep(s["new_id"], tuple(s["members"])))
            else:
                steps.append(PruneStep(s["origin"], s["terminus"], tuple(s["kept"]),
                                       tuple(s["removed"])))
        return cls(
            {k: tuple(v) for k, v in d["groups"].items()},
            [PrunedFragment(f["origin"], f["middle"], f["terminus"], tuple(f["originals"]))
             for f in d.get("pruned", [])],
            steps,
        )


def _fresh_ids(taken: set[NodeId]) -> Iterable[NodeId]:
    k = 1
    while True:
        name = f"{MERGED_PREFIX}{k}"
        if name not in taken:
            taken.add(name)
            yield name
        k += 1


def _series_chains(graph: AttackGraph) -> list[list[NodeId]]:
    def linkable(u: NodeId, v: NodeId) -> bool:
        return (graph.out_degree(u) == 1 and graph.in_degree(v) == 1
                and graph.target not in (u, v))

    nxt = {u: graph.successors(u)[0] for u in graph.nodes
           if graph.out_degree(u) == 1 and linkable(u, graph.successors(u)[0])}
    linked_into = set(nxt.values())
    chains = []
    for head in graph.nodes:
        if head in nxt and head not in linked_into:
            chain = [head]
            while chain[-1] in nxt:
                chain.append(nxt[chain[-1]])
            chains.append(chain)
    return chains


def merge_stretch(graph: AttackGraph, chain: list[NodeId]) -> EquivalentNodeParams:
    """Compound parameters of a series stretch (head first)."""
    reach, own = 1.0, 0.0
    for v in chain:
        p = graph.nodes[v]
        own += p.own_loss_coeff * reach
        reach *= p.pass_through
    return EquivalentNodeParams(own, reach)


def collapse_series(graph: AttackGraph,
                    reserved: set[NodeId] | None = None) -> tuple[AttackGraph, ReductionMap]:
    require_valid(graph)
    taken = set(graph.nodes) | (reserved if reserved is not None else set())
    names = _fresh_ids(taken)
    chains = _series_chains(graph)
    if not chains:
        return graph, ReductionMap.identity(graph)

    nodes = dict(graph.nodes)
    edges = set(graph.edges)
    entries = set(graph.entries)
    groups = {v: (v,) for v in graph.nodes}
    steps = []
    for chain in chains:
        new = next(names)
        head, tail = chain[0], chain[-1]
        nodes[new] = merge_stretch(graph, chain)
        for v in chain:
            del nodes[v]
            del groups[v]
        edges = {e for e in edges if e[0] not in chain and e[1] not in chain}
        edges |= {(u, new) for u in graph.predecessors(head)}
        edges |= {(new, w) for w in graph.successors(tail)}
        if head in entries:
            entries.discard(head)
            entries.add(new)
        groups[new] = tuple(chain)
        steps.append(SeriesStep(new, tuple(chain)))
    if reserved is not None:
        reserved |= taken
    # chains are disjoint, so predecessor/successor ids above are never stale
    # except when a neighbour was itself merged; rewire those now
    rename = {v: s.new_id for s in steps for v in s.members}
    edges = {(rename.get(u, u), rename.get(w, w)) for u, w in edges}
    out = graph.replace(nodes=nodes, edges=frozenset(edges), entries=frozenset(entries))
    return out, ReductionMap(groups, [], steps)


def _dominates(a, b) -> bool:
    return a.own_loss_coeff >= b.own_loss_coeff and a.pass_through >= b.pass_through


def prune_parallel(graph: AttackGraph) -> tuple[AttackGraph, ReductionMap]:
    """Drop dominated middles of strictly parallel two-hop detours.

    Middle ``m`` is dropped when another middle ``j`` of the same group has
    both a larger-or-equal own loss coefficient and a larger-or-equal
    pass-through; among exact duplicates the smallest id survives. When all
    middles share a pass-through this keeps exactly the middle maximizing
    ``own + pass_through * own_k``.
    """
    require_valid(graph)
    groups: dict[tuple[NodeId, NodeId], list[NodeId]] = {}
    for v in graph.nodes:
        if v == graph.target or v in graph.entries:
            continue
        if graph.in_degree(v) == 1 and graph.out_degree(v) == 1:
            key = (graph.predecessors(v)[0], graph.successors(v)[0])
            groups.setdefault(key, []).append(v)

    removed: set[NodeId] = set()
    steps, fragments = [], []
    for (i, k), middles in sorted(groups.items()):
        if len(middles) < 2:
            continue
        middles.sort()
        params = graph.nodes
        drop = []
        for m in middles:
            for j in middles:
                if j == m or not _dominates(params[j], params[m]):
                    continue
                strictly = (params[j].own_loss_coeff > params[m].own_loss_coeff
                            or params[j].pass_through > params[m].pass_through)
                if strictly or j < m:
                    drop.append(m)
                    break
        if drop:
            kept = tuple(m for m in middles if m not in drop)
            steps.append(PruneStep(i, k, kept, tuple(drop)))
            fragments += [PrunedFragment(i, m, k, (m,)) for m in drop]
            removed.update(drop)

    if not removed:
        return graph, ReductionMap.identity(graph)
    nodes = {v: p for v, p in graph.nodes.items() if v not in removed}
    edges = frozenset(e for e in graph.edges if e[0] not in removed and e[1] not in removed)
    out = graph.replace(nodes=nodes, edges=edges)
    return out, ReductionMap({v: (v,) for v in nodes}, fragments, steps)


def reduce(graph: AttackGraph) -> tuple[AttackGraph, ReductionMap]:
    """Alternate series collapse and parallel pruning until nothing changes."""
    require_valid(graph)
    reserved = set(graph.nodes)
    rmap = ReductionMap.identity(graph)
    current = graph
    while True:
        collapsed, m1 = collapse_series(current, reserved)
        pruned, m2 = prune_parallel(collapsed)
        rmap = rmap.then(m1).then(m2)
        if not m1.steps and not m2.steps:
            return current, rmap
        current = pruned


def expand_investment(rmap: ReductionMap,
                      reduced_inv: InvestmentProfile | Mapping[NodeId, float]) -> InvestmentProfile:
    """Map a reduced-graph profile back onto the original nodes.

    A merged node's investment goes to its stretch head. Dropped detour
    middles get nothing, and a surviving middle's investment is moved to the
    detour origin, which protects every path the middle did and more.
    """
    if isinstance(reduced_inv, InvestmentProfile):
        x, budget = dict(reduced_inv.x), reduced_inv.budget
    else:
        x, budget = dict(reduced_inv), sum(reduced_inv.values())
    unknown = sorted(set(x) - set(rmap.groups))
    if unknown:
        raise KeyError(f"investment names nodes absent from the reduced graph: {unknown}")

    for step in reversed(rmap.steps):
        if isinstance(step, SeriesStep):
            amount = x.pop(step.new_id, 0.0)
            for v in step.members:
                x[v] = 0.0
            x[step.members[0]] = amount
        else:
            moved = sum(x.pop(m, 0.0) for m in step.kept)
            x[step.origin] = x.get(step.origin, 0.0) + moved
            for m in step.kept + step.removed:
                x[m] = 0.0
    full = {v: x.get(v, 0.0) for v in rmap.original_nodes}
    return InvestmentProfile(full, budget)
