"""Shared generators and independent reference implementations for the tests."""

from __future__ import annotations

import math
import random

import networkx as nx

from attackgame import AttackGraph


def random_dag(rng: random.Random, n: int | None = None, max_nodes: int = 10,
               budget: float | None = None) -> AttackGraph:
    """Random valid attack graph: ids v0..v{n-1}, target last, entries = sources."""
    n = n if n is not None else rng.randint(2, max_nodes)
    ids = [f"v{i}" for i in range(n)]
    q = rng.uniform(0.15, 0.5)
    edges = {(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < q}
    for i in range(n - 1):
        if not any(e[0] == ids[i] for e in edges):
            edges.add((ids[i], ids[rng.randint(i + 1, n - 1)]))
    indeg = {v: 0 for v in ids}
    for _, v in edges:
        indeg[v] += 1
    entries = [v for v in ids[:-1] if indeg[v] == 0]
    nodes = {v: (rng.uniform(0.05, 0.9), rng.uniform(0.0, 10.0)) for v in ids[:-1]}
    nodes[ids[-1]] = (rng.uniform(0.05, 0.9), rng.uniform(0.1, 10.0))
    return AttackGraph.build(nodes, edges, entries, ids[-1], budget)


def chain(p0s, losses, budget=None) -> AttackGraph:
    ids = [f"n{i + 1}" for i in range(len(p0s))]
    return AttackGraph.build({v: (p, l) for v, p, l in zip(ids, p0s, losses)},
                             list(zip(ids, ids[1:])), [ids[0]], ids[-1], budget)


def reference_paths(graph: AttackGraph) -> list[tuple[str, ...]]:
    g = nx.DiGraph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from(graph.edges)
    out = []
    for s in graph.entries:
        out += [tuple(p) for p in nx.all_simple_paths(g, s, graph.target)]
    return sorted(out)


def reference_path_loss(graph: AttackGraph, path, x=None) -> float:
    """Direct evaluation of sum_i L_i prod_{j<=i} p_j(x_j)."""
    x = x or {}
    total, prob = 0.0, 1.0
    for v in path:
        p = graph.nodes[v]
        damp = math.exp(-x.get(v, 0.0))
        if hasattr(p, "p0"):
            prob *= p.p0 * damp
            total += p.loss * prob
        else:
            total += p.own_loss_coeff * prob * damp
            prob *= p.pass_through * damp
    return total


def reference_loss(graph: AttackGraph, x=None) -> float:
    return max(reference_path_loss(graph, p, x) for p in reference_paths(graph))


# -- base chain n1 -> n2 -> n3 and its redesigns, homogeneous p0 ----------------------


def base_chain(p0, l1, l2, l3, budget=None) -> AttackGraph:
    return chain([p0] * 3, [l1, l2, l3], budget)


def base_form(p0, l1, l2, l3, budget):
    return (l1 * p0 + l2 * p0**2 + l3 * p0**3) * math.exp(-budget)


def series_form(p0, l1, l2, l3, l4, budget):
    """n4 spliced between n2 and n3."""
    return (l1 * p0 + l2 * p0**2 + l4 * p0**3 + l3 * p0**4) * math.exp(-budget)


def parallel_form(p0, l1, l2, l3, l4, budget):
    return max(l1 * p0 + l2 * p0**2 + l3 * p0**3,
               l1 * p0 + l4 * p0**2 + l3 * p0**3) * math.exp(-budget)


def hybrid_form(p0, l1, l2, l3, l4, budget):
    return max(l1 * p0 + l2 * p0**2 + l3 * p0**4,
               l1 * p0 + l4 * p0**2 + l3 * p0**4) * math.exp(-budget)


def add_input_form(p0, l, l2, l3, budget):
    """Second entry n4 (loss l, same as n1) feeding n2; valid while log(K/l) <= budget."""
    k = p0 * l2 + p0**2 * l3
    if l <= k:
        assert math.log(k / l) <= budget + 1e-12, "outside the two-branch formula's range"
        return 2 * p0 * math.exp(-budget / 2) * math.sqrt(p0 * l * l2 + p0**2 * l * l3)
    return math.exp(-budget / 2) * (p0 * l + p0 * k)
