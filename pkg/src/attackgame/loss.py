"""Breach probabilities, per-path expected loss and the attacker's best response.

Along a path ``v_1 -> ... -> v_m`` the attacker collects ``L_i`` times the
probability of having breached every node up to and including ``v_i``, where
an investment ``x`` scales a node's breach probability by ``exp(-x)``. The
attacker picks the path with the largest total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .graph import AttackGraph, AttackPath, GraphError, NodeId, NodeParams, enumerate_paths

FEASIBILITY_TOL = 1e-9
TIE_TOL = 1e-12


class NoAttackPath(GraphError):
    pass


@dataclass(frozen=True)
class InvestmentProfile:
    x: Mapping[NodeId, float]
    budget: float

    def __post_init__(self):
        clean = {str(k): float(v) for k, v in sorted(self.x.items())}
        neg = [k for k, v in clean.items() if v < 0]
        if neg:
            raise ValueError(f"negative investment on {neg}")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if sum(clean.values()) > self.budget + FEASIBILITY_TOL:
            raise ValueError(f"investments total {sum(clean.values())} exceed budget {self.budget}")
        object.__setattr__(self, "x", MappingProxyType(clean))

    @classmethod
    def zero(cls, budget: float = 0.0) -> "InvestmentProfile":
        return cls({}, budget)

    def __getitem__(self, v: NodeId) -> float:
        return self.x.get(v, 0.0)

    @property
    def total(self) -> float:
        return sum(self.x.values())

    def vector(self, order: Sequence[NodeId]) -> list[float]:
        return [self[v] for v in order]

    def to_dict(self) -> dict:
        return {"budget": self.budget, "x": dict(self.x)}


def breach_probability(params: NodeParams, x: float) -> float:
    """p0 * exp(-x)."""
    if x < 0:
        raise ValueError(f"investment must be nonnegative, got {x}")
    return params.p0 * math.exp(-x)


@dataclass(frozen=True)
class PathTerm:
    node: NodeId
    cumulative_probability: float
    contribution: float


@dataclass(frozen=True)
class PathLossBreakdown:
    path: AttackPath
    terms: tuple[PathTerm, ...]
    total: float

    def to_dict(self) -> dict:
        return {
            "path": list(self.path),
            "terms": [{"node": t.node, "cumulative_probability": t.cumulative_probability,
                       "contribution": t.contribution} for t in self.terms],
            "total": self.total,
        }


def _as_profile(inv: InvestmentProfile | Mapping[NodeId, float] | None) -> Mapping[NodeId, float]:
    if inv is None:
        return {}
    if isinstance(inv, InvestmentProfile):
        return inv.x
    return inv


def path_loss(graph: AttackGraph, path: Sequence[NodeId],
              inv: InvestmentProfile | Mapping[NodeId, float] | None = None) -> PathLossBreakdown:
    x = _as_profile(inv)
    reach = 1.0
    terms = []
    for v in path:
        if v not in graph:
            raise KeyError(f"path node {v!r} is not in the graph")
        p = graph.nodes[v]
        xv = x.get(v, 0.0)
        if xv < 0:
            raise ValueError(f"negative investment on {v!r}")
        damp = math.exp(-xv)
        contribution = p.own_loss_coeff * reach * damp
        reach *= p.pass_through * damp
        terms.append(PathTerm(v, reach, contribution))
    return PathLossBreakdown(tuple(path), tuple(terms), math.fsum(t.contribution for t in terms))


def _argmax_within(values: Sequence[float], tol: float = TIE_TOL) -> list[int]:
    best = max(values)
    return [i for i, v in enumerate(values) if v >= best - tol]


def system_loss(graph: AttackGraph,
                inv: InvestmentProfile | Mapping[NodeId, float] | None = None,
                paths: Sequence[AttackPath] | None = None) -> tuple[float, list[AttackPath]]:
    """Attacker-maximal expected loss and every path attaining it (within 1e-12)."""
    if paths is None:
        paths = enumerate_paths(graph)
    if not paths:
        raise NoAttackPath("no entry-to-target path exists")
    totals = [path_loss(graph, p, inv).total for p in paths]
    idx = _argmax_within(totals)
    return max(totals), sorted(paths[i] for i in idx)


def attacker_best_response(graph: AttackGraph,
                           inv: InvestmentProfile | Mapping[NodeId, float] | None = None) -> AttackPath:
    return system_loss(graph, inv)[1][0]


@dataclass
class CompiledObjective:
    """Max-over-paths loss as arrays: ``f(x) = max_P sum_{l in P} c_l exp(-a_l . x)``.

    ``variables`` are the nodes lying on at least one attack path, in id order.
    """

    graph: AttackGraph
    paths: list[AttackPath]
    variables: list[NodeId] = field(init=False)
    coeffs: np.ndarray = field(init=False)
    prefix: np.ndarray = field(init=False)
    starts: np.ndarray = field(init=False)

    def __post_init__(self):
        if not self.paths:
            raise NoAttackPath("no entry-to-target path exists")
        self.variables = sorted({v for p in self.paths for v in p})
        col = {v: i for i, v in enumerate(self.variables)}
        coeffs, rows, starts = [], [], []
        for path in self.paths:
            starts.append(len(coeffs))
            reach = 1.0
            mask = np.zeros(len(self.variables))
            for v in path:
                p = self.graph.nodes[v]
                mask[col[v]] = 1.0
                coeffs.append(p.own_loss_coeff * reach)
                rows.append(mask.copy())
                reach *= p.pass_through
        self.coeffs = np.asarray(coeffs)
        self.prefix = np.asarray(rows)
        self.starts = np.asarray(starts)

    @classmethod
    def from_graph(cls, graph: AttackGraph) -> "CompiledObjective":
        return cls(graph, enumerate_paths(graph))

    @property
    def n(self) -> int:
        return len(self.variables)

    def term_values(self, x: np.ndarray) -> np.ndarray:
        return self.coeffs * np.exp(-(self.prefix @ x))

    def path_losses(self, x: np.ndarray) -> np.ndarray:
        return np.add.reduceat(self.term_values(x), self.starts)

    def value(self, x: np.ndarray) -> float:
        return float(self.path_losses(x).max())

    def batch_values(self, X: np.ndarray) -> np.ndarray:
        """Objective for each row of ``X``."""
        terms = self.coeffs * np.exp(-(X @ self.prefix.T))
        return np.add.reduceat(terms, self.starts, axis=1).max(axis=1)

    def path_gradient(self, x: np.ndarray, k: int) -> np.ndarray:
        lo = self.starts[k]
        hi = self.starts[k + 1] if k + 1 < len(self.starts) else len(self.coeffs)
        w = self.term_values(x)[lo:hi]
        return -(w @ self.prefix[lo:hi])

    def subgradient(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        """Objective and the gradient of the first (lexicographic) maximizing path."""
        losses = self.path_losses(x)
        k = int(_argmax_within(losses.tolist())[0])
        return float(losses.max()), self.path_gradient(x, k)

    def to_vector(self, inv: InvestmentProfile | Mapping[NodeId, float]) -> np.ndarray:
        x = _as_profile(inv)
        return np.array([x.get(v, 0.0) for v in self.variables], dtype=float)

    def to_mapping(self, x: np.ndarray) -> dict[NodeId, float]:
        return {v: float(max(0.0, xi)) for v, xi in zip(self.variables, x)}
