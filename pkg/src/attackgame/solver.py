"""Defender's optimal budget allocation.

The defender minimizes ``f(x) = max_P loss_P(x)`` over ``{x >= 0, sum(x) <= B}``.
Each path loss is a positive sum of exponentials of affine forms, so ``f``
is convex. Three routes are provided:

* ``numeric``: projected subgradient with averaging as a warm start, then a
  smooth epigraph reformulation (in log space) polished with SLSQP, then a
  pairwise coordinate search. Best candidate wins.
* ``closed-form``: single-path / single-entry graphs (whole budget on the
  entry) and the two-entry shared-tail topology.
* ``grid``: exhaustive search over a discretized budget simplex; a test oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .graph import AttackGraph, AttackPath, GraphError, NodeId, enumerate_paths, require_valid
from .loss import CompiledObjective, InvestmentProfile, system_loss

log = logging.getLogger(__name__)

METHODS = ("numeric", "closed-form", "grid", "auto")
MAX_GRID_NODES = 5


class SolverError(GraphError):
    pass


class TopologyMismatch(SolverError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    method: str = "numeric"
    tolerance: float = 1e-9
    max_iterations: int = 200_000
    grid_resolution: float | None = None
    # warm-start length; the polish stage does the precise work
    subgradient_iterations: int = 1000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations <= 0:
            raise ValueError("max_iterations must be positive")
        if self.grid_resolution is not None and self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")


@dataclass(frozen=True)
class SolveReport:
    investments: InvestmentProfile
    equilibrium_loss: float
    active_paths: list[AttackPath]
    method: str
    iterations: int = 0
    converged: bool = True
    topology: str | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "budget": self.investments.budget,
            "equilibrium_loss": self.equilibrium_loss,
            "investments": dict(self.investments.x),
            "active_paths": [list(p) for p in self.active_paths],
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.topology:
            d["topology"] = self.topology
        return d


def _budget_of(graph: AttackGraph, budget: float | None) -> float:
    if budget is None:
        budget = graph.budget
    if budget is None:
        raise SolverError("no budget given and the graph does not define one")
    if budget < 0:
        raise SolverError(f"budget must be nonnegative, got {budget}")
    return float(budget)


def _report(graph: AttackGraph, paths, x: dict[NodeId, float], budget: float, method: str,
            **extra) -> SolveReport:
    full = {v: 0.0 for v in graph.nodes}
    full.update(x)
    total = sum(full.values())
    if total > budget:
        # rounding only; rescale so the profile stays feasible
        full = {v: xv * budget / total for v, xv in full.items()}
    inv = InvestmentProfile(full, budget)
    loss, active = system_loss(graph, inv, paths)
    return SolveReport(inv, loss, active, method, **extra)


# -- projection ---------------------------------------------------------------------


def project_capped_simplex(v: np.ndarray, budget: float) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) <= budget}``."""
    w = np.maximum(v, 0.0)
    if w.sum() <= budget:
        return w
    if budget == 0:
        return np.zeros_like(v)
    # sort-based projection onto the simplex sum(x) == budget
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, len(u) + 1)
    hits = np.nonzero(u * idx > css - budget)[0]
    rho = hits[-1] if len(hits) else 0  # empty only through rounding at tiny budgets
    theta = (css[rho] - budget) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


# -- numeric route ------------------------------------------------------------------


def _log_objective(obj: CompiledObjective, x: np.ndarray) -> float:
    return math.log(obj.value(x))


def _subgradient_phase(obj: CompiledObjective, budget: float, iterations: int,
                       tol: float) -> tuple[np.ndarray, int, bool]:
    """Projected subgradient on log f with step B/sqrt(t); returns the best point seen."""
    x = np.full(obj.n, budget / obj.n)
    best_x, best_f = x.copy(), _log_objective(obj, x)
    avg = x.copy()
    last_check, stalled = best_f, False
    t = 0
    for t in range(1, iterations + 1):
        f, g = obj.subgradient(x)
        if math.log(f) < best_f:
            best_f, best_x = math.log(f), x.copy()
        g = g / f
        norm = np.linalg.norm(g)
        if norm == 0:
            break
        x = project_capped_simplex(x - (budget / math.sqrt(t)) * g / norm, budget)
        avg += (x - avg) / (t + 1)
        if t % 50 == 0:
            fa = _log_objective(obj, avg)
            if fa < best_f:
                best_f, best_x = fa, avg.copy()
        if t % 500 == 0:
            if abs(last_check - best_f) <= tol * max(1.0, abs(best_f)):
                stalled = True
                break
            last_check = best_f
    return best_x, t, stalled


def _slsqp_polish(obj: CompiledObjective, budget: float, x0: np.ndarray,
                  max_iter: int) -> tuple[np.ndarray, bool, int]:
    """min t  s.t.  log loss_P(x) <= t for all P, sum(x) <= B, x >= 0."""
    n = obj.n
    path_coeff = np.add.reduceat(obj.coeffs, obj.starts)
    live = path_coeff > 0
    if not live.any():
        return x0, True, 0

    def cons(z):
        w = obj.term_values(z[:n])
        s = np.add.reduceat(w, obj.starts)[live]
        return np.r_[z[n] - np.log(s), budget - z[:n].sum()]

    def cons_jac(z):
        w = obj.term_values(z[:n])
        s = np.add.reduceat(w, obj.starts)
        grads = np.add.reduceat(w[:, None] * obj.prefix, obj.starts, axis=0)
        rows = grads[live] / s[live, None]
        jac = np.zeros((rows.shape[0] + 1, n + 1))
        jac[:-1, :n] = rows
        jac[:-1, n] = 1.0
        jac[-1, :n] = -1.0
        return jac

    z0 = np.r_[x0, _log_objective(obj, x0)]
    res = minimize(
        lambda z: z[n],
        z0,
        jac=lambda z: np.r_[np.zeros(n), 1.0],
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        bounds=[(0.0, budget)] * n + [(None, None)],
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": max_iter},
    )
    x = project_capped_simplex(np.asarray(res.x[:n]), budget)
    return x, bool(res.success), int(res.nit)


def _coordinate_refine(obj: CompiledObjective, budget: float, x: np.ndarray,
                       tol: float) -> np.ndarray:
    """Move mass between coordinate pairs while it helps, halving the step."""
    f = obj.value(x)
    step = 0.01 * budget
    floor = max(tol * budget, 1e-13)
    while step >= floor:
        improved = False
        for i in range(obj.n):
            for j in range(obj.n):
                if i == j or x[j] <= 0:
                    continue
                d = min(step, x[j])
                y = x.copy()
                y[i] += d
                y[j] -= d
                fy = obj.value(y)
                if fy < f * (1 - 1e-15):
                    x, f, improved = y, fy, True
        if not improved:
            step /= 2
    return x


def _saturate(obj: CompiledObjective, budget: float, x: np.ndarray) -> np.ndarray:
    """Spend any leftover budget where it lowers f most (f never increases)."""
    spare = budget - x.sum()
    if spare <= 0:
        return x
    best, best_f = None, math.inf
    for i in range(obj.n):
        y = x.copy()
        y[i] += spare
        fy = obj.value(y)
        if fy < best_f:
            best, best_f = y, fy
    return best


def _solve_numeric(graph: AttackGraph, paths, budget: float, config: SolveConfig) -> SolveReport:
    obj = CompiledObjective(graph, paths)
    if budget == 0 or not obj.coeffs.any():
        return _report(graph, paths, {}, budget, "numeric")

    sg_iters = min(config.subgradient_iterations, config.max_iterations)
    x_sg, iters, stalled = _subgradient_phase(obj, budget, sg_iters, config.tolerance)

    starts = [x_sg, np.full(obj.n, budget / obj.n)]
    entries = [i for i, v in enumerate(obj.variables) if v in graph.entries]
    if entries:
        e = np.zeros(obj.n)
        e[entries] = budget / len(entries)
        starts.append(e)

    candidates = [x_sg]
    converged = stalled
    polish_iters = max(1, min(1000, config.max_iterations - iters))
    for x0 in starts:
        xp, ok, nit = _slsqp_polish(obj, budget, x0, polish_iters)
        iters += nit
        converged = converged or ok
        candidates.append(xp)
    x = min(candidates, key=obj.value)
    x[x < 1e-12 * max(1.0, budget)] = 0.0
    x = _coordinate_refine(obj, budget, _saturate(obj, budget, x), config.tolerance)
    x = _saturate(obj, budget, x)
    return _report(graph, paths, obj.to_mapping(x), budget, "numeric",
                   iterations=iters, converged=converged)


# -- closed forms ---------------------------------------------------------------------


def detect_topology(graph: AttackGraph, paths=None) -> str | None:
    """Name the closed-form topology ``graph`` matches, or ``None``."""
    if paths is None:
        paths = enumerate_paths(graph)
    if len(paths) == 1:
        return "single-path"
    if len(graph.entries) == 1:
        return "single-entry"
    if len(paths) == 2 and len(graph.entries) == 2:
        a, b = paths
        if len(a) >= 2 and a[1:] == b[1:] and a[0] != b[0]:
            return "two-entry-shared-tail"
    return None


def _tail_coefficient(graph: AttackGraph, tail) -> float:
    reach, total = 1.0, 0.0
    for v in tail:
        p = graph.nodes[v]
        total += p.own_loss_coeff * reach
        reach *= p.pass_through
    return total


def two_entry_optimum(s: float, q: float, budget: float) -> tuple[float, float, float]:
    """Optimal (entry investment, shared-node investment, loss) for two identical entries.

    Each path loses ``exp(-x_entry) * (s + q * exp(-y))`` where ``s`` is the
    entry's own loss coefficient and ``q`` the entry pass-through times the
    shared tail's compound loss. Both entries get the same investment.
    """
    if q <= s:
        y = 0.0
        loss = math.exp(-budget / 2) * (s + q)
    elif q <= s * math.exp(budget):
        y = math.log(q / s)
        loss = 2.0 * math.exp(-budget / 2) * math.sqrt(s * q)
    else:
        y = budget
        loss = s + q * math.exp(-budget)
    return (budget - y) / 2, y, loss


def solve_closed_form(graph: AttackGraph, budget: float | None = None,
                      topology: str | None = None) -> SolveReport:
    require_valid(graph)
    budget = _budget_of(graph, budget)
    paths = enumerate_paths(graph)
    found = detect_topology(graph, paths)
    if topology is not None and topology != found and not (
            topology == "single-entry" and found == "single-path"):
        raise TopologyMismatch(f"graph has topology {found!r}, not {topology!r}")
    if found is None:
        raise TopologyMismatch("graph matches no closed-form topology")

    if found in ("single-path", "single-entry"):
        (entry,) = {p[0] for p in paths}
        rep = _report(graph, paths, {entry: budget}, budget, "closed-form", topology=found)
        base = max(_tail_coefficient(graph, p) for p in paths)
        return _with_notes(rep, closed_form_loss=base * math.exp(-budget))

    a_path, b_path = paths
    a, b, m = a_path[0], b_path[0], a_path[1]
    pa, pb = graph.nodes[a], graph.nodes[b]
    if not math.isclose(pa.own_loss_coeff, pb.own_loss_coeff, rel_tol=1e-12, abs_tol=1e-15) or \
            not math.isclose(pa.pass_through, pb.pass_through, rel_tol=1e-12, abs_tol=1e-15):
        raise TopologyMismatch(f"entries {a!r} and {b!r} must share p0 and standalone loss")
    s = pa.own_loss_coeff
    q = pa.pass_through * _tail_coefficient(graph, a_path[1:])
    x_entry, y, loss = two_entry_optimum(s, q, budget)
    rep = _report(graph, paths, {a: x_entry, b: x_entry, m: y}, budget, "closed-form",
                  topology=found)
    return _with_notes(rep, closed_form_loss=loss)


def _with_notes(rep: SolveReport, **notes) -> SolveReport:
    rep.notes.update(notes)
    return rep


# -- grid oracle --------------------------------------------------------------------


@lru_cache(maxsize=None)
def _compositions(parts: int, total: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 1:
        return np.array([[total]], dtype=np.int32)
    blocks = []
    for k in range(total + 1):
        rest = _compositions(parts - 1, total - k)
        blocks.append(np.hstack([np.full((len(rest), 1), k, dtype=np.int32), rest]))
    return np.vstack(blocks)


def solve_grid_oracle(graph: AttackGraph, budget: float | None = None,
                      resolution: float | None = None) -> SolveReport:
    """Exhaustive search on ``{x_i = k_i * resolution}``.

    Only points with ``sum(k) == floor(B / resolution)`` are scored: every
    other grid point is dominated by one of them because losses never grow
    with investment.
    """
    require_valid(graph)
    budget = _budget_of(graph, budget)
    paths = enumerate_paths(graph)
    obj = CompiledObjective(graph, paths)
    if obj.n > MAX_GRID_NODES:
        raise SolverError(f"grid oracle supports at most {MAX_GRID_NODES} investable nodes, "
                          f"graph has {obj.n}")
    if budget == 0:
        return _report(graph, paths, {}, budget, "grid", iterations=1)
    if resolution is None:
        resolution = budget / 200
    steps = int(math.floor(budget / resolution + 1e-9))
    best_x, best_f, count = np.zeros(obj.n), obj.value(np.zeros(obj.n)), 1
    blocks = ([np.array([[steps]])] if obj.n == 1 else
              (np.hstack([np.full((len(rest), 1), first), rest])
               for first in range(steps + 1)
               for rest in [_compositions(obj.n - 1, steps - first)]))
    for K in blocks:
        X = K * resolution
        vals = obj.batch_values(X)
        k = int(np.argmin(vals))
        count += len(X)
        if vals[k] < best_f:
            best_f, best_x = float(vals[k]), X[k].copy()
    return _report(graph, paths, obj.to_mapping(best_x), budget, "grid", iterations=count)


# -- front door ---------------------------------------------------------------------


def solve(graph: AttackGraph, budget: float | None = None,
          config: SolveConfig | None = None) -> SolveReport:
    """Optimal defender investment for ``graph`` under ``budget``.

    ``method="auto"`` uses a closed form when the topology has one and the
    numeric route otherwise.
    """
    config = config or SolveConfig()
    require_valid(graph)
    budget = _budget_of(graph, budget)
    if config.method == "closed-form":
        return solve_closed_form(graph, budget)
    if config.method == "grid":
        return solve_grid_oracle(graph, budget, config.grid_resolution)
    if config.method == "auto":
        try:
            return solve_closed_form(graph, budget)
        except TopologyMismatch:
            pass
    paths = enumerate_paths(graph)
    rep = _solve_numeric(graph, paths, budget, config)
    if not rep.converged:
        log.warning("numeric solve did not report convergence; returning best iterate")
    return rep
