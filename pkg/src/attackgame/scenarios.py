"""The automotive CAN-access case study and its experiment families.

Families:

``base``        solve the 8-node IVI graph and its reduced form
``entries``     Cases I-V: base, no cellular (CELL/TELE removed), no USB,
                and an extra entry on IVI with low / high standalone loss
``defenses``    a safeguard spliced in before TELE, IVI or CAN over a grid
                of (p_sec, L_sec)
``redundancy``  0-3 functionally redundant sensors feeding a control module
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .graph import AttackGraph, NodeId
from .interventions import InterventionSpec, apply_intervention
from .reduction import reduce
from .solver import SolveConfig, solve

FAMILIES = ("base", "entries", "defenses", "redundancy")

# node, AV, AC, PR, UI, printed EX, printed p0, loss, ASIL used to reproduce the loss
AUTOMOTIVE_ASSETS = (
    ("CELL", "N", "H", "L", "N", 1.62, 0.162, 1.0, "QM"),
    ("TELE", "A", "H", "L", "N", 1.19, 0.119, 10.0, "B"),
    ("WiFi", "A", "L", "L", "N", 2.07, 0.207, 1.0, "QM"),
    ("BT", "A", "L", "L", "N", 2.07, 0.207, 1.0, "QM"),
    ("USB", "P", "L", "L", "N", 0.67, 0.067, 1.0, "QM"),
    ("IVI", "A", "H", "L", "N", 1.19, 0.119, 10.0, "B"),
    ("CG", "A", "H", "L", "N", 1.19, 0.119, 50.0, "C"),
    ("CAN", "A", "L", "L", "N", 2.07, 0.207, 100.0, "D"),
)
AUTOMOTIVE_EDGES = (
    ("CELL", "TELE"), ("TELE", "IVI"), ("WiFi", "IVI"), ("BT", "IVI"),
    ("USB", "IVI"), ("IVI", "CG"), ("CG", "CAN"),
)
AUTOMOTIVE_ENTRIES = ("CELL", "WiFi", "BT", "USB")
AUTOMOTIVE_TARGET = "CAN"
CASE_STUDY_BUDGET = 10.0

DEFENSE_ANCHORS = {
    "before-TELE": ("CELL", "TELE"),
    "before-IVI": "IVI",
    "before-CAN": ("CG", "CAN"),
}
DEFAULT_SENSOR_P0 = (0.207, 0.252, 0.144, 0.144)


def build_automotive_graph(budget: float | None = CASE_STUDY_BUDGET) -> AttackGraph:
    nodes = {row[0]: (row[6], row[7]) for row in AUTOMOTIVE_ASSETS}
    return AttackGraph.build(nodes, AUTOMOTIVE_EDGES, AUTOMOTIVE_ENTRIES, AUTOMOTIVE_TARGET, budget)


def automotive_graph_dict(with_params: bool = True) -> dict:
    """Graph-file form of the case study, carrying the CVSS/ASIL inputs."""
    nodes = []
    for nid, av, ac, pr, ui, _ex, p0, loss, asil in AUTOMOTIVE_ASSETS:
        node = {"id": nid}
        if with_params:
            node.update(p0=p0, loss=loss)
        node.update(cvss={"av": av, "ac": ac, "pr": pr, "ui": ui}, asil=asil)
        nodes.append(node)
    return {"nodes": nodes, "edges": [list(e) for e in AUTOMOTIVE_EDGES],
            "entries": list(AUTOMOTIVE_ENTRIES), "target": AUTOMOTIVE_TARGET,
            "budget": CASE_STUDY_BUDGET}


@dataclass(frozen=True)
class ScenarioConfig:
    family: str = "base"
    budget: float = CASE_STUDY_BUDGET
    method: str = "auto"
    # entries: Cases IV/V
    added_entry_p0: float = 0.207
    added_entry_losses: tuple[float, float] = (1.0, 10.0)
    added_entry_anchor: NodeId = "IVI"
    # defenses
    locations: tuple[str, ...] = tuple(DEFENSE_ANCHORS)
    p_sec_grid: tuple[float, ...] = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
    l_sec_grid: tuple[float, ...] = (0.0, 1.0, 10.0, 100.0)
    # redundancy
    sensor_p0: tuple[float, ...] = DEFAULT_SENSOR_P0
    max_redundant: int = 3
    sensor_loss: float = 1.0
    join_p0: float | None = None
    entry_params: tuple[float, float] = (0.119, 10.0)
    control_params: tuple[float, float] = (0.119, 50.0)
    target_params: tuple[float, float] = (0.207, 100.0)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        for name in ("p_sec_grid", "l_sec_grid", "sensor_p0", "locations"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        probs = (self.added_entry_p0, *self.p_sec_grid, *self.sensor_p0)
        if any(not 0 <= p <= 1 for p in probs):
            raise ValueError("probabilities must lie in [0, 1]")
        unknown = set(self.locations) - set(DEFENSE_ANCHORS)
        if unknown:
            raise ValueError(f"unknown defense locations {sorted(unknown)}")
        if not 0 <= self.max_redundant < len(self.sensor_p0):
            raise ValueError("need one sensor probability per sensor (base + redundant)")

    @property
    def solve_config(self) -> SolveConfig:
        return SolveConfig(method=self.method)


@dataclass
class ScenarioRow:
    case: str
    label: str
    params: dict
    investments: dict[NodeId, float]
    loss: float
    graph: AttackGraph = field(repr=False, compare=False)


@dataclass
class ScenarioResult:
    family: str
    rows: list[ScenarioRow]
    config: ScenarioConfig

    def row(self, case: str) -> ScenarioRow:
        for r in self.rows:
            if r.case == case:
                return r
        raise KeyError(case)

    def columns(self) -> tuple[list[str], list[str]]:
        params, nodes = [], []
        for r in self.rows:
            params += [k for k in r.params if k not in params]
            nodes += [v for v in r.investments if v not in nodes]
        return params, nodes

    def to_csv(self, target: str | Path | None = None) -> str:
        params, nodes = self.columns()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["case", "label", *params, "loss", *(f"x_{v}" for v in nodes)])
        for r in self.rows:
            w.writerow([r.case, r.label, *(r.params.get(k, "") for k in params),
                        repr(r.loss), *(repr(r.investments[v]) if v in r.investments else ""
                                        for v in nodes)])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text, encoding="utf-8")
        return text

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        return {
            "family": self.family,
            "config": cfg,
            "rows": [{"case": r.case, "label": r.label, "params": r.params,
                      "loss": r.loss, "investments": r.investments} for r in self.rows],
        }

    def audit(self, tol: float = 1e-9) -> list[str]:
        """Re-solve every row; return the cases whose stored loss does not reproduce."""
        bad = []
        for r in self.rows:
            again = solve(r.graph, self.config.budget, self.config.solve_config).equilibrium_loss
            if abs(again - r.loss) > tol:
                bad.append(r.case)
        return bad


def _row(case: str, label: str, params: dict, graph: AttackGraph,
         config: ScenarioConfig) -> ScenarioRow:
    rep = solve(graph, config.budget, config.solve_config)
    return ScenarioRow(case, label, params, dict(rep.investments.x), rep.equilibrium_loss, graph)


def _without(graph: AttackGraph, drop: Sequence[NodeId]) -> AttackGraph:
    nodes = {v: p for v, p in graph.nodes.items() if v not in drop}
    edges = frozenset(e for e in graph.edges if e[0] not in drop and e[1] not in drop)
    return graph.replace(nodes=nodes, edges=edges, entries=graph.entries - set(drop))


def run_base(config: ScenarioConfig | None = None) -> ScenarioResult:
    config = config or ScenarioConfig("base")
    g = build_automotive_graph(config.budget)
    reduced, _ = reduce(g)
    rows = [
        _row("G", "full attack graph", {"investable": len(g.investable_nodes())}, g, config),
        _row("G_r", "reduced attack graph", {"investable": len(reduced.investable_nodes())},
             reduced, config),
    ]
    return ScenarioResult("base", rows, config)


def run_entry_cases(config: ScenarioConfig | None = None) -> ScenarioResult:
    config = config or ScenarioConfig("entries")
    g = build_automotive_graph(config.budget)
    low, high = config.added_entry_losses

    def added(loss: float) -> AttackGraph:
        spec = InterventionSpec("entry", "NEW", config.added_entry_p0, loss,
                                config.added_entry_anchor)
        return apply_intervention(g, spec)

    cases = [
        ("I", "base configuration", {}, g),
        ("II", "no mobile communication (CELL, TELE removed)", {}, _without(g, ["CELL", "TELE"])),
        ("III", "no physical access (USB removed)", {}, _without(g, ["USB"])),
        ("IV", "added entry, low standalone loss",
         {"added_p0": config.added_entry_p0, "added_loss": low}, added(low)),
        ("V", "added entry, high standalone loss",
         {"added_p0": config.added_entry_p0, "added_loss": high}, added(high)),
    ]
    rows = [_row(c, label, params, graph, config) for c, label, params, graph in cases]
    return ScenarioResult("entries", rows, config)


def run_defense_sweep(config: ScenarioConfig | None = None) -> ScenarioResult:
    config = config or ScenarioConfig("defenses")
    g = build_automotive_graph(config.budget)
    rows = [_row("base", "no safeguard", {}, g, config)]
    for loc in config.locations:
        for l_sec in config.l_sec_grid:
            for p_sec in config.p_sec_grid:
                spec = InterventionSpec("series", "SEC", p_sec, l_sec, DEFENSE_ANCHORS[loc])
                params = {"location": loc, "p_sec": p_sec, "l_sec": l_sec}
                rows.append(_row(f"{loc}|L={l_sec:g}|p={p_sec:g}", f"safeguard {loc}", params,
                                 apply_intervention(g, spec), config))
    return ScenarioResult("defenses", rows, config)


def build_redundancy_graph(n_redundant: int, config: ScenarioConfig | None = None) -> AttackGraph:
    """IVI -> sensors -> CTRL -> CAN with ``n_redundant`` extra sensors.

    With more than one sensor every sensor branch passes through one
    zero-loss join node per other sensor before reaching the control module:
    its messages only get through undetected if the other readings are
    subverted too.
    """
    config = config or ScenarioConfig("redundancy")
    count = n_redundant + 1
    if count > len(config.sensor_p0):
        raise ValueError(f"no sensor probability given for sensor {count}")
    join_p0 = config.join_p0 if config.join_p0 is not None else config.sensor_p0[0]
    nodes = {"IVI": config.entry_params, "CTRL": config.control_params,
             "CAN": config.target_params}
    edges = [("CTRL", "CAN")]
    for i in range(count):
        s = f"S{i}"
        nodes[s] = (config.sensor_p0[i], config.sensor_loss)
        edges.append(("IVI", s))
        prev = s
        for j in range(count):
            if j != i:
                join = f"J{i}_{j}"
                nodes[join] = (join_p0, 0.0)
                edges.append((prev, join))
                prev = join
        edges.append((prev, "CTRL"))
    return AttackGraph.build(nodes, edges, ["IVI"], "CAN", config.budget)


def run_redundancy_sweep(config: ScenarioConfig | None = None) -> ScenarioResult:
    config = config or ScenarioConfig("redundancy")
    rows = []
    for r in range(config.max_redundant + 1):
        probs = config.sensor_p0[: r + 1]
        label = "base configuration" if r == 0 else f"{r} redundant sensor{'s' if r > 1 else ''}"
        rows.append(_row(str(r), label, {"redundant": r, "sensor_p0": " ".join(map(str, probs))},
                         build_redundancy_graph(r, config), config))
    return ScenarioResult("redundancy", rows, config)


RUNNERS = {
    "base": run_base,
    "entries": run_entry_cases,
    "defenses": run_defense_sweep,
    "redundancy": run_redundancy_sweep,
}


def run(config: ScenarioConfig) -> ScenarioResult:
    return RUNNERS[config.family](config)
