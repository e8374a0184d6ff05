"""JSON graph files.

Schema::

    {"nodes": [{"id": "CELL", "p0": 0.162, "loss": 1.0,
                "cvss": {"av": "N", "ac": "H", "pr": "L", "ui": "N"}, "asil": "QM"}],
     "edges": [["CELL", "TELE"], ...],
     "entries": ["CELL", ...], "target": "CAN", "budget": 10.0}

Explicit ``p0`` beats a ``cvss`` block and explicit ``loss`` beats ``asil``.
Optional top-level keys: ``asil_losses`` (rating -> loss table) and
``impact_loss_scale`` (when set, nodes without an explicit loss but with a
full CVSS impact triple get ``loss = scale * Im``). Reduced nodes are written
with ``own_loss_coeff``/``pass_through`` instead of ``p0``/``loss``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

from .cvss import (CvssVector, impact, loss_from_asil, p0_from_cvss, parse_asil_mapping,
                   DEFAULT_ASIL_LOSSES)
from .graph import AttackGraph, EquivalentNodeParams, NodeParams


class GraphFormatError(ValueError):
    pass


def _node_params(raw: Mapping[str, Any], asil_table, impact_scale) -> NodeParams | EquivalentNodeParams:
    nid = raw.get("id")
    if "own_loss_coeff" in raw or "pass_through" in raw:
        try:
            return EquivalentNodeParams(float(raw["own_loss_coeff"]), float(raw["pass_through"]))
        except KeyError as exc:
            raise GraphFormatError(f"node {nid!r}: equivalent node needs {exc.args[0]}") from None

    cvss = CvssVector.from_dict(raw["cvss"]) if raw.get("cvss") is not None else None
    if raw.get("p0") is not None:
        p0 = float(raw["p0"])
    elif cvss is not None:
        p0 = p0_from_cvss(cvss)
    else:
        raise GraphFormatError(f"node {nid!r} needs either p0 or a cvss block")

    if raw.get("loss") is not None:
        loss = float(raw["loss"])
    elif impact_scale is not None and cvss is not None and cvss.has_impact:
        loss = impact_scale * impact(cvss)
    elif raw.get("asil") is not None:
        loss = loss_from_asil(raw["asil"], asil_table)
    else:
        raise GraphFormatError(f"node {nid!r} needs either loss or an asil rating")
    return NodeParams(p0, loss)


def graph_from_dict(data: Mapping[str, Any]) -> AttackGraph:
    try:
        raw_nodes = data["nodes"]
        target = data["target"]
    except KeyError as exc:
        raise GraphFormatError(f"graph file is missing {exc.args[0]!r}") from None
    if isinstance(target, list):
        if len(target) != 1:
            raise GraphFormatError(f"exactly one target is required, got {len(target)}")
        target = target[0]
    asil_table = (parse_asil_mapping(data["asil_losses"]) if data.get("asil_losses")
                  else DEFAULT_ASIL_LOSSES)
    impact_scale = data.get("impact_loss_scale")

    nodes = {}
    for raw in raw_nodes:
        nid = raw.get("id")
        if not nid:
            raise GraphFormatError("every node needs a nonempty id")
        if nid in nodes:
            raise GraphFormatError(f"duplicate node id {nid!r}")
        try:
            nodes[str(nid)] = _node_params(raw, asil_table, impact_scale)
        except ValueError as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"node {nid!r}: {exc}") from None

    edges = []
    for e in data.get("edges", []):
        if len(e) != 2:
            raise GraphFormatError(f"edge {e!r} must be a [source, destination] pair")
        edges.append((str(e[0]), str(e[1])))
    budget = data.get("budget")
    return AttackGraph(nodes, frozenset(edges), frozenset(data.get("entries", [])), str(target),
                       None if budget is None else float(budget))


def graph_to_dict(graph: AttackGraph) -> dict:
    nodes = []
    for nid, p in graph.nodes.items():
        if isinstance(p, EquivalentNodeParams):
            nodes.append({"id": nid, "own_loss_coeff": p.own_loss_coeff,
                          "pass_through": p.pass_through})
        else:
            nodes.append({"id": nid, "p0": p.p0, "loss": p.loss})
    out = {
        "nodes": nodes,
        "edges": [list(e) for e in graph.sorted_edges()],
        "entries": sorted(graph.entries),
        "target": graph.target,
    }
    if graph.budget is not None:
        out["budget"] = graph.budget
    return out


def load_graph(path: str | Path) -> AttackGraph:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: not valid JSON ({exc})") from None
    return graph_from_dict(data)


def dump_graph(graph: AttackGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(graph), indent=2) + "\n", encoding="utf-8")
