"""Optimal security investment on attack graphs against a worst-case attacker."""

from importlib import resources

from .cvss import (AsilRating, CvssError, CvssVector, exploitability, impact, loss_from_asil,
                   p0_from_cvss, p0_from_exploitability)
from .fileformat import GraphFormatError, dump_graph, graph_from_dict, graph_to_dict, load_graph
from .graph import (AttackGraph, EquivalentNodeParams, GraphError, NodeParams, PathLimitExceeded,
                    ValidationReport, enumerate_paths, is_attack_path, post_set, pre_set,
                    require_valid, validate)
from .interventions import (InterventionReport, InterventionSpec, apply_intervention,
                            evaluate_intervention)
from .loss import (InvestmentProfile, NoAttackPath, attacker_best_response, breach_probability,
                   path_loss, system_loss)
from .reduction import ReductionMap, expand_investment, reduce
from .solver import (SolveConfig, SolveReport, SolverError, TopologyMismatch, detect_topology,
                     solve, solve_closed_form, solve_grid_oracle)

__version__ = "0.1.0"


def automotive_graph_path():
    """Path of the bundled automotive case-study graph file."""
    return resources.files(__name__) / "data" / "automotive.json"


__all__ = [
    "AsilRating", "AttackGraph", "CvssError", "CvssVector", "EquivalentNodeParams",
    "GraphError", "GraphFormatError", "InterventionReport", "InterventionSpec",
    "InvestmentProfile", "NoAttackPath", "NodeParams", "PathLimitExceeded", "ReductionMap",
    "SolveConfig", "SolveReport", "SolverError", "TopologyMismatch", "ValidationReport",
    "apply_intervention", "attacker_best_response", "automotive_graph_path",
    "breach_probability", "detect_topology", "dump_graph", "enumerate_paths",
    "evaluate_intervention", "expand_investment", "exploitability", "graph_from_dict",
    "graph_to_dict", "impact", "is_attack_path", "load_graph", "loss_from_asil", "p0_from_cvss",
    "p0_from_exploitability", "path_loss", "post_set", "pre_set", "reduce", "require_valid",
    "solve", "solve_closed_form", "solve_grid_oracle", "system_loss", "validate",
]
