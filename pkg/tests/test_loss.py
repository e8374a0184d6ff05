import json
import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from attackgame import (AttackGraph, InvestmentProfile, NodeParams, attacker_best_response,
                        breach_probability, enumerate_paths, path_loss, system_loss)
from attackgame.loss import CompiledObjective
from attackgame.scenarios import build_automotive_graph

from helpers import chain, random_dag, reference_loss, reference_path_loss

seeds = st.integers(0, 2**32 - 1)
PUBLISHED_X = {"CELL": 2.53, "TELE": 0, "WiFi": 2.36, "BT": 2.36, "USB": 1.23, "IVI": 1.52,
           "CG": 0, "CAN": 0}


def random_profile(rng, graph, budget):
    nodes = graph.investable_nodes()
    w = np.array([rng.random() for _ in nodes])
    w = w / w.sum() * budget * rng.random() if w.sum() > 0 else w
    return dict(zip(nodes, w.tolist()))


def test_breach_probability():
    assert breach_probability(NodeParams(0.5, 1), 0) == 0.5
    assert breach_probability(NodeParams(0.5, 1), math.log(2)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        breach_probability(NodeParams(0.5, 1), -1)


def test_chain_path_loss():
    g = chain([0.5] * 3, [1, 1, 1])
    assert path_loss(g, ("n1", "n2", "n3")).total == 0.875
    br = path_loss(g, ("n1", "n2", "n3"), {"n1": 1.0})
    assert br.total == pytest.approx(0.875 * math.exp(-1), rel=1e-15)
    assert [t.cumulative_probability for t in br.terms] == pytest.approx(
        [0.5 / math.e, 0.25 / math.e, 0.125 / math.e])
    json.dumps(br.to_dict())


def test_off_path_investment_is_ignored():
    g = chain([0.5] * 3, [1, 1, 1])
    assert path_loss(g, ("n1", "n2", "n3"), {"zz": 4.0}).total == 0.875


def test_case_study_profile_loss():
    loss, argmax = system_loss(build_automotive_graph(), PUBLISHED_X)
    assert loss == pytest.approx(0.0289, abs=1e-4)
    assert len(argmax) >= 1


def test_best_response_at_zero_is_bt_path():
    g = build_automotive_graph()
    loss, argmax = system_loss(g)
    # WiFi and BT tie; both beat the CELL path (0.3970...)
    assert argmax == [("BT", "IVI", "CG", "CAN"), ("WiFi", "IVI", "CG", "CAN")]
    assert loss == pytest.approx(0.66057, abs=1e-5)
    assert path_loss(g, ("CELL", "TELE", "IVI", "CG", "CAN")).total == pytest.approx(0.39702,
                                                                                    abs=1e-5)
    assert attacker_best_response(g) == ("BT", "IVI", "CG", "CAN")


def test_unique_argmax_on_disjoint_chains():
    g = AttackGraph.build({"a": (.5, 1), "b": (.5, 2), "t": (.5, 4)},
                          [("a", "t"), ("b", "t")], ["a", "b"], "t")
    assert system_loss(g)[1] == [("b", "t")]


def test_investment_profile_checks():
    with pytest.raises(ValueError):
        InvestmentProfile({"a": -1.0}, 1.0)
    with pytest.raises(ValueError):
        InvestmentProfile({"a": 2.0}, 1.0)
    inv = InvestmentProfile({"b": 0.5, "a": 0.25}, 1.0)
    assert list(inv.x) == ["a", "b"] and inv["zz"] == 0.0 and inv.total == 0.75


# -- properties (200 cases each) -----------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_monotone_in_investment(seed):
    rng = random.Random(seed)
    g = random_dag(rng)
    x = random_profile(rng, g, 5.0)
    v = rng.choice(g.investable_nodes())
    y = dict(x)
    y[v] = y.get(v, 0.0) + rng.uniform(0, 3)
    assert system_loss(g, y)[0] <= system_loss(g, x)[0] * (1 + 1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_exponential_shift_on_single_path(seed):
    rng = random.Random(seed)
    k = rng.randint(2, 6)
    g = chain([rng.uniform(0.05, 0.9) for _ in range(k)],
              [rng.uniform(0, 10) for _ in range(k - 1)] + [rng.uniform(0.1, 10)])
    x = {v: rng.uniform(0, 1) for v in g.nodes}
    delta = rng.uniform(0, 5)
    shifted = dict(x, n1=x["n1"] + delta)
    assert system_loss(g, shifted)[0] == pytest.approx(math.exp(-delta) * system_loss(g, x)[0],
                                                       rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    g = random_dag(rng)
    x = random_profile(rng, g, 5.0) if rng.random() < 0.5 else {}
    assert system_loss(g, x)[0] == pytest.approx(reference_loss(g, x), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds, st.floats(0.01, 100))
def test_argmax_invariant_under_loss_scaling(seed, c):
    rng = random.Random(seed)
    g = random_dag(rng)
    x = random_profile(rng, g, 3.0)
    scaled = g.replace(nodes={v: NodeParams(p.p0, p.loss * c) for v, p in g.nodes.items()})
    base, paths = system_loss(g, x)
    totals = sorted(path_loss(g, p, x).total for p in enumerate_paths(g))
    # skip near-ties that the absolute 1e-12 tolerance resolves differently after scaling
    gaps = [b - a for a, b in zip(totals, totals[1:]) if b - a > 0]
    assume(all(gap > 1e-9 * max(1, c) for gap in gaps))
    loss, spaths = system_loss(scaled, x)
    assert loss == pytest.approx(c * base, rel=1e-12)
    assert spaths == paths


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_midpoint_convexity(seed):
    rng = random.Random(seed)
    g = random_dag(rng)
    obj = CompiledObjective.from_graph(g)
    x = obj.to_vector(random_profile(rng, g, 4.0))
    y = obj.to_vector(random_profile(rng, g, 4.0))
    assert obj.value((x + y) / 2) <= (obj.value(x) + obj.value(y)) / 2 + 1e-12


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_compiled_objective_agrees(seed):
    rng = random.Random(seed)
    g = random_dag(rng)
    obj = CompiledObjective.from_graph(g)
    inv = random_profile(rng, g, 4.0)
    x = obj.to_vector(inv)
    assert obj.value(x) == pytest.approx(system_loss(g, inv)[0], rel=1e-12)
    assert obj.batch_values(np.stack([x, x]))[1] == pytest.approx(obj.value(x), rel=1e-12)
    f, grad = obj.subgradient(x)
    # finite-difference check of the active path's gradient
    h = 1e-7
    k = int(np.argmax(obj.path_losses(x)))
    for i in range(obj.n):
        e = np.zeros(obj.n)
        e[i] = h
        fd = (obj.path_losses(x + e)[k] - obj.path_losses(x - e)[k]) / (2 * h)
        assert obj.path_gradient(x, k)[i] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_reference_helper_handles_equivalent_nodes():
    from attackgame.graph import EquivalentNodeParams
    g = AttackGraph.build({"e": EquivalentNodeParams(0.75, 0.25), "t": (0.5, 1)}, [("e", "t")],
                          ["e"], "t")
    # 0.75 + 0.25 * 0.5 * 1
    assert reference_path_loss(g, ("e", "t")) == pytest.approx(0.875)
    assert system_loss(g)[0] == pytest.approx(0.875)
