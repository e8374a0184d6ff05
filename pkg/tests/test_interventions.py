import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from attackgame import (InterventionSpec, SolveConfig, apply_intervention, enumerate_paths,
                        evaluate_intervention, solve)
from attackgame.interventions import InterventionError
from attackgame.scenarios import build_automotive_graph

from helpers import (add_input_form, base_chain, base_form, chain, hybrid_form, parallel_form,
                     series_form)

seeds = st.integers(0, 2**32 - 1)
BASE = base_chain(0.5, 1, 1, 1)


def spec(kind, loss, anchor="n2", p0=0.5, **kw):
    return InterventionSpec(kind, "n4", p0, loss, anchor, **kw)


def test_series_splices_edge():
    g = apply_intervention(BASE, spec("series", 0, ("n2", "n3")))
    assert enumerate_paths(g) == [("n1", "n2", "n4", "n3")]


def test_series_in_front_of_entry_node():
    g = apply_intervention(BASE, spec("series", 0, "n1"))
    assert g.entries == {"n4"}
    assert enumerate_paths(g) == [("n4", "n1", "n2", "n3")]


def test_parallel_mirrors_anchor():
    g = apply_intervention(BASE, spec("parallel", 1))
    assert enumerate_paths(g) == [("n1", "n2", "n3"), ("n1", "n4", "n3")]


def test_hybrid_wiring():
    g = apply_intervention(BASE, spec("hybrid", 1))
    assert enumerate_paths(g) == [("n1", "n2", "n2'", "n3"), ("n1", "n4", "n4'", "n3")]
    assert g.nodes["n2'"].loss == 0 and g.nodes["n2'"].p0 == 0.5
    g = apply_intervention(BASE, spec("hybrid", 1, join_ids=("ja", "jb"), join_p0=0.9))
    assert g.nodes["ja"].p0 == 0.9 and ("n4", "jb") in g.edges


def test_entry_adds_attack_surface():
    g = apply_intervention(BASE, spec("entry", 1))
    assert g.entries == {"n1", "n4"}
    assert enumerate_paths(g) == [("n1", "n2", "n3"), ("n4", "n2", "n3")]


@pytest.mark.parametrize("bad", [
    dict(kind="teleport", node_id="n4", p0=0.5, loss=1, anchor="n2"),
    dict(kind="parallel", node_id="n4", p0=0.5, loss=1, anchor=("n1", "n2")),
    dict(kind="series", node_id="n4", p0=1.5, loss=1, anchor="n2"),
    dict(kind="hybrid", node_id="n4", p0=0.5, loss=1, anchor="n2", join_p0=2.0),
])
def test_malformed_specs(bad):
    with pytest.raises(ValueError):
        InterventionSpec(**bad)


@pytest.mark.parametrize("s", [
    spec("series", 0, ("n1", "n3")),
    spec("parallel", 0, "zz"),
    spec("parallel", 0, "n3"),
    InterventionSpec("entry", "n2", 0.5, 1, "n3"),
    spec("hybrid", 0, join_ids=("n1", "x")),
])
def test_inapplicable_specs(s):
    with pytest.raises(InterventionError):
        apply_intervention(BASE, s)


def test_worked_examples_at_zero_budget():
    series = evaluate_intervention(BASE, spec("series", 0, ("n2", "n3")), 0.0)
    assert series.base_loss == 0.875
    assert series.new_loss == pytest.approx(0.8125)
    assert series.security_cost == pytest.approx(-0.0625)
    assert series.break_even_benefit == 0.0

    parallel = evaluate_intervention(BASE, spec("parallel", 2), 0.0)
    assert parallel.new_loss == pytest.approx(1.125)
    assert parallel.break_even_benefit == pytest.approx(0.25)

    hybrid = evaluate_intervention(BASE, spec("hybrid", 1), 0.0)
    assert hybrid.new_loss == pytest.approx(0.8125)
    json.dumps(hybrid.to_dict())


def test_safeguard_before_telematics():
    g = build_automotive_graph()
    rep = evaluate_intervention(g, InterventionSpec("series", "SEC", 0.1, 0, ("CELL", "TELE")),
                                10.0)
    assert rep.new_loss < rep.base_loss
    assert rep.new.method == "numeric"


# -- closed-form agreement on random instances --------------------------------------------


def random_base(rng):
    p0 = rng.uniform(0.05, 0.9)
    losses = [rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0.1, 10)]
    return p0, losses, rng.uniform(0, 5)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_numeric_matches_forms(seed):
    rng = random.Random(seed)
    p0, (l1, l2, l3), budget = random_base(rng)
    l4 = rng.uniform(0, 10)
    numeric = SolveConfig(method="numeric")
    g = base_chain(p0, l1, l2, l3)
    cases = [
        (g, base_form(p0, l1, l2, l3, budget)),
        (apply_intervention(g, spec("series", l4, ("n2", "n3"), p0)),
         series_form(p0, l1, l2, l3, l4, budget)),
        (apply_intervention(g, spec("parallel", l4, "n2", p0)),
         parallel_form(p0, l1, l2, l3, l4, budget)),
        (apply_intervention(g, spec("hybrid", l4, "n2", p0)),
         hybrid_form(p0, l1, l2, l3, l4, budget)),
    ]
    for graph, expected in cases:
        assert solve(graph, budget, numeric).equilibrium_loss == pytest.approx(expected, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(seeds, st.booleans())
def test_add_input_both_branches(seed, entry_heavy):
    rng = random.Random(seed)
    p0, (_, l2, l3), budget = random_base(rng)
    k = p0 * l2 + p0**2 * l3
    if entry_heavy:
        l = rng.uniform(k, k + 10)
    else:
        budget = rng.uniform(0.1, 5)
        l = k * math.exp(-rng.uniform(0, budget))
    g = apply_intervention(base_chain(p0, l, l2, l3), spec("entry", l, "n2", p0))
    expected = add_input_form(p0, l, l2, l3, budget)
    assert solve(g, budget, SolveConfig(method="numeric")).equilibrium_loss == pytest.approx(
        expected, rel=1e-6)
    assert solve(g, budget, SolveConfig(method="closed-form")).equilibrium_loss == pytest.approx(
        expected, rel=1e-12)


# -- directionality -----------------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_zero_loss_series_never_hurts(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    g = chain([rng.uniform(0.05, 0.9) for _ in range(n)],
              [rng.uniform(0, 10) for _ in range(n - 1)] + [rng.uniform(0.1, 10)])
    i = rng.randrange(n - 1)
    s = InterventionSpec("series", "new", rng.uniform(0.05, 0.9), 0.0, (f"n{i + 1}", f"n{i + 2}"))
    rep = evaluate_intervention(g, s, rng.uniform(0, 5))
    assert rep.new_loss <= rep.base_loss * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_parallel_direction(seed):
    rng = random.Random(seed)
    p0, (l1, l2, l3), budget = random_base(rng)
    g = base_chain(p0, l1, l2, l3)
    low = evaluate_intervention(g, spec("parallel", rng.uniform(0, l2), "n2", p0), budget)
    assert abs(low.new_loss - low.base_loss) <= 1e-9
    high = evaluate_intervention(g, spec("parallel", l2 + rng.uniform(0.01, 5), "n2", p0), budget)
    assert high.new_loss > high.base_loss


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_entry_addition_increases_loss(seed):
    rng = random.Random(seed)
    p0, (_, l2, l3), _ = random_base(rng)
    budget = rng.uniform(0.1, 5)
    k = p0 * l2 + p0**2 * l3
    l = rng.uniform(0.01 * k, k)
    g = base_chain(p0, l, l2, l3)
    rep = evaluate_intervention(g, spec("entry", l, "n2", p0), budget)
    assert rep.new_loss > rep.base_loss


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_hybrid_never_worse_than_parallel(seed):
    rng = random.Random(seed)
    p0, (l1, l2, l3), budget = random_base(rng)
    g = base_chain(p0, l1, l2, l3)
    pa, la = rng.uniform(0.05, 0.9), rng.uniform(0, 10)
    par = evaluate_intervention(g, spec("parallel", la, "n2", pa), budget)
    hyb = evaluate_intervention(g, spec("hybrid", la, "n2", pa), budget)
    assert hyb.new_loss <= par.new_loss * (1 + 1e-12)
