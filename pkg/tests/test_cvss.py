import itertools

import pytest
from hypothesis import given, strategies as st

from attackgame.cvss import (ATTACK_COMPLEXITY, ATTACK_VECTOR, DEFAULT_ASIL_LOSSES,
                             PRIVILEGES_REQUIRED, USER_INTERACTION, AsilRating, CvssError,
                             CvssVector, check_asil_mapping, exploitability, impact,
                             loss_from_asil, p0_from_cvss, p0_from_exploitability)

METRICS = (ATTACK_VECTOR, ATTACK_COMPLEXITY, PRIVILEGES_REQUIRED, USER_INTERACTION)


@pytest.mark.parametrize("vector, ex, p0", [
    (("N", "H", "L", "N"), 1.62, 0.162),
    (("A", "L", "L", "N"), 2.07, 0.207),
    (("P", "L", "L", "N"), 0.67, 0.067),
])
def test_rows_that_reproduce(vector, ex, p0):
    v = CvssVector(*vector)
    assert round(exploitability(v), 2) == ex
    assert round(p0_from_cvss(v), 3) == p0


def test_adjacent_high_complexity_row_value():
    # 8.22 * 0.62 * 0.44 * 0.62 * 0.85
    assert exploitability(CvssVector("A", "H", "L", "N")) == pytest.approx(1.181753232, abs=1e-12)


def test_best_and_worst_vectors():
    assert exploitability(CvssVector("N", "L", "N", "N")) == pytest.approx(3.887, abs=1e-3)
    assert exploitability(CvssVector("P", "H", "H", "R")) == pytest.approx(0.12109, abs=1e-5)


def test_impact():
    assert impact(CvssVector("N", "L", "N", "N", "H", "H", "H")) == pytest.approx(5.873, abs=1e-3)
    assert impact(CvssVector("N", "L", "N", "N", "N", "N", "N")) == 0.0
    assert impact(CvssVector("N", "L", "N", "N", "L", "N", "N")) == pytest.approx(6.42 * 0.22)
    with pytest.raises(CvssError):
        impact(CvssVector("N", "L", "N", "N", "H"))


def test_parse_and_dict_forms():
    v = CvssVector.parse("CVSS:3.1/AV:N/AC:H/PR:L/UI:N/C:H/I:L/A:N")
    assert v == CvssVector("N", "H", "L", "N", "H", "L", "N")
    assert CvssVector.from_dict({"AV": "n", "ac": "h", "pr": "l", "ui": "n", "ImC": "h",
                                 "imi": "l", "ima": "n"}) == v
    assert CvssVector.from_dict(v.to_dict()) == v
    with pytest.raises(CvssError):
        CvssVector.parse("AV:N/AC:H/PR:L")
    with pytest.raises(CvssError):
        CvssVector("X", "H", "L", "N")


def test_p0_clamp_and_errors():
    assert p0_from_exploitability(12.0) == 1.0
    with pytest.raises(CvssError):
        p0_from_exploitability(-0.1)


def _rank(table, key):
    return sorted(table.values()).index(table[key])


@given(st.tuples(*(st.sampled_from(sorted(t)) for t in METRICS)), st.integers(0, 3))
def test_exploitability_monotone_in_each_metric(vec, which):
    table = METRICS[which]
    better = [k for k in table if table[k] >= table[vec[which]]]
    base = exploitability(CvssVector(*vec))
    for b in better:
        up = list(vec)
        up[which] = b
        assert exploitability(CvssVector(*up)) >= base


def test_every_vector_gives_a_probability():
    for vec in itertools.product(*(sorted(t) for t in METRICS)):
        assert 0 < p0_from_cvss(CvssVector(*vec)) < 1


def test_asil():
    assert loss_from_asil("QM") == 1.0
    assert loss_from_asil("ASIL-D") == 100.0
    assert loss_from_asil(AsilRating.C) == 50.0
    ranked = [DEFAULT_ASIL_LOSSES[r] for r in AsilRating]
    assert ranked == sorted(set(ranked))
    with pytest.raises(CvssError):
        loss_from_asil("E")
    with pytest.raises(CvssError):
        check_asil_mapping({AsilRating.A: 10, AsilRating.B: 10})
    with pytest.raises(CvssError):
        loss_from_asil("D", {AsilRating.QM: 1.0})
    assert loss_from_asil("D", {AsilRating.C: 3.0, AsilRating.D: 7.0}) == 7.0
