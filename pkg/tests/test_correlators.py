import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellqft.correlators import (
    TSIRELSON,
    BilinearTable,
    BoundCheck,
    Dressing,
    DressedProjectorWord,
    Factor,
    FormulaMode,
    MissingEntryError,
    Orientation,
    Term,
    chsh_correlator,
    classify_bound,
    cluster_quantity,
    expand_word,
    mermin3_correlator,
    party_word,
    reduce_vacuum_expectation,
    table_from_matrix,
    three_op_correlator,
    two_op_correlator,
)

BELL = ["f", "f'", "g", "g'"]
MERMIN = ["f", "f'", "g", "g'", "h", "h'"]
DAG, PLAIN = Orientation.DAGGER_F, Orientation.F_DAGGER


def random_gram(rng, labels, scale=1.0):
    v = rng.normal(size=(len(labels) + 1, len(labels))) * scale
    return v.T @ v / len(labels)


def zero_table(labels):
    return table_from_matrix(labels, np.zeros((len(labels), len(labels))))


def test_all_zero_tables():
    for dressing in Dressing:
        assert chsh_correlator(zero_table(BELL), dressing=dressing).value == 2.0
        assert mermin3_correlator(zero_table(MERMIN), dressing=dressing).value == -2.0
        assert three_op_correlator(zero_table(["f", "g", "h"]), dressing=dressing) == -1.0
    assert two_op_correlator(zero_table(["f", "g"]), "f", "g") == 1.0
    assert reduce_vacuum_expectation(party_word(["f", "g"]), zero_table(["f", "g"])) == 1.0
    assert chsh_correlator(zero_table(BELL), mode="printed").value == 2.0
    assert mermin3_correlator(zero_table(MERMIN), mode="printed").value == -2.0
    assert three_op_correlator(zero_table(["f", "g", "h"]), mode="printed") == -1.0


def test_reducer_matches_two_operator_closed_form():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        t = table_from_matrix(["f", "g"], random_gram(rng, ["f", "g"], scale=rng.uniform(0.1, 2)))
        got = reduce_vacuum_expectation(party_word(["f", "g"], Dressing.ALTERNATING), t)
        worst = max(worst, abs(got - two_op_correlator(t, "f", "g")))
    assert worst <= 1e-14


def test_chsh_printed_equals_alternating():
    rng = np.random.default_rng(5)
    for _ in range(200):
        t = table_from_matrix(BELL, random_gram(rng, BELL))
        printed = chsh_correlator(t, mode=FormulaMode.PRINTED).value
        derived = chsh_correlator(t, dressing=Dressing.ALTERNATING).value
        assert derived == pytest.approx(printed, abs=1e-13)


def test_uniform_dressing_flips_cross_terms():
    rng = np.random.default_rng(6)
    gram = random_gram(rng, BELL)
    flipped = gram.copy()
    flipped[:2, 2:] *= -1
    flipped[2:, :2] *= -1
    # diagonal-block entries never enter the CHSH words, so this is a pure sign flip
    uni = chsh_correlator(table_from_matrix(BELL, gram), dressing=Dressing.UNIFORM).value
    alt = chsh_correlator(table_from_matrix(BELL, flipped), dressing=Dressing.ALTERNATING).value
    assert uni == pytest.approx(alt, abs=1e-13)


def test_three_operator_derived_closed_form():
    rng = np.random.default_rng(8)
    t = table_from_matrix(["f", "g", "h"], random_gram(rng, ["f", "g", "h"]))
    H = t.H
    f, g, h = "f", "g", "h"
    expected = (
        1.0
        - 8 * math.exp(-(H(f, f) + H(g, g) + H(h, h) + H(f, g) + H(g, h)))
        + 4 * math.exp(-(H(f, f) + H(g, g) + H(f, g)))
        + 4 * math.exp(-(H(g, g) + H(h, h) + H(g, h)))
        + 4 * math.exp(-(H(f, f) + H(h, h) - H(f, h)))
        - 2 * math.exp(-H(f, f)) - 2 * math.exp(-H(g, g)) - 2 * math.exp(-H(h, h))
    )
    assert three_op_correlator(t) == pytest.approx(expected, abs=1e-14)


def test_printed_forms_differ_from_derived():
    rng = np.random.default_rng(9)
    t3 = table_from_matrix(["f", "g", "h"], random_gram(rng, ["f", "g", "h"]))
    assert abs(three_op_correlator(t3, mode="printed") - three_op_correlator(t3)) > 1e-3
    t6 = table_from_matrix(MERMIN, random_gram(rng, MERMIN))
    assert abs(mermin3_correlator(t6, mode="printed").value - mermin3_correlator(t6).value) > 1e-3


def test_three_operator_printed_agrees_without_h_self_and_cross_terms():
    # the printed -8 term lacks H(h,h) and its f-h term has the opposite sign;
    # both differences disappear when those entries vanish
    rng = np.random.default_rng(10)
    gram = random_gram(rng, ["f", "g"])
    t = table_from_matrix(["f", "g", "h"], np.pad(gram, ((0, 1), (0, 1))))
    t.set_h("g", "h", 0.3)
    assert three_op_correlator(t, mode="printed") == pytest.approx(three_op_correlator(t), abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 3.0))
def test_bounds_on_valid_states(seed, scale):
    # a positive semidefinite H with vanishing Delta_PJ is a valid quasi-free state
    rng = np.random.default_rng(seed)
    for dressing in Dressing:
        c = chsh_correlator(table_from_matrix(BELL, random_gram(rng, BELL, scale)), dressing=dressing)
        assert abs(c.value) <= TSIRELSON + 1e-12
        m3 = mermin3_correlator(table_from_matrix(MERMIN, random_gram(rng, MERMIN, scale)), dressing=dressing)
        assert abs(m3.value) <= 4.0 + 1e-12


def test_commuting_operators_order_independent():
    rng = np.random.default_rng(11)
    t = table_from_matrix(["f", "g"], random_gram(rng, ["f", "g"]))
    ab = reduce_vacuum_expectation([Factor("f", DAG), Factor("g", PLAIN)], t, complex_value=True)
    ba = reduce_vacuum_expectation([Factor("g", PLAIN), Factor("f", DAG)], t, complex_value=True)
    assert ab == pytest.approx(ba, abs=1e-15)
    assert ab.imag == 0.0


def test_hermitian_conjugate_reverses_order():
    rng = np.random.default_rng(12)
    labels = ["f", "g", "h"]
    pj = rng.normal(size=(3, 3))
    pj = pj - pj.T
    t = table_from_matrix(labels, random_gram(rng, labels), pj=pj)
    word = [Factor("f", DAG), Factor("g", PLAIN), Factor("h", DAG)]
    fwd = reduce_vacuum_expectation(word, t, complex_value=True)
    rev = reduce_vacuum_expectation(word[::-1], t, complex_value=True)
    assert fwd.imag != 0.0
    assert fwd == pytest.approx(rev.conjugate(), abs=1e-14)


def test_single_operator_expectation():
    t = table_from_matrix(["f"], np.array([[0.7]]))
    assert reduce_vacuum_expectation(party_word(["f"]), t) == pytest.approx(1 - 2 * math.exp(-0.7))


def test_repeated_operator_squares_to_one():
    # (1 - 2P)^2 = 1 for a projector P
    t = table_from_matrix(["f"], np.array([[0.4]]))
    word = [Factor("f", DAG), Factor("f", DAG)]
    assert reduce_vacuum_expectation(word, t) == pytest.approx(1.0, abs=1e-15)


def test_expand_word_structure():
    terms = expand_word(party_word(["f", "g", "h"]))
    assert sum(t.coefficient for t in terms) == -1.0
    assert len(terms) == 8
    assert Term(1.0) in terms


def test_missing_entry_named():
    t = BilinearTable({("f", "f"): 0.1, ("g", "g"): 0.2})
    with pytest.raises(MissingEntryError, match=r"H\(f,g\)"):
        reduce_vacuum_expectation(party_word(["f", "g"]), t)
    with pytest.raises(MissingEntryError, match="Delta_PJ"):
        BilinearTable({("f", "g"): 0.1}).PJ("f", "g")


def test_table_validation():
    with pytest.raises(ValueError):
        BilinearTable({("f", "f"): -0.1})
    with pytest.raises(ValueError):
        BilinearTable({("f", "g"): 0.1, ("g", "f"): 0.2})
    with pytest.raises(ValueError):
        BilinearTable({}, {("f", "f"): 0.1})
    with pytest.raises(ValueError):
        BilinearTable({}, {("f", "g"): 0.1, ("g", "f"): 0.1})
    t = BilinearTable({("g", "f"): 0.3}, {("f", "g"): 0.2})
    assert t.H("f", "g") == 0.3 and t.PJ("g", "f") == -0.2


def test_word_validation():
    with pytest.raises(ValueError):
        DressedProjectorWord(())
    w = DressedProjectorWord((("f", "W F W^dag"),))
    assert w.factors[0].sign == -1


def test_cluster_identity_and_value():
    rng = np.random.default_rng(13)
    for _ in range(100):
        t = table_from_matrix(["f", "h"], random_gram(rng, ["f", "h"]), m=0.4)
        r = cluster_quantity(t, m=0.4, d=1.5)
        assert r.extras["connected"] == pytest.approx(r.extras["connected_closed_form"], abs=1e-12)
        hff, hhh, hfh = t.H("f", "f"), t.H("h", "h"), t.H("f", "h")
        want = math.exp(-(hff + hhh)) * abs(1 - math.exp(-hfh)) - 0.25 * math.exp(-0.6)
        assert r.value == pytest.approx(want, abs=1e-15)
        assert r.extras["cluster_negative"] == (r.value < 0)


def test_cluster_validation():
    t = table_from_matrix(["f", "h"], np.eye(2))
    with pytest.raises(ValueError):
        cluster_quantity(t, d=1.0)
    with pytest.raises(ValueError):
        cluster_quantity(t, m=1.0, d=-1.0)


def test_classify_bound():
    assert classify_bound(1.9, 2.0, TSIRELSON) is BoundCheck.WITHIN
    assert classify_bound(-2.1, 2.0, TSIRELSON) is BoundCheck.VIOLATED_CLASSICAL
    assert classify_bound(2.9, 2.0, TSIRELSON) is BoundCheck.EXCEEDS_QUANTUM_BOUND
    assert classify_bound(TSIRELSON + 1e-9, 2.0, TSIRELSON) is BoundCheck.VIOLATED_CLASSICAL


def test_report_record():
    rng = np.random.default_rng(14)
    r = chsh_correlator(table_from_matrix(BELL, random_gram(rng, BELL)))
    rec = r.as_record()
    assert rec["kind"] == "chsh" and rec["dressing"] == "uniform"
    assert "H(f,g)" in rec and "term0" in rec
    total = sum(v for k, v in rec.items() if k.startswith("term") and k.endswith("_value"))
    assert total == pytest.approx(r.value, abs=1e-14)


def test_exponent_text():
    assert Term(1.0).exponent_text() == "0"
    t = Term(-8.0, ((("f", "f"), 1), (("f", "g"), -2)))
    assert t.exponent_text() == "H(f,f) - 2*H(f,g)"
