import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairck.core import (
    NIL,
    NIL_REF,
    Alphabet,
    Branch,
    Polarity,
    SessionSystem,
    SingletonAlphabetWarning,
    bisimilar,
    canonical_form,
    dom,
    dual,
    end_state,
    is_defined,
    is_win,
    plus,
    reachable,
)
from fairck.errors import DuplicateAlphabetLabel, FairckError, OverlappingLabels, PolarityMismatch
from fairck.generate import labels_for, random_systems
from fairck.syntax import load


def test_dual_is_an_involution():
    for p in Polarity:
        assert dual(dual(p)) is p
        assert dual(p) is not p


def test_alphabet_keeps_declaration_order():
    a = Alphabet(("z", "a", "m"))
    assert list(a) == ["z", "a", "m"]
    assert a.index("a") == 1
    assert "m" in a and "q" not in a


def test_alphabet_rejects_duplicates_and_empty():
    with pytest.raises(DuplicateAlphabetLabel):
        Alphabet(("a", "a"))
    with pytest.raises(FairckError):
        Alphabet(())


def test_singleton_alphabet_only_warns():
    with pytest.warns(SingletonAlphabetWarning):
        Alphabet(("only",))


def test_dom(named, ref):
    assert dom(named, ref("Done")) == frozenset()
    assert dom(named, ref("T1")) == {"true", "false"}
    assert dom(named, NIL_REF) == frozenset()


def test_is_defined_and_is_win(named, ref):
    assert not is_defined(named, NIL_REF)
    assert is_defined(named, ref("Win"))
    assert is_defined(named, ref("T1"))
    assert is_win(named, ref("Win"))
    assert not is_win(named, ref("Done"))
    sys = load("alphabet {true,false}\ntype X = !true.end!")
    assert not is_win(sys, sys.ref("X"))


def test_plus_merges_disjoint_branches():
    sys = load("alphabet {true,false}\ntype A = !true.end?\ntype B = !false.end?\ntype C = !{true,false}.end?")
    sys2, s = plus(sys, sys.ref("A"), sys.ref("B"))
    assert bisimilar(sys2, s, sys2.ref("C"))


def test_plus_with_end_is_identity():
    sys = load("alphabet {true,false}\ntype A = !true.A + !false.end?")
    sys2, e = end_state(sys, Polarity.OUT)
    sys3, s = plus(sys2, sys2.ref("A"), e)
    assert bisimilar(sys3, s, sys3.ref("A"))


def test_plus_errors():
    sys = load("alphabet {true,false}\ntype A = !true.end?\ntype B = !true.end!\ntype I = ?false.end?")
    with pytest.raises(OverlappingLabels) as e:
        plus(sys, sys.ref("A"), sys.ref("B"))
    assert e.value.label == "true"
    with pytest.raises(PolarityMismatch):
        plus(sys, sys.ref("A"), sys.ref("I"))
    with pytest.raises(PolarityMismatch):
        plus(sys, sys.ref("A"), NIL_REF)


def test_bisimilar_examples(named, ref):
    assert bisimilar(named, ref("T1"), ref("T1"))
    assert not bisimilar(named, ref("Win"), ref("Done"))
    sys = load("alphabet {a,b}\ntype X = !a.X\ntype Y = !a.!a.Y")
    assert bisimilar(sys, sys.ref("X"), sys.ref("Y"))


def _unfold(sys, s, depth):
    # bounded tree unfolding, the reference notion of equality
    if depth == 0:
        return None
    node = sys.states[s]
    if node is NIL:
        return "nil"
    return (node.polarity.value, tuple(_unfold(sys, t, depth - 1) for t in node.cont))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_bisimilar_agrees_with_deep_unfolding(seed):
    sys = next(random_systems(1, seed, max_states=5, alphabet_size=2))
    n = len(sys.states)
    for a in range(n):
        for b in range(n):
            assert bisimilar(sys, a, b) == (_unfold(sys, a, n + 1) == _unfold(sys, b, n + 1))


def test_reachable(named, ref):
    assert reachable(named, [ref("Done")]) == {ref("Done"), NIL_REF}
    assert reachable(named, [NIL_REF]) == {NIL_REF}
    r = reachable(named, [ref("T1")])
    assert len(r) == 4 and {ref("T1"), NIL_REF} < r
    assert any(bisimilar(named, x, ref("Done")) for x in r)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_reachable_monotone_and_idempotent(seed, data):
    sys = next(random_systems(1, seed, max_states=6, alphabet_size=2))
    n = len(sys.states)
    small = data.draw(st.sets(st.integers(0, n - 1)))
    big = small | data.draw(st.sets(st.integers(0, n - 1)))
    assert reachable(sys, small) <= reachable(sys, big)
    assert reachable(sys, reachable(sys, small)) == reachable(sys, small)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_dom_and_win_invariants(seed):
    sys = next(random_systems(1, seed, max_states=6, alphabet_size=3))
    for s in range(len(sys.states)):
        assert dom(sys, s) <= set(sys.alphabet.labels)
        if is_win(sys, s):
            assert is_defined(sys, s)
        for t in range(len(sys.states)):
            if bisimilar(sys, s, t):
                assert dom(sys, s) == dom(sys, t) and sys.polarity(s) == sys.polarity(t)


def _branch_triple(draw_pol, conts):
    return [Branch(draw_pol, c) for c in conts]


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_plus_commutative_and_associative(data):
    alphabet = labels_for(3)
    pol = data.draw(st.sampled_from(list(Polarity)))
    owner = data.draw(st.lists(st.integers(0, 3), min_size=3, max_size=3))  # label -> operand or none
    targets = data.draw(st.lists(st.integers(1, 3), min_size=3, max_size=3))
    conts = [tuple(targets[i] if owner[i] == k else 0 for i in range(3)) for k in range(3)]
    sys = SessionSystem(alphabet, [NIL] + _branch_triple(pol, conts))
    s1, ab = plus(sys, 1, 2)
    s2, ba = plus(s1, 2, 1)
    assert bisimilar(s2, ab, ba)
    s3, ab_c = plus(s2, ab, 3)
    s4, bc = plus(s3, 2, 3)
    s5, a_bc = plus(s4, 1, bc)
    assert bisimilar(s5, ab_c, a_bc)


def test_from_table_aliases_nil_and_prunes():
    alphabet = labels_for(2)
    nodes = [Branch(Polarity.OUT, (2, 1)), NIL, NIL, Branch(Polarity.IN, (0, 0))]
    sys = SessionSystem.from_table(alphabet, nodes, {"A": 0})
    assert len(sys.states) == 2
    assert sys.states[1].cont == (0, 0)


def test_session_system_rejects_partial_maps():
    with pytest.raises(FairckError):
        SessionSystem(labels_for(2), [NIL, Branch(Polarity.IN, (0,))])
    with pytest.raises(FairckError):
        SessionSystem(labels_for(2), [NIL, Branch(Polarity.IN, (0, 5))])


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_canonical_form_decides_bisimilarity(seed):
    sys = next(random_systems(1, seed, max_states=6, alphabet_size=2))
    n = len(sys.states)
    for a in range(n):
        for b in range(n):
            assert (canonical_form(sys, a) == canonical_form(sys, b)) == bisimilar(sys, a, b)


def test_canonical_form_ignores_unrolling():
    sys = load("alphabet {a,b}\ntype X = !a.X\ntype Y = !a.!a.Y\ntype Z = !a.!b.Z")
    assert canonical_form(sys, sys.ref("X")) == canonical_form(sys, sys.ref("Y"))
    assert canonical_form(sys, sys.ref("X")) != canonical_form(sys, sys.ref("Z"))
