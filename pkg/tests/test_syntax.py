import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairck.core import bisimilar
from fairck.errors import (
    DslSyntaxError,
    DuplicateAlphabetLabel,
    DuplicateTypeName,
    OverlappingLabels,
    PolarityMismatch,
    UndefinedTypeName,
    UnguardedRecursion,
    UnknownLabel,
)
from fairck.generate import exhaustive_systems, random_systems
from fairck.syntax import Prefix, Ref, Sum, load, parse, pretty, print_system

from .conftest import CORPUS


def test_parse_sum_of_prefixes():
    src = parse("alphabet {true,false,z,p}\ntype T1 = !true.!{z,p}.T1 + !false.end?")
    (d,) = src.typedefs
    assert d.name == "T1"
    assert isinstance(d.term, Sum) and len(d.term.operands) == 2
    first = d.term.operands[0]
    assert isinstance(first, Prefix) and first.labels == ("true",)
    assert first.body.labels == ("z", "p")


def test_alphabet_must_come_first():
    with pytest.raises(DslSyntaxError) as e:
        parse("type X = nil")
    assert e.value.line == 1 and e.value.col == 1


def test_self_reference_parses():
    d = parse("alphabet {a}\ntype X = !a.X").typedefs[0]
    assert isinstance(d.term, Prefix) and isinstance(d.term.body, Ref)


@pytest.mark.parametrize(
    "text, exc",
    [
        ("alphabet {a,a}", DuplicateAlphabetLabel),
        ("alphabet {a,b}\ntype X = end!\ntype X = end?", DuplicateTypeName),
        ("alphabet {a,b}\ntype X = !c.end!", UnknownLabel),
        ("alphabet {a,b}\ntype X = !a.", DslSyntaxError),
        ("alphabet {a,b}\ntype X = !a.end! +", DslSyntaxError),
        ("alphabet {a,b}\ntype X = (end!", DslSyntaxError),
    ],
)
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse(text)


def test_syntax_error_position():
    with pytest.raises(DslSyntaxError) as e:
        parse("alphabet {a,b}\n// note\ntype X = !a.#")
    assert (e.value.line, e.value.col) == (3, 13)


def test_named_corpus_elaborates(named):
    for name in ("T1", "S1", "T2", "S2"):
        s = named.ref(name)
        assert named.polarity(s) is not None
        assert len(named._dom[s]) == 2


@pytest.mark.parametrize(
    "text, exc",
    [
        ("alphabet {a,b}\ntype X = X", UnguardedRecursion),
        ("alphabet {a,b}\ntype X = Y\ntype Y = X + !a.end!", UnguardedRecursion),
        ("alphabet {a,b}\ntype X = !a.end? + ?b.end?", PolarityMismatch),
        ("alphabet {a,b}\ntype X = !a.end? + !{a,b}.end?", OverlappingLabels),
        ("alphabet {a,b}\ntype X = !a.Y", UndefinedTypeName),
        ("alphabet {a,b}\ntype X = nil + !a.end?", PolarityMismatch),
    ],
)
def test_elaboration_errors(text, exc):
    with pytest.raises(exc):
        load(text)


def test_alias_chains_resolve():
    sys = load("alphabet {a,b}\ntype X = Y\ntype Y = Z\ntype Z = !a.X")
    assert bisimilar(sys, sys.ref("X"), sys.ref("Y"))
    assert bisimilar(sys, sys.ref("Y"), sys.ref("Z"))


def test_sum_through_names():
    sys = load("alphabet {a,b}\ntype A = !a.end?\ntype B = A + !b.B\ntype C = !a.end? + !b.C")
    assert bisimilar(sys, sys.ref("B"), sys.ref("C"))


def test_pretty_small_terms(named, ref):
    assert pretty(named, ref("Win")) == "end!"
    assert pretty(named, 0) == "nil"
    assert pretty(named, ref("R2")) == "!true.(?z.end! + ?p.R2)"


def test_print_round_trip_on_corpus(named):
    again = load(print_system(named))
    merged, off = named.disjoint_union(again)
    for name in named.names:
        b = again.ref(name)
        assert bisimilar(merged, named.ref(name), b + off if b else 0)


def test_printed_corpus_is_a_fixed_point(named):
    text = print_system(named)
    assert print_system(load(text)) == text


def test_comments_and_whitespace_are_ignored():
    a = load("alphabet {a,b}\ntype X = !a.X // loop\n")
    b = load("alphabet{a ,b}   type X=!a.X")
    assert print_system(a) == print_system(b)


def _round_trips(sys):
    for s in range(1, len(sys.states)):
        text = print_system(sys, root_ref=s, root_name="Root")
        back = load(text)
        merged, off = sys.disjoint_union(back)
        r = back.ref(sys.name_of(s) or "Root")
        if not bisimilar(merged, s, r + off if r else 0):
            return False
    return True


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_round_trip_random_systems(seed):
    sys = next(random_systems(1, seed, max_states=7, alphabet_size=3))
    assert _round_trips(sys)


def test_round_trip_exhaustive_small():
    for sys in exhaustive_systems(3, 2):
        assert _round_trips(sys)


def test_diagnostics_are_deterministic():
    text = "alphabet {a,b}\ntype X = !a.\n"
    msgs = set()
    for _ in range(3):
        with pytest.raises(DslSyntaxError) as e:
            parse(text)
        msgs.add(str(e.value))
    assert len(msgs) == 1


def test_corpus_file_is_shipped():
    assert CORPUS.exists()


def test_cycle_hidden_behind_a_named_state_is_named():
    from fairck.core import NIL, Branch, Polarity, SessionSystem
    from fairck.generate import labels_for

    # 4 -> A(1) -> 2 -> 3 -> 2, where only state 1 has a name
    out = Polarity.OUT
    sys = SessionSystem(labels_for(2), [
        NIL, Branch(out, (2, 0)), Branch(out, (3, 0)), Branch(out, (0, 2)), Branch(out, (1, 0)),
    ], {"A": 1})
    text = print_system(sys, root_ref=4, root_name="Root")
    back = load(text)
    merged, off = sys.disjoint_union(back)
    assert bisimilar(merged, 4, back.ref("Root") + off)
