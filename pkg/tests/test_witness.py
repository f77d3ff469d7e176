import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairck import checkers
from fairck.core import bisimilar
from fairck.errors import Inapplicable, NotFound
from fairck.generate import random_systems
from fairck.semantics import Config, oracle_compliance, oracle_fair_compliance, oracle_fair_termination
from fairck.verdict import ClientSpec, DerivationWitness, DivergenceWitness, TracePath
from fairck.witness import (
    explain,
    explain_convergence,
    instance_for,
    replay,
    replay_client,
    strategy_clients,
    strategy_shapes,
    synth_discriminating_client,
)

CASES = [
    ("fair_termination", ("T1",)),
    ("fair_termination", ("R",)),
    ("fair_termination", ("Rp",)),
    ("compliance", ("R2", "S2")),
    ("compliance", ("Ask", "Take")),
    ("fair_compliance", ("R2", "T2")),
    ("fair_compliance", ("R2", "S2")),
    ("subtyping", ("T2", "S2")),
    ("subtyping", ("Z", "N")),
    ("fair_subtyping", ("T1", "S1")),
    ("fair_subtyping", ("T2", "S2")),
    ("fair_subtyping", ("T", "S")),
    ("fair_subtyping", ("Z", "N")),
]


def _args(ref, check, names):
    refs = [ref(n) for n in names]
    return refs


@pytest.mark.parametrize("check, names", CASES)
def test_witnesses_replay(named, ref, check, names):
    args = _args(ref, check, names)
    inst = instance_for(check, named, *args)
    w = explain(check, named, *args)
    assert replay(w, inst)
    assert isinstance(w, DerivationWitness) == inst.holds()


def test_fair_compliance_bounding_derivation(named, ref):
    w = explain("fair_compliance", named, ref("R2"), ref("T2"))
    rules = []
    t = w.bounding
    while t.children:
        rules.append(t.rule)
        t = t.children[0]
    rules.append(t.rule)
    assert rules == ["c-sync(!true)", "c-sync(?z)", "c-success"]


def test_unfair_subtyping_yields_divergence(named, ref):
    w = explain("fair_subtyping", named, ref("T2"), ref("S2"))
    assert isinstance(w, DivergenceWitness)
    assert w.escape_trace == ("?true", "!z")


def test_missing_trace_reported_for_plain_subtyping(named, ref):
    w = explain("subtyping", named, ref("Z"), ref("N"))
    assert isinstance(w, TracePath)
    assert "p" in w.reason


def test_convergence_evidence(named, ref):
    assert isinstance(explain_convergence(named, ref("Z"), ref("N")), DerivationWitness)
    assert isinstance(explain_convergence(named, ref("T2"), ref("S2")), DivergenceWitness)


def test_tampered_witness_is_rejected(named, ref):
    inst = instance_for("fair_termination", named, ref("Rp"))
    w = explain("fair_termination", named, ref("Rp"))
    bad = TracePath(("!false",), w.terminal, w.reason, w.path)
    assert not replay(bad, inst)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_failure_witness_matches_oracle_witness(seed):
    sys = next(random_systems(1, seed, max_states=6, alphabet_size=2))
    n = len(sys.states)
    for s in range(n):
        o = oracle_fair_termination(sys, s)
        if not o.holds:
            assert explain("fair_termination", sys, s).trace == o.witness.trace
    for c in range(n):
        for s in range(n):
            for check, oracle in (("compliance", oracle_compliance), ("fair_compliance", oracle_fair_compliance)):
                o = oracle(sys, Config(c, s))
                if not o.holds:
                    w = explain(check, sys, c, s)
                    assert (w.trace, w.reason) == (o.witness.trace, o.witness.reason)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_every_witness_replays_on_random_systems(seed):
    sys = next(random_systems(1, seed, max_states=5, alphabet_size=2))
    n = len(sys.states)
    for a in range(n):
        assert replay(explain("fair_termination", sys, a), instance_for("fair_termination", sys, a))
        for b in range(n):
            for check in ("compliance", "fair_compliance", "subtyping", "fair_subtyping"):
                assert replay(explain(check, sys, a, b), instance_for(check, sys, a, b))


def test_strategy_clients_start_with_end(named, ref):
    ext, r = next(strategy_clients(named, ref("T2"), 3))
    assert ext.polarity(r).value == "!" and not ext._dom[r]


def test_strategy_shapes_are_distinct(named, ref):
    for m in range(1, 4):
        shapes = [repr(s) for s in strategy_shapes(named, ref("T2"), m)]
        assert shapes and len(shapes) == len(set(shapes))


def test_strategy_shapes_count_for_a_single_output_choice(named, ref):
    # Take = ?true.end?: one node sending true, whose continuation must be end!
    assert len(list(strategy_shapes(named, ref("Take"), 1))) == 1
    assert list(strategy_shapes(named, ref("Take"), 2)) == []


def test_synthesis_on_unfair_subtype(named, ref):
    w = synth_discriminating_client(named, ref("T2"), ref("S2"), budget=64)
    assert isinstance(w, ClientSpec)
    assert replay_client(w, ref("T2"), ref("S2"), named)
    merged, off = w.system.disjoint_union(named)
    assert bisimilar(merged, w.root, ref("R2") + off)
    assert w.source.startswith("alphabet {")


@pytest.mark.parametrize("t, s", [("T1", "S1"), ("Z", "N"), ("Nil", "Done")])
def test_synthesis_is_inapplicable(named, ref, t, s):
    with pytest.raises(Inapplicable):
        synth_discriminating_client(named, ref(t), ref(s))


def test_synthesis_reports_exhausted_search(named, ref):
    with pytest.raises(NotFound):
        synth_discriminating_client(named, ref("T2"), ref("S2"), budget=1)


def test_synthesized_clients_discriminate_on_random_pairs():
    found = 0
    for sys in random_systems(150, 7, max_states=5, alphabet_size=2):
        n = len(sys.states)
        for a in range(n):
            for b in range(n):
                if checkers.subtyping(sys, a, b).holds and not checkers.fair_subtyping(sys, a, b).holds:
                    try:
                        w = synth_discriminating_client(sys, a, b, budget=6, max_candidates=20_000)
                    except NotFound:
                        continue
                    found += 1
                    assert replay_client(w, a, b, sys)
    assert found > 0


def test_client_system_matches_one_by_one_construction(named, ref):
    from fairck.witness import strategy_client_system

    ext, roots = strategy_client_system(named, ref("T1"), 3)
    singles = list(strategy_clients(named, ref("T1"), 3))
    assert len(roots) == len(singles)
    for r, (e, r1) in zip(roots, singles):
        merged, off = ext.disjoint_union(e)
        assert bisimilar(merged, r, r1 + off)
