import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairck.errors import FairckError
from fairck.gis import (
    RuleInstance,
    RuleSystem,
    check_bounded_coinduction,
    coinductive_tree,
    gen,
    gen_within,
    gfp,
    inclusion_audit,
    inf_op,
    lfp,
    lfp_full,
    pruning_order,
)


# --- maximum element of the rational colist l = cons 1 l ------------------


def max_elem_system(values=(1, 2)):
    # judgments ("maxElem", v) about the single colist l = cons 1 l
    universe = [("maxElem", v) for v in values]
    rules = [
        RuleInstance("max-cons", ("maxElem", max(1, v)), (("maxElem", v),))
        for v in values
        if max(1, v) in values
    ]
    coaxiom = [RuleInstance("max-head", ("maxElem", 1))]
    return RuleSystem(universe, rules), RuleSystem(universe, coaxiom)


def test_max_elem_distinguishes_interpretations():
    rules, co = max_elem_system()
    assert gfp(rules) == {("maxElem", 1), ("maxElem", 2)}
    assert lfp(rules) == frozenset()
    assert gen(rules, co) == {("maxElem", 1)}


def test_max_elem_bounded_coinduction():
    rules, co = max_elem_system()
    assert check_bounded_coinduction(rules, co, [("maxElem", 1)]).holds
    v = check_bounded_coinduction(rules, co, [("maxElem", 2)])
    assert not v.holds and v.judgment.startswith("unbounded")


def test_max_elem_derivations():
    rules, co = max_elem_system()
    members = gen(rules, co)
    tree = coinductive_tree(rules, members, ("maxElem", 1))
    assert tree.rule == "max-cons"
    assert tree.children[0].back_edge
    bounding = lfp_full(co | rules).tree(("maxElem", 1))
    assert bounding.rule == "max-head" and not bounding.children


# --- basics ------------------------------------------------------------------


def test_rule_system_rejects_judgments_outside_the_universe():
    with pytest.raises(FairckError):
        RuleSystem([1, 2], [RuleInstance("r", 3)])
    with pytest.raises(FairckError):
        RuleSystem([1, 1], [])


def test_union_requires_same_universe():
    with pytest.raises(FairckError):
        RuleSystem([1], []) | RuleSystem([2], [])


def test_rule_label():
    assert RuleInstance("c-sync", 0, (), "!true").label == "c-sync(!true)"
    assert RuleInstance("t-nil", 0).label == "t-nil"


def test_inductive_tree_is_minimal_height():
    # 3 <- 2 <- 1 <- axiom, and a shortcut 3 <- axiom-reachable 1
    rs = RuleSystem(range(4), [
        RuleInstance("a", 1),
        RuleInstance("s", 2, (1,)),
        RuleInstance("s", 3, (2,)),
        RuleInstance("short", 3, (1,)),
    ])
    t = lfp_full(rs).tree(3)
    assert t.rule == "short" and t.children[0].rule == "a"
    assert lfp_full(rs).tree(0) is None


def test_shared_subderivations_are_back_edges():
    rs = RuleSystem(range(4), [
        RuleInstance("a", 0),
        RuleInstance("l", 1, (0,)),
        RuleInstance("r", 2, (0,)),
        RuleInstance("top", 3, (1, 2)),
    ])
    t = lfp_full(rs).tree(3)
    assert not t.children[0].children[0].back_edge
    assert t.children[1].children[0].back_edge


def test_pruning_order_follows_dependencies():
    rs = RuleSystem(range(3), [RuleInstance("r", 1, (0,)), RuleInstance("r", 2, (1,))])
    assert pruning_order(rs) == [0, 1, 2]


# --- properties against naive Kleene iteration ----------------------------


def ref_lfp(rs):
    x = frozenset()
    while True:
        y = inf_op(rs, x)
        if y == x:
            return x
        x = y


def ref_gfp_within(rs, bound):
    x = frozenset(bound)
    while True:
        y = x & inf_op(rs, x)
        if y == x:
            return x
        x = y


@st.composite
def rule_systems(draw, n=6, max_rules=14):
    universe = list(range(n))

    def rule(name):
        return RuleInstance(
            name,
            draw(st.integers(0, n - 1)),
            tuple(sorted(draw(st.sets(st.integers(0, n - 1), max_size=3)))),
        )

    rules = [rule("r") for _ in range(draw(st.integers(0, max_rules)))]
    corules = [rule("co") for _ in range(draw(st.integers(0, 4)))]
    return RuleSystem(universe, rules), RuleSystem(universe, corules)


@settings(max_examples=200, deadline=None)
@given(rule_systems())
def test_fixpoints_match_kleene_iteration(pair):
    rules, co = pair
    assert lfp(rules) == ref_lfp(rules)
    assert gfp(rules) == ref_gfp_within(rules, rules.universe)
    assert gen(rules, co) == ref_gfp_within(rules, ref_lfp(co | rules))


@settings(max_examples=200, deadline=None)
@given(rule_systems())
def test_interpretations_are_ordered(pair):
    rules, co = pair
    g = gen(rules, co)
    assert lfp(rules) <= g <= gfp(rules)
    assert g <= lfp(co | rules)
    assert inf_op(rules, g) >= g  # post-fixed point


@settings(max_examples=150, deadline=None)
@given(rule_systems(), rule_systems())
def test_interpretations_are_monotone_in_the_rules(a, b):
    (r1, c1), (r2, c2) = a, b
    r12, c12 = r1 | r2, c1 | c2
    assert lfp(r1) <= lfp(r12)
    assert gfp(r1) <= gfp(r12)
    assert gen(r1, c1) <= gen(r12, c12)


@settings(max_examples=200, deadline=None)
@given(rule_systems(), st.sets(st.integers(0, 5)))
def test_bounded_coinduction_is_sound(pair, candidate):
    rules, co = pair
    g = gen(rules, co)
    assert check_bounded_coinduction(rules, co, g).holds
    if check_bounded_coinduction(rules, co, candidate).holds:
        assert candidate <= g


@settings(max_examples=150, deadline=None)
@given(rule_systems(), st.sets(st.integers(0, 5)))
def test_gen_within_matches_reference(pair, bound):
    rules, _ = pair
    assert gen_within(rules, bound) == ref_gfp_within(rules, bound)


@settings(max_examples=150, deadline=None)
@given(rule_systems())
def test_trees_only_use_member_premises(pair):
    rules, co = pair
    members = gen(rules, co)
    for j in members:
        seen = []
        stack = [coinductive_tree(rules, members, j, show=repr)]
        while stack:
            t = stack.pop()
            assert t.raw in members
            if not t.back_edge:
                seen.append(t.raw)
                stack.extend(t.children)
        assert len(seen) == len(set(seen))
    ind = lfp_full(rules)
    for j in ind.members:
        t = ind.tree(j)
        assert t is not None and t.raw == j


@settings(max_examples=100, deadline=None)
@given(rule_systems())
def test_audit_records_every_generalized_interpretation(pair):
    rules, co = pair
    with inclusion_audit() as audit:
        gen(rules, co)
        gen_within(rules, lfp(co | rules))
    assert audit.checked == 2 and not audit.violations
