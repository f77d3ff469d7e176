"""Evidence for verdicts: derivations, counterexamples and discriminating clients.

:func:`explain` turns a checker run into a witness; :func:`replay` re-validates
a witness independently of how it was produced.  :func:`strategy_clients`
enumerates the client space that :func:`synth_discriminating_client` searches.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from typing import Callable, Iterator

from . import checkers
from .checkers import CheckInstance, SubJudgment, conv_good, divergence_witness
from .core import K_IN, K_NIL, K_OUT, NIL_REF, Branch, Polarity, SessionSystem, StateRef, end_state
from .errors import FairckError, Inapplicable, NotFound
from .gis import coinductive_tree, lfp, lfp_full
from .semantics import (
    Action,
    Config,
    describe_config,
    is_trace,
    oracle_compliance,
    oracle_fair_compliance,
    oracle_fair_termination,
    reduce,
    step,
    stuck_reason,
)
from .syntax import describe, print_system
from .verdict import ClientSpec, DerivationTree, DerivationWitness, DivergenceWitness, TracePath, Witness

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# explain


def instance_for(check: Callable | str, sys: SessionSystem, *args) -> CheckInstance:
    """Build the checker instance behind ``check`` (a checker function or its name)."""
    name = check if isinstance(check, str) else check.__name__
    if name == "fair_termination":
        return checkers.termination_instance(sys, *args)
    if name in ("compliance", "fair_compliance"):
        return checkers.compliance_instance(sys, Config(*args), fair=name == "fair_compliance")
    if name in ("subtyping", "fair_subtyping"):
        return checkers.subtyping_instance(sys, *args, fair=name == "fair_subtyping")
    raise FairckError(f"no witness support for {name!r}")


def explain(check: Callable | str, sys: SessionSystem, *args) -> Witness:
    if (check if isinstance(check, str) else check.__name__) == "converges":
        return explain_convergence(sys, *args)
    return explain_instance(instance_for(check, sys, *args))


def explain_instance(inst: CheckInstance) -> Witness:
    if inst.holds():
        co = coinductive_tree(inst.rules, inst.members(), inst.root, inst.show)
        bounding = None
        if inst.check == "sub" and inst.fair:
            bounding = convergence_tree(inst.convergence, inst.root.left, inst.root.right, inst.show)
        elif inst.fair:
            bounding = lfp_full(inst.corules | inst.rules).tree(inst.root, inst.show)
        return DerivationWitness(co, bounding)
    return _failure(inst)


def _failure(inst: CheckInstance) -> Witness:
    sys, rules = inst.sys, inst.rules
    if inst.check == "term":
        bound = lfp(inst.corules | rules)

        def bad(j):
            return j not in bound
    elif inst.check == "comp" and inst.fair:
        bound = lfp(inst.corules | rules)

        def bad(j):
            return j not in bound
    elif inst.check == "sub" and inst.fair and inst.root in checkers.gfp(rules):
        bound = inst.bound

        def bad(j):
            return j not in bound
    else:
        def bad(j):
            return not rules.rules_for(j)

    j, trace, path = _first_on_premise_paths(inst, bad)
    if inst.check == "term":
        return TracePath(trace, describe(sys, j.state), "no maximal trace extends this residual", path)
    if inst.check == "comp":
        reason = "no successful configuration is reachable" if inst.fair else "stuck: " + stuck_reason(sys, Config(*j))
        return TracePath(trace, describe_config(sys, Config(*j)), reason, path)
    if not rules.rules_for(j):
        return TracePath(trace, _pair(sys, j), sub_failure_reason(sys, j), path)
    return divergence_witness(inst.convergence, j.left, j.right, trace)


def _first_on_premise_paths(inst: CheckInstance, bad) -> tuple[object, tuple[str, ...], tuple]:
    """Breadth-first search along premises of the (unique) rule of each judgment."""
    rules = inst.rules
    parent: dict = {inst.root: None}
    queue = deque([inst.root])
    while queue:
        j = queue.popleft()
        if bad(j):
            trace, path = [], [j]
            while parent[j] is not None:
                j, label = parent[j]
                trace.append(label)
                path.append(j)
            return path[0], tuple(reversed(trace)), tuple(reversed(path))
        for r in rules.rules_for(j):
            for p, label in zip(r.premises, r.edge_labels):
                if p not in parent:
                    parent[p] = (j, label)
                    queue.append(p)
    raise FairckError("no offending judgment below the root; the check holds")


def _pair(sys: SessionSystem, j) -> str:
    return f"({describe(sys, j[0])}, {describe(sys, j[1])})"


def sub_failure_reason(sys: SessionSystem, j: SubJudgment) -> str:
    """Which side condition of the subtyping rules fails at ``j``."""
    a, b = j
    labels = sys.alphabet.labels
    if sys._kind[b] == K_NIL:
        return "the right-hand type is nil"
    if sys._kind[a] != sys._kind[b]:
        return "the two types have different polarities"
    da, db = set(sys._dom[a]), set(sys._dom[b])
    if sys._kind[a] == K_IN:
        x = min(da - db)
        return f"the right-hand type does not accept ?{labels[x]}"
    if not db:
        return "the right-hand type sends nothing"
    x = min(db - da)
    return f"the right-hand type may send !{labels[x]}, which the left one never sends"


# ---------------------------------------------------------------------------
# convergence evidence


def explain_convergence(sys: SessionSystem, t: StateRef, s: StateRef) -> Witness:
    conv = checkers.convergence(sys, t, s)
    show = lambda j: f"converges({describe(sys, j.left)}, {describe(sys, j.right)})"  # noqa: E731
    if conv.contains(t, s):
        return DerivationWitness(None, convergence_tree(conv, t, s, show))
    return divergence_witness(conv, t, s, ())


def convergence_tree(conv: checkers.Convergence, t: StateRef, s: StateRef, show=str) -> DerivationTree:
    """Well-founded derivation of ``(t, s)`` by the convergence corule alone.

    A node of level 0 has no premises (its traces are all traces of the right
    type).  A node of level ``k`` takes as premises, for every route towards
    a missing action, the pair reached by the first shared output into a
    lower level; ``detail`` lists those outputs as traces from the node.
    """
    root = SubJudgment(t, s)
    if conv.graph is None:
        return DerivationTree(show(root), "s-converge", raw=root)
    g = conv.graph
    expanded: set[int] = set()

    def build(n: int) -> DerivationTree:
        j = SubJudgment(*g.nodes[n])
        if n in expanded:
            return DerivationTree(show(j), "", back_edge=True, raw=j)
        expanded.add(n)
        picks = _converge_premises(conv, n)
        detail = ", ".join(".".join(map(str, tr)) for tr, _ in picks)
        children = tuple(build(v) for v in dict.fromkeys(v for _, v in picks))
        name = "s-converge"
        return DerivationTree(show(j), f"{name}({detail})" if detail else name, children, raw=j)

    return build(g.index[(t, s)])


def _converge_premises(conv: checkers.Convergence, n: int) -> list[tuple[tuple[Action, ...], int]]:
    g, level = conv.graph, conv.level
    k = level[n]
    if k <= 0:
        return []
    good = conv_good(g, level, below=k)

    def pick(u):
        return next((a, v) for a, v in g.edges[u] if a.polarity is Polarity.OUT and 0 <= level[v] < k)

    if good[n]:
        a, v = pick(n)
        return [((a,), v)]
    # first Good nodes met on routes that can still reach a missing action
    escapable = _can_escape(g)
    parent = {n: None}
    queue = deque([n])
    out = []
    while queue:
        u = queue.popleft()
        if good[u]:
            if escapable[u]:
                a, v = pick(u)
                tr = [a]
                w = u
                while parent[w] is not None:
                    w, b = parent[w]
                    tr.append(b)
                out.append((tuple(reversed(tr)), v))
            continue
        for a, v in g.edges[u]:
            if v not in parent:
                parent[v] = (u, a)
                queue.append(v)
    return out


def _can_escape(g: checkers.ProductGraph) -> list[bool]:
    from . import kernels

    ptr, flat = g.csr(reverse=True)
    seen, _ = kernels.bfs(len(g), ptr, flat, [u for u in range(len(g)) if g.escapes[u]])
    return [bool(x) for x in seen]


# ---------------------------------------------------------------------------
# replay


def replay(witness: Witness, inst: CheckInstance) -> bool:
    """Re-validate ``witness`` against the judgment of ``inst``.

    Derivations are checked rule by rule against the instance's rule systems
    (the convergence corule against its side condition); counterexamples are
    re-run step by step on the transition and reduction relations and their
    endpoint is confirmed by a semantic oracle.
    """
    sys = inst.sys
    if isinstance(witness, DerivationWitness):
        if not inst.holds():
            return False
        ok = witness.coinductive is not None and witness.coinductive.raw == inst.root
        ok = ok and _valid_tree(witness.coinductive, lambda j: inst.rules.rules_for(j), well_founded=False)
        if inst.fair:
            b = witness.bounding
            if b is None or b.raw != inst.root:
                return False
            if inst.check == "sub":
                ok = ok and _valid_tree(b, None, well_founded=True, converge=inst)
            else:
                union = inst.corules | inst.rules
                ok = ok and _valid_tree(b, union.rules_for, well_founded=True)
        return ok
    if isinstance(witness, TracePath):
        return not inst.holds() and _replay_trace(witness, inst)
    if isinstance(witness, DivergenceWitness):
        if inst.holds() or inst.check != "sub":
            return False
        t, s = witness.node
        a, b = inst.root
        for text in witness.prefix:
            act = Action.parse(text)
            a, b = step(sys, a, act), step(sys, b, act)
            if a is None or b is None:
                return False
        if (a, b) != (t, s):
            return False
        if checkers.converges(sys, t, s).holds:
            return False
        if t != NIL_REF and s == NIL_REF:
            return True
        esc = [Action.parse(x) for x in witness.escape_trace]
        return is_trace(sys, t, esc) and not is_trace(sys, s, esc)
    if isinstance(witness, ClientSpec):
        return replay_client(witness, inst.root.left, inst.root.right, sys)
    return False


def _valid_tree(tree: DerivationTree, rules_for, well_founded: bool, converge: CheckInstance | None = None) -> bool:
    expanded: set = set()
    leaves: list[tuple[object, frozenset]] = []

    def walk(node: DerivationTree, ancestors: frozenset) -> bool:
        j = node.raw
        if node.back_edge:
            leaves.append((j, ancestors))
            return True
        if j in expanded:
            return False  # expanded twice: not the shared form
        expanded.add(j)
        prems = tuple(c.raw for c in node.children)
        if converge is not None:
            ok = node.rule.startswith("s-converge") and _converge_step_ok(converge, j, set(prems))
        else:
            ok = any(r.label == node.rule and tuple(dict.fromkeys(r.premises)) == prems for r in rules_for(j))
        ok = ok and all(walk(c, ancestors | {j}) for c in node.children)
        return ok

    if not walk(tree, frozenset()):
        return False
    for j, ancestors in leaves:
        if j not in expanded:
            return False
        if well_founded and j in ancestors:
            return False
    return True


def _converge_step_ok(inst: CheckInstance, j: SubJudgment, prems: set) -> bool:
    """The convergence side condition at ``j`` with premise set ``prems``."""
    conv = inst.convergence
    if j.left == NIL_REF:
        return True
    g = conv.graph
    if g is None or (j.left, j.right) not in g.index:
        return False
    targets = {g.index[(p.left, p.right)] for p in prems if (p.left, p.right) in g.index}
    good = [any(a.polarity is Polarity.OUT and v in targets for a, v in g.edges[u]) for u in range(len(g))]
    start = g.index[(j.left, j.right)]
    seen, queue = {start}, deque([start])
    while queue:
        u = queue.popleft()
        if good[u]:
            continue
        if g.escapes[u]:
            return False
        for _, v in g.edges[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return True


def _replay_trace(w: TracePath, inst: CheckInstance) -> bool:
    sys = inst.sys
    acts = [Action.parse(x) for x in w.trace]
    if inst.check == "term":
        s = inst.root.state
        for a in acts:
            s = step(sys, s, a)
            if s is None or s == NIL_REF:
                return False
        return not oracle_fair_termination(sys, s).holds
    if inst.check == "comp":
        c = Config(*inst.root)
        for a in acts:
            nxt = dict(reduce(sys, c))
            if a not in nxt:
                return False
            c = nxt[a]
        if inst.fair:
            return not oracle_fair_compliance(sys, c).holds
        return not reduce(sys, c) and not oracle_compliance(sys, c).holds
    a_state, b_state = inst.root
    for a in acts:
        a_state, b_state = step(sys, a_state, a), step(sys, b_state, a)
        if a_state is None or b_state is None:
            return False
    return not inst.rules.rules_for(SubJudgment(a_state, b_state)) and not checkers.is_sub_axiom(
        sys, SubJudgment(a_state, b_state)
    )


# ---------------------------------------------------------------------------
# strategy clients


def _subsets(xs: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [c for k in range(1, len(xs) + 1) for c in itertools.combinations(xs, k)]


def strategy_shapes(sys: SessionSystem, t: StateRef, nodes: int) -> Iterator[list[tuple[int, dict[int, int]]]]:
    """Client shapes with exactly ``nodes`` nodes that follow the protocol of ``t``.

    A client node shadows one state ``q`` of ``t``.  Where ``q`` receives, the
    node sends a non-empty subset of ``dom(q)``; where ``q`` sends, the node
    receives every label of ``dom(q)``.  Each of its continuations is ``end!``
    (encoded as ``-1``), an earlier node shadowing the same state, or the next
    fresh node.  Nodes are numbered in creation order, so every shape
    appears once (a larger shape may still unroll a smaller one).  A shape
    is a list of ``(label subset or dom, successor map)`` per node; node
    ``i`` shadows ``owners[i]``.
    """
    kinds, conts, doms = sys._kind, sys._cont, sys._dom
    if nodes < 1 or kinds[t] == K_NIL:
        return
    owners = [t]
    shape: list[tuple[int, dict[int, int]]] = []

    def fill(i: int):
        if i == len(owners):
            if len(owners) == nodes:
                yield [(owners[k], dict(succ)) for k, (_, succ) in enumerate(shape)]
            return
        q = owners[i]
        if kinds[q] == K_IN:
            options = _subsets(doms[q])
        else:
            options = [doms[q]]
        for labels in options:
            yield from edges(i, q, labels, 0, {})

    def edges(i: int, q: int, labels, k: int, succ: dict[int, int]):
        if k == len(labels):
            shape.append((q, succ))
            yield from fill(i + 1)
            shape.pop()
            return
        x = labels[k]
        target = conts[q][x]
        choices = [-1] + [n for n in range(len(owners)) if owners[n] == target]
        for c in choices:
            succ[x] = c
            yield from edges(i, q, labels, k + 1, succ)
            del succ[x]
        if len(owners) < nodes and kinds[target] != K_NIL and (kinds[target] == K_OUT or doms[target]):
            owners.append(target)
            succ[x] = len(owners) - 1
            yield from edges(i, q, labels, k + 1, succ)
            del succ[x]
            owners.pop()

    yield from fill(0)


def build_client(sys: SessionSystem, shape) -> tuple[SessionSystem, StateRef]:
    """Append a client shape to ``sys``; returns the extended system and client root."""
    ext, (root,) = build_clients(sys, [shape])
    return ext, root


def build_clients(sys: SessionSystem, shapes) -> tuple[SessionSystem, list[StateRef]]:
    """Append many client shapes to ``sys`` at once, sharing one ``end!`` state.

    Returns the extended system and the root of each client, in order; the
    empty shape is the bare ``end!`` client.
    """
    sys, win = end_state(sys, Polarity.OUT)
    width = len(sys.alphabet)
    kinds = sys._kind
    extra: list[Branch] = []
    roots = []
    base = len(sys.states)
    for shape in shapes:
        if not shape:
            roots.append(win)
            continue
        roots.append(base)
        for q, succ in shape:
            pol = Polarity.OUT if kinds[q] == K_IN else Polarity.IN
            cont = [NIL_REF] * width
            for x, n in succ.items():
                cont[x] = win if n < 0 else base + n
            extra.append(Branch(pol, tuple(cont)))
        base += len(shape)
    if not extra:
        return sys, roots
    return SessionSystem(sys.alphabet, sys.states + tuple(extra), sys.names, _trusted=True), roots


def strategy_clients(sys: SessionSystem, t: StateRef, max_nodes: int) -> Iterator[tuple[SessionSystem, StateRef]]:
    """All strategy clients of ``t`` with at most ``max_nodes`` nodes, smallest first.

    The first candidate is the bare ``end!`` client (no nodes).
    """
    yield build_client(sys, [])
    for m in range(1, max_nodes + 1):
        for shape in strategy_shapes(sys, t, m):
            yield build_client(sys, shape)


def strategy_client_system(sys: SessionSystem, t: StateRef, max_nodes: int) -> tuple[SessionSystem, list[StateRef]]:
    """The clients of :func:`strategy_clients`, built into a single system.

    Returns the extended system and the client roots in enumeration order;
    suited to :func:`fairck.checkers.compliance_batch`.
    """
    shapes = [[]] + [shape for m in range(1, max_nodes + 1) for shape in strategy_shapes(sys, t, m)]
    return build_clients(sys, shapes)


def replay_client(w: ClientSpec, t: StateRef, s: StateRef, sys: SessionSystem | None = None) -> bool:
    """The client's two-sided contract, confirmed by checker and oracle alike."""
    ext, r = w.system, w.root
    if sys is not None and ext.states[: len(sys.states)] != sys.states:
        return False
    return (
        checkers.fair_compliance(ext, Config(r, t)).holds
        and oracle_fair_compliance(ext, Config(r, t)).holds
        and not checkers.fair_compliance(ext, Config(r, s)).holds
        and not oracle_fair_compliance(ext, Config(r, s)).holds
    )


def synth_discriminating_client(
    sys: SessionSystem, t: StateRef, s: StateRef, budget: int = 64, max_candidates: int = 200_000
) -> ClientSpec:
    """A client fairly compliant with ``t`` but not with ``s``.

    Searches :func:`strategy_clients` of ``t`` up to ``budget`` nodes (and at
    most ``max_candidates`` candidates), smallest first.  Raises
    :class:`Inapplicable` unless ``t`` is a subtype but not a fair subtype of
    ``s``, and :class:`NotFound` when the search space is exhausted.
    """
    if not checkers.subtyping(sys, t, s).holds:
        raise Inapplicable("not a subtype: a discriminating client only exists between subtypes")
    if checkers.fair_subtyping(sys, t, s).holds:
        raise Inapplicable("already a fair subtype: no client can tell the two types apart")
    for n, (ext, r) in enumerate(strategy_clients(sys, t, budget)):
        if n >= max_candidates:
            break
        if checkers.fair_compliance(ext, Config(r, t)).holds and not checkers.fair_compliance(ext, Config(r, s)).holds:
            name = "C"
            while name in ext.names:
                name += "'"
            spec = ClientSpec(ext, r, print_system(ext, root_ref=r, root_name=name))
            if not replay_client(spec, t, s, sys):
                raise FairckError("synthesized client failed re-verification")
            return spec
        if n and n % 10_000 == 0:
            log.debug("discriminating client search: %d candidates tried", n)
    log.warning("no discriminating client within %d nodes / %d candidates", budget, max_candidates)
    raise NotFound(f"no discriminating client within {budget} nodes and {max_candidates} candidates")
