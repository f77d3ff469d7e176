"""Inference-system checkers for fair termination, compliance and subtyping.

Each check builds a :class:`CheckInstance`: the rule (and corule) instances
reachable from the root judgment by premise closure, over which the generic
engine of :mod:`fairck.gis` computes the requested interpretation.

Fair subtyping is the exception on the corule side.  Its corule quantifies
over all traces of the left type missing from the right one, so instead of
materializing instances the bound is computed by :func:`convergence`, a
fixpoint on the synchronized product of the two types.  On regular types the
prefix ``psi`` of that corule can be restricted to common traces: a prefix
that leaves the common part is not a trace of the right type, so its
continuation cannot be defined there.
"""

from __future__ import annotations

from array import array
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from . import kernels
from .core import K_IN, K_NIL, K_OUT, NIL_REF, Polarity, SessionSystem, StateRef
from .gis import RuleInstance, RuleSystem, gen, gen_arrays, gen_within, gfp
from .semantics import Action, Config
from .syntax import describe
from .verdict import DivergenceWitness, Verdict


class TermJudgment(NamedTuple):
    state: StateRef


class CompJudgment(NamedTuple):
    client: StateRef
    server: StateRef


class SubJudgment(NamedTuple):
    left: StateRef
    right: StateRef


def _action(sys: SessionSystem, kind: int, i: int) -> str:
    return ("?" if kind == K_IN else "!") + sys.alphabet.labels[i]


@dataclass
class CheckInstance:
    """A checker's rule systems over the premise-closed universe of ``root``."""

    check: str
    mode: str
    sys: SessionSystem
    root: object
    rules: RuleSystem
    corules: RuleSystem | None = None
    bound: frozenset | None = None
    convergence: Convergence | None = None
    show: Callable[[object], str] = field(default=str, repr=False)
    _members: frozenset | None = field(default=None, repr=False)

    @property
    def fair(self) -> bool:
        return self.mode == "fair"

    def members(self) -> frozenset:
        """The interpretation this check is defined by."""
        if self._members is None:
            if self.bound is not None:
                self._members = gen_within(self.rules, self.bound)
            elif self.corules is not None:
                self._members = gen(self.rules, self.corules)
            else:
                self._members = gfp(self.rules)
        return self._members

    def holds(self) -> bool:
        return self.root in self.members()

    def verdict(self) -> Verdict:
        return Verdict(self.holds(), judgment=self.show(self.root))


def _close(root, expand) -> tuple[list, list[RuleInstance], list[RuleInstance]]:
    universe, seen = [root], {root}
    rules: list[RuleInstance] = []
    corules: list[RuleInstance] = []
    head = 0
    while head < len(universe):
        rs, cs = expand(universe[head])
        head += 1
        for r in rs + cs:
            for p in r.premises:
                if p not in seen:
                    seen.add(p)
                    universe.append(p)
        rules.extend(rs)
        corules.extend(cs)
    return universe, rules, corules


# ---------------------------------------------------------------------------
# fair termination


def termination_instance(sys: SessionSystem, s: StateRef) -> CheckInstance:
    kinds, conts, doms = sys._kind, sys._cont, sys._dom
    every = range(len(sys.alphabet))

    def expand(j: TermJudgment):
        k = kinds[j.state]
        if k == K_NIL:
            return [RuleInstance("t-nil", j)], []
        cont = conts[j.state]
        labels = tuple(_action(sys, k, i) for i in every)
        rule = RuleInstance("t-all", j, tuple(TermJudgment(t) for t in cont), edge_labels=labels)
        co = [
            RuleInstance("t-any", j, (TermJudgment(cont[i]),), detail=labels[i], edge_labels=(labels[i],))
            for i in doms[j.state]
        ]
        return [rule], co

    root = TermJudgment(s)
    universe, rules, corules = _close(root, expand)
    return CheckInstance(
        "term", "fair", sys, root, RuleSystem(universe, rules), RuleSystem(universe, corules),
        show=lambda j: f"terminates({describe(sys, j.state)})",
    )


def fair_termination(sys: SessionSystem, s: StateRef) -> Verdict:
    return termination_instance(sys, s).verdict()


# ---------------------------------------------------------------------------
# compliance


def compliance_instance(sys: SessionSystem, c0: Config, fair: bool) -> CheckInstance:
    kinds, conts, doms = sys._kind, sys._cont, sys._dom

    def expand(j: CompJudgment):
        c, s = j
        kc, ks = kinds[c], kinds[s]
        rules: list[RuleInstance] = []
        if kc == K_OUT and not doms[c]:
            if ks != K_NIL:
                rules.append(RuleInstance("c-success", j))
            return rules, []
        if kc == K_NIL or ks == K_NIL or kc == ks:
            return rules, []
        # the sender chooses the message; labels are the server's actions
        sender = doms[s] if ks == K_OUT else doms[c]
        if not sender:
            return rules, []
        cc, cs = conts[c], conts[s]
        prems = tuple(CompJudgment(cc[i], cs[i]) for i in sender)
        acts = tuple(_action(sys, ks, i) for i in sender)
        name = "c-inp-out" if kc == K_IN else "c-out-inp"
        rules.append(RuleInstance(name, j, prems, edge_labels=acts))
        co = []
        if fair:
            co = [
                RuleInstance("c-sync", j, (p,), detail=_action(sys, kc, i), edge_labels=(a,))
                for i, p, a in zip(sender, prems, acts)
            ]
        return rules, co

    root = CompJudgment(*c0)
    universe, rules, corules = _close(root, expand)
    return CheckInstance(
        "comp", "fair" if fair else "safety", sys, root, RuleSystem(universe, rules),
        RuleSystem(universe, corules) if fair else None,
        show=lambda j: f"complies({describe(sys, j.client)}, {describe(sys, j.server)})",
    )


def compliance(sys: SessionSystem, c0: Config) -> Verdict:
    return compliance_instance(sys, c0, fair=False).verdict()


def fair_compliance(sys: SessionSystem, c0: Config) -> Verdict:
    return compliance_instance(sys, c0, fair=True).verdict()


def compliance_batch(sys: SessionSystem, configs: list[Config]) -> tuple[list[bool], list[bool]]:
    """Decide compliance and fair compliance of many configurations at once.

    The rules and corules of :func:`compliance_instance` are instantiated over
    the union of the premise closures, straight into the compressed form the
    kernels read, and interpreted once per mode.  Membership of a judgment
    depends only on its own premise closure, so every answer equals the
    single-root verdict.  Returns the safety and the fair verdicts, in order.
    """
    kinds, conts, doms = sys._kind, sys._cont, sys._dom
    n = len(kinds)
    index: dict[int, int] = {}
    keys: list[int] = []
    concl, ptr, prems = array("i"), array("i", [0]), array("i")
    c_concl, c_ptr, c_prems = array("i"), array("i", [0]), array("i")
    add_concl, add_ptr = concl.append, ptr.append
    add_key, lookup = keys.append, index.get

    roots = []
    for c, s in configs:
        k = c * n + s
        if k not in index:
            index[k] = len(keys)
            add_key(k)
        roots.append(index[k])
    j = 0
    while j < len(keys):
        c, s = divmod(keys[j], n)
        kc, ks = kinds[c], kinds[s]
        if kc == K_OUT and not doms[c]:
            if ks != K_NIL:  # c-success
                add_concl(j)
                add_ptr(len(prems))
        elif kc != K_NIL and ks != K_NIL and kc != ks:
            sender = doms[s] if ks == K_OUT else doms[c]
            if sender:
                cc, cs = conts[c], conts[s]
                ps = []
                for i in sender:
                    k = cc[i] * n + cs[i]
                    p = lookup(k)
                    if p is None:
                        p = index[k] = len(keys)
                        add_key(k)
                    ps.append(p)
                add_concl(j)  # c-inp-out / c-out-inp
                prems.extend(ps if len(set(ps)) == len(ps) else dict.fromkeys(ps))
                add_ptr(len(prems))
                for p in ps:  # c-sync, one per label
                    c_concl.append(j)
                    c_prems.append(p)
                    c_ptr.append(len(c_prems))
        j += 1
    m = len(keys)
    safe, _ = kernels.gfp(m, concl, ptr, prems, None)
    fair = gen_arrays(m, (concl, ptr, prems), (c_concl, c_ptr, c_prems))
    return [bool(safe[j]) for j in roots], [bool(fair[j]) for j in roots]


# ---------------------------------------------------------------------------
# subtyping


def _sub_rules(sys: SessionSystem):
    kinds, conts, doms = sys._kind, sys._cont, sys._dom

    def expand(j: SubJudgment):
        a, b = j
        ka, kb = kinds[a], kinds[b]
        if ka == K_NIL:
            return [RuleInstance("s-nil", j)], []
        if not doms[a]:
            return ([RuleInstance("s-end", j)] if kb != K_NIL else []), []
        if ka != kb:
            return [], []
        da, db = doms[a], doms[b]
        if ka == K_IN:
            over, name = da, "s-inp"
            ok = set(da) <= set(db)
        else:
            over, name = db, "s-out"
            ok = bool(db) and set(db) <= set(da)
        if not ok:
            return [], []
        ca, cb = conts[a], conts[b]
        prems = tuple(SubJudgment(ca[i], cb[i]) for i in over)
        return [RuleInstance(name, j, prems, edge_labels=tuple(_action(sys, ka, i) for i in over))], []

    return expand


def is_sub_axiom(sys: SessionSystem, j: SubJudgment) -> bool:
    """Conclusion of ``s-nil`` or ``s-end``."""
    a, b = j
    return sys._kind[a] == K_NIL or (not sys._dom[a] and sys._kind[b] != K_NIL)


def subtyping_instance(sys: SessionSystem, t: StateRef, s: StateRef, fair: bool) -> CheckInstance:
    root = SubJudgment(t, s)
    universe, rules, _ = _close(root, _sub_rules(sys))
    inst = CheckInstance(
        "sub", "fair" if fair else "safety", sys, root, RuleSystem(universe, rules),
        show=lambda j: f"subtype({describe(sys, j.left)}, {describe(sys, j.right)})",
    )
    if fair:
        conv = convergence(sys, t, s)
        inst.convergence = conv
        inst.bound = frozenset(j for j in universe if is_sub_axiom(sys, j) or conv.contains(j.left, j.right))
    return inst


def subtyping(sys: SessionSystem, t: StateRef, s: StateRef) -> Verdict:
    return subtyping_instance(sys, t, s, fair=False).verdict()


def fair_subtyping(sys: SessionSystem, t: StateRef, s: StateRef) -> Verdict:
    return subtyping_instance(sys, t, s, fair=True).verdict()


# ---------------------------------------------------------------------------
# convergence on the synchronized product


@dataclass
class ProductGraph:
    """Pairs of residuals after common traces, in BFS order from the root.

    ``edges[n]`` lists the shared trace actions of node ``n`` with their
    targets; ``escapes[n]`` the actions of the left residual that the right
    one lacks.
    """

    sys: SessionSystem
    nodes: list[tuple[int, int]]
    index: dict[tuple[int, int], int]
    edges: list[list[tuple[Action, int]]]
    escapes: list[tuple[Action, ...]]

    def __len__(self) -> int:
        return len(self.nodes)

    def csr(self, reverse: bool = False) -> tuple[list[int], list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for u, out in enumerate(self.edges):
            for _, v in out:
                (adj[v] if reverse else adj[u]).append(v if not reverse else u)
        ptr, flat = [0], []
        for row in adj:
            flat.extend(row)
            ptr.append(len(flat))
        return ptr, flat


def product_graph(sys: SessionSystem, t: StateRef, s: StateRef) -> ProductGraph:
    if t == NIL_REF or s == NIL_REF:
        raise ValueError("product graph needs two non-nil roots")
    kinds, conts, doms, labels = sys._kind, sys._cont, sys._dom, sys.alphabet.labels
    nodes, index, edges, escapes = [(t, s)], {(t, s): 0}, [], []
    head = 0
    while head < len(nodes):
        a, b = nodes[head]
        head += 1
        ka, kb = kinds[a], kinds[b]
        pol = Polarity.IN if ka == K_IN else Polarity.OUT
        right = set(doms[b]) if ka == kb else set()
        out, esc = [], []
        for i in doms[a]:
            act = Action(pol, labels[i])
            if i not in right:
                esc.append(act)
                continue
            nxt = (conts[a][i], conts[b][i])
            k = index.get(nxt)
            if k is None:
                k = index[nxt] = len(nodes)
                nodes.append(nxt)
            out.append((act, k))
        edges.append(out)
        escapes.append(tuple(esc))
    return ProductGraph(sys, nodes, index, edges, escapes)


@dataclass
class Convergence:
    """Least set of product nodes closed under the convergence condition.

    ``level[n]`` is the first iteration in which node ``n`` entered the set
    (-1 when it never does).  Level 0 holds the nodes from which no escape is
    reachable, i.e. where trace inclusion holds.
    """

    graph: ProductGraph | None
    level: list[int]
    trivial: bool | None = None  # set when a root is nil and no graph exists

    def contains(self, t: StateRef, s: StateRef) -> bool:
        if t == NIL_REF:
            return True
        if self.graph is None or s == NIL_REF:
            return False
        n = self.graph.index.get((t, s))
        return n is not None and self.level[n] >= 0



def convergence(sys: SessionSystem, t: StateRef, s: StateRef) -> Convergence:
    if t == NIL_REF:
        return Convergence(None, [], trivial=True)
    if s == NIL_REF:
        return Convergence(None, [], trivial=False)
    g = product_graph(sys, t, s)
    n = len(g)
    ptr, flat = g.csr(reverse=True)
    escape_nodes = [u for u in range(n) if g.escapes[u]]
    level = [-1] * n
    reach, _ = kernels.bfs(n, ptr, flat, escape_nodes)
    for u in range(n):
        if not reach[u]:
            level[u] = 0
    k = 0
    while True:
        k += 1
        good = conv_good(g, level)
        reach, _ = kernels.bfs(n, ptr, flat, escape_nodes, good)
        grew = False
        for u in range(n):
            if level[u] < 0 and (good[u] or not reach[u]):
                level[u] = k
                grew = True
        if not grew:
            return Convergence(g, level)


def conv_good(g: ProductGraph, level: list[int], below: int | None = None) -> bytearray:
    """Nodes with a shared output into the set (restricted to levels < ``below``)."""
    def inside(v):
        return level[v] >= 0 and (below is None or level[v] < below)

    return bytearray(
        1 if any(a.polarity is Polarity.OUT and inside(v) for a, v in g.edges[u]) else 0 for u in range(len(g))
    )


def converges(sys: SessionSystem, t: StateRef, s: StateRef) -> Verdict:
    conv = convergence(sys, t, s)
    judgment = f"converges({describe(sys, t)}, {describe(sys, s)})"
    if conv.contains(t, s):
        return Verdict(True, judgment=judgment)
    return Verdict(False, divergence_witness(conv, t, s, ()), judgment)


def escape_path(conv: Convergence, node: int) -> tuple[Action, ...]:
    """Shortest route from a non-converging node to a missing action.

    The route avoids every node with a shared output into the convergence
    set, which is what keeps ``node`` outside it.  Ties are broken in
    alphabet order.
    """
    g = conv.graph
    good = conv_good(g, conv.level)
    parent: dict[int, tuple[int, Action] | None] = {node: None}
    queue = deque([node])
    while queue:
        u = queue.popleft()
        if g.escapes[u]:
            path = [g.escapes[u][0]]
            while parent[u] is not None:
                u, a = parent[u]
                path.append(a)
            return tuple(reversed(path))
        for a, v in g.edges[u]:
            if v not in parent and not good[v]:
                parent[v] = (u, a)
                queue.append(v)
    raise ValueError("node converges")


def divergence_witness(conv: Convergence, t: StateRef, s: StateRef, prefix: tuple[str, ...]) -> DivergenceWitness:
    g = conv.graph
    sys = g.sys if g is not None else None
    if g is None:
        # non-nil left against nil right: the empty trace already escapes
        return DivergenceWitness((t, s), "", prefix, (), "the right-hand type is nil")
    node = g.index[(t, s)]
    esc = escape_path(conv, node)
    desc = f"({describe(sys, t)}, {describe(sys, s)})"
    note = (
        f"after {'.'.join(map(str, esc[:-1])) or 'the empty trace'} the left type can do {esc[-1]}"
        " but the right one cannot, and no shared output along the way leads to a converging pair"
    )
    return DivergenceWitness((t, s), desc, prefix, tuple(str(a) for a in esc), note)
