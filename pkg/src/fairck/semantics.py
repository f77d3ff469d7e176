"""Transitions, traces, session reduction and the brute-force semantic oracles.

The oracles decide fair termination, compliance and fair compliance straight
from their reachability definitions, by breadth-first search over finite
graphs.  They share no code with the inference-system engine in :mod:`fairck.gis`
and serve as its independent cross-check.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from . import kernels
from .core import K_IN, K_NIL, K_OUT, NIL_REF, Polarity, SessionSystem, StateRef
from .errors import UnknownLabel
from .syntax import describe
from .verdict import TracePath, Verdict


class Action(NamedTuple):
    polarity: Polarity
    label: str

    def __str__(self) -> str:
        return f"{self.polarity.value}{self.label}"

    @classmethod
    def parse(cls, text: str) -> Action:
        return cls(Polarity(text[0]), text[1:])


Trace = tuple[Action, ...]


def co_action(a: Action) -> Action:
    return Action(a.polarity.dual, a.label)


def _pol(code: int) -> Polarity:
    return Polarity.IN if code == K_IN else Polarity.OUT


def step(sys: SessionSystem, s: StateRef, a: Action) -> StateRef | None:
    """The unique ``a``-successor of ``s``, or None.

    Inputs are unconditional (the target may be Nil); an output exists only
    towards a non-Nil continuation.
    """
    k = sys._kind[s]
    if k == K_NIL or k != a.polarity.code:
        return None
    if a.label not in sys.alphabet:
        raise UnknownLabel(a.label)
    t = sys._cont[s][sys.alphabet.index(a.label)]
    if k == K_OUT and t == NIL_REF:
        return None
    return t


def residual(sys: SessionSystem, s: StateRef, trace: Sequence[Action]) -> StateRef | None:
    for a in trace:
        s = step(sys, s, a)
        if s is None:
            return None
    return s


def trace_next(sys: SessionSystem, s: StateRef) -> frozenset[Action]:
    """Actions that extend a trace of ``s``: ``p x`` for every ``x`` in ``dom(s)``."""
    k = sys._kind[s]
    if k == K_NIL:
        return frozenset()
    p, labels = _pol(k), sys.alphabet.labels
    return frozenset(Action(p, labels[i]) for i in sys._dom[s])


def is_trace(sys: SessionSystem, s: StateRef, trace: Sequence[Action]) -> bool:
    r = residual(sys, s, trace)
    return r is not None and r != NIL_REF


def is_maximal_trace(sys: SessionSystem, s: StateRef, trace: Sequence[Action]) -> bool:
    # A trace is maximal iff its residual has no trace-extending action.  For
    # outputs that is dom = {} by definition; for inputs, transitions into Nil
    # exist but never extend a trace, so the criterion is dom = {} as well.
    r = residual(sys, s, trace)
    return r is not None and r != NIL_REF and not sys._dom[r]


def _trace_moves(sys: SessionSystem, s: StateRef):
    """(action, target) pairs extending traces of ``s``, in canonical order."""
    k = sys._kind[s]
    if k == K_NIL:
        return []
    p, labels, cont = _pol(k), sys.alphabet.labels, sys._cont[s]
    return [(Action(p, labels[i]), cont[i]) for i in sys._dom[s]]


def trace_inclusion(sys: SessionSystem, t: StateRef, s: StateRef) -> tuple[bool, Trace | None]:
    """Decide ``traces(t) <= traces(s)``.

    Explores the pairs of residuals after common traces breadth-first; on
    failure returns the shortest trace of ``t`` missing from ``s`` (ties broken
    by alphabet order, ``?`` before ``!``).
    """
    if t == NIL_REF:
        return True, None
    if s == NIL_REF:
        return False, ()
    parent: dict[tuple[int, int], tuple[tuple[int, int], Action] | None] = {(t, s): None}
    queue = deque([(t, s)])

    def path_to(node):
        out = []
        while parent[node] is not None:
            node, a = parent[node]
            out.append(a)
        return out[::-1]

    while queue:
        node = queue.popleft()
        a_state, b_state = node
        right = {a: tgt for a, tgt in _trace_moves(sys, b_state)}
        for a, tgt in _trace_moves(sys, a_state):
            if a not in right:
                return False, tuple(path_to(node) + [a])
            nxt = (tgt, right[a])
            if nxt not in parent:
                parent[nxt] = (node, a)
                queue.append(nxt)
    return True, None


# ---------------------------------------------------------------------------
# sessions


class Config(NamedTuple):
    client: StateRef
    server: StateRef


def sync_moves(sys: SessionSystem, client: StateRef, server: StateRef) -> list[tuple[int, int, int]]:
    """Synchronizations of a session as ``(label index, client', server')``.

    The sender (the side with polarity ``!``) must have a non-Nil continuation;
    the receiver moves unconditionally, possibly to Nil.
    """
    kc, ks = sys._kind[client], sys._kind[server]
    if kc == K_NIL or ks == K_NIL or kc == ks:
        return []
    cc, cs = sys._cont[client], sys._cont[server]
    sender = sys._dom[server] if ks == K_OUT else sys._dom[client]
    return [(i, cc[i], cs[i]) for i in sender]


def reduce(sys: SessionSystem, c: Config) -> list[tuple[Action, Config]]:
    """All reductions of ``c`` as ``(server action, next config)``."""
    ks = sys._kind[c.server]
    if ks == K_NIL:
        return []
    p, labels = _pol(ks), sys.alphabet.labels
    return [(Action(p, labels[i]), Config(c2, s2)) for i, c2, s2 in sync_moves(sys, c.client, c.server)]


def is_success(sys: SessionSystem, c: Config) -> bool:
    """Client is ``end!`` and the server is not Nil."""
    return sys._kind[c.client] == K_OUT and not sys._dom[c.client] and sys._kind[c.server] != K_NIL


@dataclass
class ConfigGraph:
    """Configurations reachable from ``root`` (BFS order) and their reductions."""

    root: Config
    nodes: list[Config]
    edges: list[list[tuple[Action, int]]]
    index: dict[Config, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    def csr(self, reverse: bool = False) -> tuple[list[int], list[int]]:
        n = len(self.nodes)
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, out in enumerate(self.edges):
            for _, v in out:
                if reverse:
                    adj[v].append(u)
                else:
                    adj[u].append(v)
        ptr, flat = [0], []
        for row in adj:
            flat.extend(row)
            ptr.append(len(flat))
        return ptr, flat

    def path(self, parent, v: int) -> tuple[list[Action], list[Config]]:
        """Actions and configs along BFS-tree ``parent`` from the root to ``v``."""
        nodes = [v]
        while parent[nodes[-1]] != nodes[-1]:
            nodes.append(parent[nodes[-1]])
        nodes.reverse()
        acts = []
        for u, w in zip(nodes, nodes[1:]):
            acts.append(next(a for a, x in self.edges[u] if x == w))
        return acts, [self.nodes[u] for u in nodes]


def config_graph(sys: SessionSystem, c0: Config) -> ConfigGraph:
    c0 = Config(*c0)
    nodes, index, edges = [c0], {c0: 0}, []
    head = 0
    while head < len(nodes):
        out = []
        for a, c in reduce(sys, nodes[head]):
            j = index.get(c)
            if j is None:
                j = index[c] = len(nodes)
                nodes.append(c)
            out.append((a, j))
        edges.append(out)
        head += 1
    return ConfigGraph(c0, nodes, edges, index)


# ---------------------------------------------------------------------------
# oracles


def describe_config(sys: SessionSystem, c: Config) -> str:
    return f"<{describe(sys, c.client)}, {describe(sys, c.server)}>"


def stuck_reason(sys: SessionSystem, c: Config) -> str:
    """Why a configuration without reductions is not successful."""
    kc, ks = sys._kind[c.client], sys._kind[c.server]
    if kc == K_OUT and not sys._dom[c.client]:
        return "server is nil while the client has succeeded"
    if kc == K_NIL:
        return "client is nil"
    if ks == K_NIL:
        return "server is nil"
    if kc == ks:
        both = "receive" if kc == K_IN else "send"
        return f"client and server both wait to {both}"
    return "sender has nothing to send"


def oracle_fair_termination(sys: SessionSystem, s: StateRef) -> Verdict:
    """Every residual of ``s`` can still reach an empty-domain residual."""
    if s == NIL_REF:
        return Verdict(True)
    # the discovery order below is BFS order, shortest-first with canonical ties
    order, index, moves, parent = [s], {s: 0}, [], [None]
    head = 0
    while head < len(order):
        out = []
        for a, t in _trace_moves(sys, order[head]):
            if t not in index:
                index[t] = len(order)
                order.append(t)
                parent.append((head, a))
            out.append((a, index[t]))
        moves.append(out)
        head += 1
    n = len(order)
    radj: list[list[int]] = [[] for _ in range(n)]
    for u, out in enumerate(moves):
        for _, v in out:
            radj[v].append(u)
    ptr, flat = [0], []
    for row in radj:
        flat.extend(row)
        ptr.append(len(flat))
    done, _ = kernels.bfs(n, ptr, flat, [u for u in range(n) if not sys._dom[order[u]]])
    bad = next((u for u in range(n) if not done[u]), None)
    if bad is None:
        return Verdict(True)
    trace, path, u = [], [order[bad]], bad
    while parent[u] is not None:
        u, a = parent[u]
        trace.append(a)
        path.append(order[u])
    return Verdict(
        False,
        TracePath(
            tuple(str(a) for a in reversed(trace)),
            describe(sys, order[bad]),
            "no maximal trace extends this residual",
            tuple(reversed(path)),
        ),
    )


def _first_bad(graph: ConfigGraph, ok) -> int | None:
    # graph.nodes is already in BFS order from the root
    for u in range(len(graph)):
        if not ok[u]:
            return u
    return None


def _bfs_tree(graph: ConfigGraph):
    ptr, flat = graph.csr()
    _, parent = kernels.bfs(len(graph), ptr, flat, [0])
    return parent


def _witness(sys: SessionSystem, graph: ConfigGraph, u: int, reason: str) -> TracePath:
    acts, configs = graph.path(_bfs_tree(graph), u)
    return TracePath(tuple(str(a) for a in acts), describe_config(sys, graph.nodes[u]), reason, tuple(configs))


def oracle_compliance(sys: SessionSystem, c0: Config) -> Verdict:
    """Every reachable stuck configuration is successful."""
    g = config_graph(sys, c0)
    ok = [bool(g.edges[u]) or is_success(sys, c) for u, c in enumerate(g.nodes)]
    u = _first_bad(g, ok)
    if u is None:
        return Verdict(True)
    return Verdict(False, _witness(sys, g, u, "stuck: " + stuck_reason(sys, g.nodes[u])))


def oracle_fair_compliance(sys: SessionSystem, c0: Config) -> Verdict:
    """A successful configuration stays reachable from every reachable one."""
    g = config_graph(sys, c0)
    ptr, flat = g.csr(reverse=True)
    live, _ = kernels.bfs(len(g), ptr, flat, [u for u, c in enumerate(g.nodes) if is_success(sys, c)])
    u = _first_bad(g, live)
    if u is None:
        return Verdict(True)
    return Verdict(False, _witness(sys, g, u, "no successful configuration is reachable"))
