"""Session types as finite automata.

A :class:`SessionSystem` is a table of states over a finite alphabet of message
labels.  Each state is either :data:`NIL` or a :class:`Branch` with a polarity and
a *total* continuation map (one target per alphabet label, ``NIL_REF`` where the
message cannot be exchanged).  ``end!`` and ``end?`` are branches whose
continuations are all Nil.  State 0 is always the canonical Nil state.
"""

from __future__ import annotations

import enum
import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DuplicateAlphabetLabel, FairckError, OverlappingLabels, PolarityMismatch, UnknownTypeName

NIL_REF = 0

# integer polarity codes used on hot paths
K_NIL = -1
K_IN = 0
K_OUT = 1


class Polarity(enum.Enum):
    IN = "?"
    OUT = "!"

    @property
    def dual(self) -> Polarity:
        return Polarity.OUT if self is Polarity.IN else Polarity.IN

    @property
    def code(self) -> int:
        return K_IN if self is Polarity.IN else K_OUT

    def __str__(self) -> str:
        return self.value


def dual(p: Polarity) -> Polarity:
    return p.dual


class SingletonAlphabetWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of message labels. Declaration order drives every output order."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise FairckError("alphabet must not be empty")
        seen = set()
        for x in labels:
            if x in seen:
                raise DuplicateAlphabetLabel(x)
            seen.add(x)
        if len(labels) == 1:
            warnings.warn(
                "single-label alphabet: branching protocols cannot be described",
                SingletonAlphabetWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(labels)})

    def index(self, label: str) -> int:
        return self._index[label]

    def __contains__(self, label) -> bool:
        return label in self._index

    def __iter__(self):
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class Nil:
    def __repr__(self) -> str:
        return "NIL"


NIL = Nil()


@dataclass(frozen=True)
class Branch:
    polarity: Polarity
    cont: tuple[int, ...]


Node = Nil | Branch
StateRef = int


class SessionSystem:
    """Immutable, closed table of session-type states.

    Use :meth:`from_table` to build one from an arbitrary node table; it aliases
    every Nil to state 0 and (optionally) drops states unreachable from the
    named roots.
    """

    __slots__ = ("alphabet", "states", "names", "_kind", "_cont", "_dom", "_ref_names")

    def __init__(
        self,
        alphabet: Alphabet,
        states: Sequence[Node],
        names: Mapping[str, StateRef] | None = None,
        *,
        _trusted: bool = False,
    ):
        self.alphabet = alphabet
        self.states = tuple(states)
        self.names = dict(names or {})
        n, width = len(self.states), len(alphabet)
        if not _trusted:
            if n == 0 or self.states[0] is not NIL:
                raise FairckError("state 0 must be the canonical Nil")
            for i, node in enumerate(self.states):
                if isinstance(node, Nil):
                    if i:
                        raise FairckError(f"state {i} is a second Nil; use from_table to normalize")
                    continue
                if len(node.cont) != width:
                    raise FairckError(f"state {i}: continuation map is not total")
                for t in node.cont:
                    if not 0 <= t < n:
                        raise FairckError(f"state {i}: reference {t} out of range")
            for name, ref in self.names.items():
                if not 0 <= ref < n:
                    raise FairckError(f"name {name!r}: reference {ref} out of range")
        self._kind = tuple(K_NIL if isinstance(s, Nil) else s.polarity.code for s in self.states)
        self._cont = tuple(() if isinstance(s, Nil) else s.cont for s in self.states)
        doms: dict[tuple[int, ...], tuple[int, ...]] = {}
        for c in self._cont:
            if c not in doms:
                doms[c] = tuple(i for i, t in enumerate(c) if t)
        self._dom = tuple(map(doms.__getitem__, self._cont))
        ref_names: dict[int, str] = {}
        for name, ref in sorted(self.names.items(), key=lambda kv: kv[0]):
            ref_names.setdefault(ref, name)
        self._ref_names = ref_names

    @classmethod
    def from_table(
        cls,
        alphabet: Alphabet,
        nodes: Sequence[Node],
        names: Mapping[str, StateRef] | None = None,
        *,
        prune: bool = True,
    ) -> SessionSystem:
        """Normalize an arbitrary node table.

        Nil nodes anywhere in ``nodes`` are aliased to a single canonical Nil at
        index 0.  With ``prune`` and a non-empty ``names`` map, states that are
        unreachable from the named roots are dropped.  Surviving states keep
        their relative order.
        """
        names = dict(names or {})
        n = len(nodes)
        is_nil = [isinstance(x, Nil) for x in nodes]

        def canon(r: int) -> int:
            return -1 if is_nil[r] else r

        if prune and names:
            keep = set()
            todo = [canon(r) for r in names.values()]
            while todo:
                r = todo.pop()
                if r < 0 or r in keep:
                    continue
                keep.add(r)
                todo.extend(canon(t) for t in nodes[r].cont)
            order = sorted(keep)
        else:
            order = [i for i in range(n) if not is_nil[i]]
        remap = {old: new for new, old in enumerate(order, start=1)}

        def fix(r: int) -> int:
            return 0 if is_nil[r] else remap[r]

        table: list[Node] = [NIL]
        for old in order:
            b = nodes[old]
            table.append(Branch(b.polarity, tuple(fix(t) for t in b.cont)))
        return cls(alphabet, table, {k: fix(v) for k, v in names.items()})

    def __len__(self) -> int:
        return len(self.states)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SessionSystem)
            and self.alphabet == other.alphabet
            and self.states == other.states
            and self.names == other.names
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.states))

    def __repr__(self) -> str:
        return f"SessionSystem({len(self.states)} states, names={sorted(self.names)})"

    def node(self, s: StateRef) -> Node:
        return self.states[s]

    def ref(self, name: str) -> StateRef:
        try:
            return self.names[name]
        except KeyError:
            raise UnknownTypeName(name) from None

    def name_of(self, s: StateRef) -> str | None:
        return self._ref_names.get(s)

    def polarity(self, s: StateRef) -> Polarity | None:
        k = self._kind[s]
        return None if k == K_NIL else (Polarity.IN if k == K_IN else Polarity.OUT)

    def with_nodes(self, nodes: Iterable[Node], names: Mapping[str, StateRef] | None = None) -> tuple[SessionSystem, int]:
        """Append ``nodes`` (which may reference each other by absolute index).

        Returns the extended system and the index of the first appended node.
        """
        base = len(self.states)
        extra = list(nodes)
        merged = dict(self.names)
        merged.update(names or {})
        return SessionSystem(self.alphabet, self.states + tuple(extra), merged), base

    def disjoint_union(self, other: SessionSystem) -> tuple[SessionSystem, int]:
        """Place ``other``'s branch states after ours, sharing Nil.

        A reference ``r`` of ``other`` becomes ``0`` if ``r == 0`` else ``r + offset``;
        the offset is returned.  Names of ``other`` are kept unless they clash.
        """
        if other.alphabet != self.alphabet:
            raise FairckError("cannot combine systems over different alphabets")
        offset = len(self.states) - 1

        def fix(r: int) -> int:
            return r + offset if r else 0

        extra = [Branch(b.polarity, tuple(fix(t) for t in b.cont)) for b in other.states[1:]]
        names = dict(self.names)
        for k, v in other.names.items():
            names.setdefault(k, fix(v))
        return SessionSystem(self.alphabet, self.states + tuple(extra), names, _trusted=True), offset


# ---------------------------------------------------------------------------
# structural operations


def dom(sys: SessionSystem, s: StateRef) -> frozenset[str]:
    labels = sys.alphabet.labels
    return frozenset(labels[i] for i in sys._dom[s])


def is_defined(sys: SessionSystem, s: StateRef) -> bool:
    return sys._kind[s] != K_NIL


def is_win(sys: SessionSystem, s: StateRef) -> bool:
    """True for ``end!``: an output branch that cannot send anything."""
    return sys._kind[s] == K_OUT and not sys._dom[s]


def end_state(sys: SessionSystem, polarity: Polarity) -> tuple[SessionSystem, StateRef]:
    node = Branch(polarity, (NIL_REF,) * len(sys.alphabet))
    for i, existing in enumerate(sys.states):
        if existing == node:
            return sys, i
    new, base = sys.with_nodes([node])
    return new, base


def plus(sys: SessionSystem, s1: StateRef, s2: StateRef) -> tuple[SessionSystem, StateRef]:
    """The partial sum of two same-polarity branches with disjoint domains.

    Returns a (possibly extended) system and the state of the sum.  An existing
    state is reused when it already has exactly the merged shape.
    """
    k1, k2 = sys._kind[s1], sys._kind[s2]
    if k1 == K_NIL or k2 == K_NIL:
        raise PolarityMismatch("nil has no polarity and cannot be summed")
    if k1 != k2:
        raise PolarityMismatch("operands of + have different polarities")
    c1, c2 = sys._cont[s1], sys._cont[s2]
    for i in sys._dom[s1]:
        if c2[i]:
            raise OverlappingLabels(sys.alphabet.labels[i])
    merged = Branch(sys.states[s1].polarity, tuple(a or b for a, b in zip(c1, c2)))
    for i, existing in enumerate(sys.states):
        if existing == merged:
            return sys, i
    new, base = sys.with_nodes([merged])
    return new, base


def bisimilar(sys: SessionSystem, s1: StateRef, s2: StateRef) -> bool:
    """Decide whether two states unfold to the same (possibly infinite) tree.

    The automata are deterministic and total, so bisimilarity is the largest
    relation closed under "same kind, pointwise-related continuations"; we
    grow the candidate relation from ``(s1, s2)`` and fail on the first kind
    mismatch.
    """
    kind, cont = sys._kind, sys._cont
    seen = {(s1, s2)}
    todo = [(s1, s2)]
    while todo:
        a, b = todo.pop()
        if kind[a] != kind[b]:
            return False
        for x, y in zip(cont[a], cont[b]):
            if (x, y) not in seen:
                seen.add((x, y))
                todo.append((x, y))
    return True


def canonical_form(sys: SessionSystem, s: StateRef) -> tuple:
    """A key equal for two states exactly when they are bisimilar.

    Moore refinement of the states reachable from ``s``, then the quotient
    renumbered in breadth-first order from ``s`` (labels in alphabet order).
    """
    kind, cont = sys._kind, sys._cont
    states = reachable_ordered(sys, [s])
    block = {q: kind[q] for q in states}
    count = len(set(block.values()))
    while True:
        sig = {q: (block[q],) + tuple(block[t] for t in cont[q]) for q in states}
        ids: dict[tuple, int] = {}
        block = {q: ids.setdefault(sig[q], len(ids)) for q in states}
        if len(ids) == count:
            break
        count = len(ids)
    number = {block[s]: 0}
    rows = []
    todo = deque([s])
    while todo:
        q = todo.popleft()
        row = [kind[q]]
        for t in cont[q]:
            b = block[t]
            if b not in number:
                number[b] = len(number)
                todo.append(t)
            row.append(number[b])
        rows.append(tuple(row))
    return tuple(rows)


def reachable(sys: SessionSystem, roots: Iterable[StateRef]) -> frozenset[StateRef]:
    cont = sys._cont
    seen = set()
    todo = deque(roots)
    while todo:
        s = todo.popleft()
        if s in seen:
            continue
        seen.add(s)
        todo.extend(cont[s])
    return frozenset(seen)


def reachable_ordered(sys: SessionSystem, roots: Iterable[StateRef]) -> list[StateRef]:
    """BFS order of :func:`reachable` (roots first, labels in alphabet order)."""
    cont = sys._cont
    order: list[int] = []
    seen = set()
    todo = deque(roots)
    while todo:
        s = todo.popleft()
        if s in seen:
            continue
        seen.add(s)
        order.append(s)
        todo.extend(cont[s])
    return order
