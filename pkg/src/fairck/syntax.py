"""The `.st` session-type language.

::

    alphabet {true, false, z, p}
    // comments run to end of line
    type T1 = !true.!{z,p}.T1 + !false.end?

``pX.T`` sends/receives any label of ``X`` and continues as ``T``; ``+`` merges
same-polarity branches with disjoint labels; ``end!``/``end?`` are branches
with no usable continuation; ``nil`` is the unusable type.  The prefix binds
tighter than ``+``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    NIL,
    NIL_REF,
    Alphabet,
    Branch,
    Polarity,
    SessionSystem,
    StateRef,
)
from .errors import (
    DslSyntaxError,
    DuplicateAlphabetLabel,
    DuplicateTypeName,
    OverlappingLabels,
    PolarityMismatch,
    UndefinedTypeName,
    UnguardedRecursion,
    UnknownLabel,
)

# ---------------------------------------------------------------------------
# surface AST


@dataclass(frozen=True)
class NilTerm:
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class EndTerm:
    polarity: Polarity
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Ref:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Prefix:
    polarity: Polarity
    labels: tuple[str, ...]
    body: "Term"
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Sum:
    operands: tuple["Term", ...]
    line: int = 0
    col: int = 0


Term = NilTerm | EndTerm | Ref | Prefix | Sum


@dataclass(frozen=True)
class TypeDef:
    name: str
    term: Term
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class SourceFile:
    alphabet: tuple[str, ...]
    typedefs: tuple[TypeDef, ...] = field(default=())

    def names(self) -> list[str]:
        return [d.name for d in self.typedefs]


# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<end>end[!?])
  | (?P<word>[A-Za-z0-9_][A-Za-z0-9_']*)
  | (?P<punct>[{},=+.()!?])
    """,
    re.VERBOSE,
)

KEYWORDS = {"alphabet", "type", "nil", "end"}
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
_LABEL = re.compile(r"[A-Za-z0-9_]+\Z")


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "end", "punct", "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslSyntaxError(line, pos - line_start + 1, "a token", text[pos])
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.alphabet: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, expected: str):
        t = self.tok
        raise DslSyntaxError(t.line, t.col, expected, t.text or "end of input")

    def take(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("punct", "word"):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("punct", "word")

    def label(self) -> tuple[str, Token]:
        t = self.tok
        if t.kind != "word" or not _LABEL.match(t.text):
            self.fail("a label")
        self.i += 1
        return t.text, t

    def file(self) -> SourceFile:
        if not self.at("alphabet"):
            self.fail("'alphabet' declaration first")
        self.i += 1
        self.take("{")
        labels = [self.label()[0]]
        while self.at(","):
            self.i += 1
            labels.append(self.label()[0])
        self.take("}")
        seen = set()
        for x in labels:
            if x in seen:
                raise DuplicateAlphabetLabel(x)
            seen.add(x)
        self.alphabet = seen

        defs: list[TypeDef] = []
        names: set[str] = set()
        while self.tok.kind != "eof":
            start = self.take("type")
            t = self.tok
            if t.kind != "word" or t.text in KEYWORDS or not _NAME.match(t.text):
                self.fail("a type name")
            self.i += 1
            if t.text in names:
                raise DuplicateTypeName(t.text, t.line)
            names.add(t.text)
            self.take("=")
            defs.append(TypeDef(t.text, self.term(), start.line, start.col))
        return SourceFile(tuple(labels), tuple(defs))

    def term(self) -> Term:
        first = self.tok
        ops = [self.seq()]
        while self.at("+"):
            self.i += 1
            ops.append(self.seq())
        if len(ops) == 1:
            return ops[0]
        return Sum(tuple(ops), first.line, first.col)

    def seq(self) -> Term:
        t = self.tok
        if t.kind == "end":
            self.i += 1
            return EndTerm(Polarity(t.text[-1]), t.line, t.col)
        if t.kind == "punct" and t.text in "!?":
            self.i += 1
            pol = Polarity(t.text)
            labels = self.labelset()
            self.take(".")
            return Prefix(pol, labels, self.seq(), t.line, t.col)
        if t.kind == "punct" and t.text == "(":
            self.i += 1
            inner = self.term()
            self.take(")")
            return inner
        if t.kind == "word":
            if t.text == "nil":
                self.i += 1
                return NilTerm(t.line, t.col)
            if t.text not in KEYWORDS and _NAME.match(t.text):
                self.i += 1
                return Ref(t.text, t.line, t.col)
        self.fail("a session type")

    def labelset(self) -> tuple[str, ...]:
        if self.at("{"):
            self.i += 1
            out = [self._known(*self.label())]
            while self.at(","):
                self.i += 1
                out.append(self._known(*self.label()))
            self.take("}")
        else:
            out = [self._known(*self.label())]
        return tuple(out)

    def _known(self, label: str, tok: Token) -> str:
        if label not in self.alphabet:
            raise UnknownLabel(label, tok.line)
        return label


def parse(text: str) -> SourceFile:
    return _Parser(text).file()


# ---------------------------------------------------------------------------
# elaboration


def _unguarded(term: Term) -> list[Ref]:
    if isinstance(term, Ref):
        return [term]
    if isinstance(term, Sum):
        return [r for op in term.operands for r in _unguarded(op)]
    return []


def _all_refs(term: Term):
    if isinstance(term, Ref):
        yield term
    elif isinstance(term, Sum):
        for op in term.operands:
            yield from _all_refs(op)
    elif isinstance(term, Prefix):
        yield from _all_refs(term.body)


def elaborate(src: SourceFile) -> SessionSystem:
    """Solve the type equations of ``src`` into a normalized :class:`SessionSystem`."""
    alphabet = Alphabet(src.alphabet)
    width = len(alphabet)
    defs = {d.name: d for d in src.typedefs}
    for d in src.typedefs:
        for r in _all_refs(d.term):
            if r.name not in defs:
                raise UndefinedTypeName(r.name, r.line)

    # names may only depend on each other through a prefix
    deps = {d.name: [r.name for r in _unguarded(d.term)] for d in src.typedefs}
    order: list[str] = []
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(name: str):
        mark = state.get(name)
        if mark == 2:
            return
        if mark == 1:
            raise UnguardedRecursion(name)
        state[name] = 1
        for m in deps[name]:
            visit(m)
        state[name] = 2
        order.append(name)

    for d in src.typedefs:
        visit(d.name)

    nodes: list = [NIL]
    slot: dict[str, int] = {}
    for d in src.typedefs:
        slot[d.name] = len(nodes)
        nodes.append(None)
    shapes: dict[str, tuple | None] = {}

    def shape(term: Term):
        # None for nil, else (polarity, list of targets)
        if isinstance(term, NilTerm):
            return None
        if isinstance(term, EndTerm):
            return term.polarity, [NIL_REF] * width
        if isinstance(term, Ref):
            return shapes[term.name]
        if isinstance(term, Prefix):
            target = ref_of(term.body)
            cont = [NIL_REF] * width
            for x in term.labels:
                cont[alphabet.index(x)] = target
            return term.polarity, cont
        acc = None
        for op in term.operands:
            sh = shape(op)
            if sh is None:
                raise PolarityMismatch(f"line {term.line}: nil cannot be an operand of +")
            if acc is None:
                acc = sh[0], list(sh[1])
                continue
            if sh[0] is not acc[0]:
                raise PolarityMismatch(f"line {term.line}: operands of + have different polarities")
            for i, t in enumerate(sh[1]):
                if t:
                    if acc[1][i]:
                        raise OverlappingLabels(alphabet.labels[i])
                    acc[1][i] = t
        return acc

    def ref_of(term: Term) -> int:
        if isinstance(term, Ref):
            return slot[term.name]
        if isinstance(term, NilTerm):
            return NIL_REF
        sh = shape(term)
        if sh is None:
            return NIL_REF
        nodes.append(Branch(sh[0], tuple(sh[1])))
        return len(nodes) - 1

    for name in order:
        sh = shape(defs[name].term)
        shapes[name] = sh
        nodes[slot[name]] = NIL if sh is None else Branch(sh[0], tuple(sh[1]))

    return SessionSystem.from_table(alphabet, nodes, slot, prune=True)


def load(text: str) -> SessionSystem:
    return elaborate(parse(text))


# ---------------------------------------------------------------------------
# printing


def _labelset(labels: list[str]) -> str:
    return labels[0] if len(labels) == 1 else "{" + ",".join(labels) + "}"


class _Printer:
    def __init__(self, sys: SessionSystem, extra_names: dict[int, str] | None = None):
        self.sys = sys
        self.names: dict[int, str] = dict(sys._ref_names)
        self.names.pop(NIL_REF, None)
        if extra_names:
            self.names.update(extra_names)
        self.used: list[int] = []

    def name_cycles(self, roots: list[int]) -> None:
        """Name unnamed states that would otherwise be inlined into themselves."""
        # Every cycle contains a back edge of any depth-first search, so naming
        # each unnamed back-edge target leaves no cycle of unnamed states.  The
        # search runs through named states too: their bodies are printed as well.
        taken = set(self.names.values()) | set(self.sys.names)
        cont = self.sys._cont
        grey, black = set(), set()
        for root in roots:
            if root in black:
                continue
            grey.add(root)
            stack = [(root, iter(dict.fromkeys(cont[root])))]
            while stack:
                s, it = stack[-1]
                t = next(it, None)
                if t is None:
                    stack.pop()
                    grey.discard(s)
                    black.add(s)
                elif t == NIL_REF or t in black:
                    continue
                elif t in grey:
                    if t not in self.names:
                        cand, k = f"X{t}", t
                        while cand in taken:
                            k += len(self.sys.states)
                            cand = f"X{k}"
                        taken.add(cand)
                        self.names[t] = cand
                else:
                    grey.add(t)
                    stack.append((t, iter(dict.fromkeys(cont[t]))))

    def body(self, s: int) -> str:
        sys = self.sys
        if sys._kind[s] < 0:
            return "nil"
        pol = sys.states[s].polarity.value
        cont = sys._cont[s]
        if not sys._dom[s]:
            return "end" + pol
        groups: dict[int, list[str]] = {}
        for i in sys._dom[s]:
            groups.setdefault(cont[i], []).append(sys.alphabet.labels[i])
        parts = []
        for target, labels in groups.items():
            inner = self.ref(target)
            if target not in self.names and self._is_sum(target):
                inner = f"({inner})"
            parts.append(f"{pol}{_labelset(labels)}.{inner}")
        return " + ".join(parts)

    def _is_sum(self, s: int) -> bool:
        sys = self.sys
        if sys._kind[s] < 0 or not sys._dom[s]:
            return False
        return len({sys._cont[s][i] for i in sys._dom[s]}) > 1

    def ref(self, s: int) -> str:
        if s == NIL_REF:
            return "nil"
        if s in self.names:
            if s not in self.used:
                self.used.append(s)
            return self.names[s]
        return self.body(s)


def pretty(sys: SessionSystem, root: StateRef) -> str:
    """Render one state as a term; recursion goes through (possibly generated) names."""
    p = _Printer(sys)
    if root != NIL_REF:
        p.name_cycles([root])
    return p.body(root)


def print_system(
    sys: SessionSystem,
    roots: list[str] | None = None,
    *,
    root_ref: StateRef | None = None,
    root_name: str = "T",
) -> str:
    """Render a complete `.st` source whose roots elaborate back to bisimilar states.

    By default every named root of ``sys`` gets a ``type`` line, in declaration
    order.  With ``root_ref``, that single state is printed (under its own name
    if it has one, else under ``root_name``).  Equations for referenced helper
    states follow the requested ones.
    """
    extra = {}
    if root_ref is not None:
        name = sys.name_of(root_ref) if root_ref != NIL_REF else None
        if name is None:
            if root_name in sys.names:
                raise ValueError(f"name {root_name!r} already used")
            name = root_name
            extra[root_ref] = name
        order = [(name, root_ref)]
    else:
        order = [(n, sys.ref(n)) for n in (list(sys.names) if roots is None else roots)]
    p = _Printer(sys, extra)
    p.name_cycles([r for _, r in order if r != NIL_REF])
    lines = ["alphabet {" + ", ".join(sys.alphabet.labels) + "}"]
    emitted: set[int] = set()
    for name, ref in order:
        lines.append(f"type {name} = {p.body(ref)}")
        if p.names.get(ref) == name:
            emitted.add(ref)
    i = 0
    while i < len(p.used):
        ref = p.used[i]
        i += 1
        if ref not in emitted:
            emitted.add(ref)
            lines.append(f"type {p.names[ref]} = {p.body(ref)}")
    return "\n".join(lines) + "\n"


def describe(sys: SessionSystem, s: StateRef, limit: int = 60) -> str:
    """Short display name for a state: its declared name, or its rendered term."""
    name = sys.name_of(s)
    if name is not None and s != NIL_REF:
        return name
    text = pretty(sys, s)
    return text if len(text) <= limit else f"#{s}"
