"""Verdicts and the evidence attached to them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable


@dataclass(frozen=True)
class DerivationTree:
    """One node of a derivation: a judgment and the rule applied to it.

    Trees are kept finite (and linear in size) by a ``back_edge`` leaf for any
    judgment already expanded elsewhere in the tree: a shared subderivation
    or, in non-well-founded derivations, a cycle back to an ancestor.
    """

    judgment: str
    rule: str
    children: tuple[DerivationTree, ...] = ()
    back_edge: bool = False
    raw: Hashable = field(default=None, compare=False, repr=False)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"judgment": self.judgment, "rule": self.rule}
        if self.back_edge:
            out["back_edge"] = True
        else:
            out["children"] = [c.to_json() for c in self.children]
        return out

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def rules(self) -> list[str]:
        """Rule names in pre-order."""
        out = [self.rule]
        for c in self.children:
            out.extend(c.rules())
        return out


@dataclass(frozen=True)
class DerivationWitness:
    """Evidence that a judgment holds.

    ``coinductive`` is a regular derivation using the rules only; ``bounding``
    is a finite derivation in rules plus corules (absent for purely safety
    checks).
    """

    coinductive: DerivationTree | None
    bounding: DerivationTree | None = None

    kind = "derivation"

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "coinductive": None if self.coinductive is None else self.coinductive.to_json(),
            "bounding": None if self.bounding is None else self.bounding.to_json(),
        }


@dataclass(frozen=True)
class TracePath:
    """A run from the checked judgment to an offending one.

    ``trace`` holds the actions taken (rendered, e.g. ``"!true"``); ``path``
    the raw judgments visited, first to last; ``reason`` says what is wrong
    with the last one.
    """

    trace: tuple[str, ...]
    terminal: str
    reason: str
    path: tuple[Hashable, ...] = field(default=(), compare=False, repr=False)

    kind = "trace"

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "trace": list(self.trace), "terminal": self.terminal, "reason": self.reason}


@dataclass(frozen=True)
class DivergenceWitness:
    """A product node (T', S') outside the convergence set, and a way out of S'."""

    node: tuple[int, int]
    node_desc: str
    prefix: tuple[str, ...]
    escape_trace: tuple[str, ...]
    note: str

    kind = "divergence"

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "node": self.node_desc,
            "prefix": list(self.prefix),
            "escape_trace": list(self.escape_trace),
            "note": self.note,
        }


@dataclass(frozen=True)
class ClientSpec:
    """A synthesized client, as a state of an extended system plus its source."""

    system: Any
    root: int
    source: str

    kind = "client"

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "source": self.source}


@dataclass(frozen=True)
class Unavailable:
    """Placeholder when a witness was requested but could not be produced."""

    reason: str

    kind = "unavailable"

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "reason": self.reason}


Witness = DerivationWitness | TracePath | DivergenceWitness | ClientSpec | Unavailable


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Witness | None = None
    judgment: str = ""

    def __bool__(self) -> bool:
        return self.holds
