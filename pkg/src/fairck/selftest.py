"""Oracle-equivalence runs over generated instance families.

For every state of every generated system the inference-system checker for
fair termination must agree with its oracle; for every pair of states taken
as (client, server) the two compliance checkers must agree with theirs, and
fair compliance must imply compliance.  All generalized interpretations
computed along the way are audited for the inclusions that define them.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from . import checkers
from .core import SessionSystem
from .generate import exhaustive_systems, random_systems
from .gis import inclusion_audit
from .semantics import Config, oracle_compliance, oracle_fair_compliance, oracle_fair_termination
from .syntax import describe, print_system

MAX_REPORTED = 20


@dataclass
class Discrepancy:
    family: str
    prop: str
    subject: str
    source: str

    def __str__(self) -> str:
        return f"[{self.family}] {self.prop} disagrees on {self.subject}\n{self.source}"


@dataclass
class SelftestResult:
    systems: Counter = field(default_factory=Counter)
    states: int = 0
    configs: int = 0
    checks: Counter = field(default_factory=Counter)
    discrepancies: list[Discrepancy] = field(default_factory=list)
    discrepancy_count: int = 0
    audited: int = 0
    audit_violations: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.discrepancy_count == 0 and not self.audit_violations

    def summary(self) -> str:
        lines = [
            f"systems: {sum(self.systems.values())} "
            + "(" + ", ".join(f"{k} {v}" for k, v in sorted(self.systems.items())) + ")",
            f"states checked: {self.states}",
            f"configurations checked: {self.configs}",
        ]
        lines += [f"  {prop}: {n} agreements" for prop, n in sorted(self.checks.items())]
        lines.append(f"generalized interpretations audited: {self.audited}, violations: {len(self.audit_violations)}")
        lines.append(f"discrepancies: {self.discrepancy_count}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "systems": dict(sorted(self.systems.items())),
            "states": self.states,
            "configurations": self.configs,
            "agreements": dict(sorted(self.checks.items())),
            "audited": self.audited,
            "audit_violations": self.audit_violations[:MAX_REPORTED],
            "discrepancies": [
                {"family": d.family, "property": d.prop, "subject": d.subject, "system": d.source}
                for d in self.discrepancies
            ],
            "discrepancy_count": self.discrepancy_count,
        }


def check_system(sys: SessionSystem, family: str, result: SelftestResult,
                 tamper: Callable[[str, bool], bool] | None = None) -> None:
    """Run every equivalence on one system, recording disagreements in ``result``."""
    n = len(sys.states)

    def record(prop: str, subject, ok: bool):
        if ok:
            result.checks[prop] += 1
            return
        result.discrepancy_count += 1
        if len(result.discrepancies) < MAX_REPORTED:
            result.discrepancies.append(Discrepancy(family, prop, subject(), print_system(sys)))

    def verdict(prop: str, value: bool) -> bool:
        return tamper(prop, value) if tamper else value

    for s in range(n):
        result.states += 1
        got = verdict("fair_termination", checkers.fair_termination(sys, s).holds)
        record("fair_termination", lambda s=s: describe(sys, s), got == oracle_fair_termination(sys, s).holds)
    for c in range(n):
        for s in range(n):
            cfg = Config(c, s)
            result.configs += 1
            subject = lambda c=c, s=s: f"<{describe(sys, c)}, {describe(sys, s)}>"  # noqa: E731
            safe = verdict("compliance", checkers.compliance(sys, cfg).holds)
            fair = verdict("fair_compliance", checkers.fair_compliance(sys, cfg).holds)
            record("compliance", subject, safe == oracle_compliance(sys, cfg).holds)
            record("fair_compliance", subject, fair == oracle_fair_compliance(sys, cfg).holds)
            record("fair_compliance implies compliance", subject, safe or not fair)


def run_selftest(
    seed: int = 42,
    max_states: int = 4,
    alphabet: int = 2,
    random_count: int = 500,
    random_max_states: int = 8,
    random_alphabet: int = 3,
    inject_fault: bool = False,
) -> SelftestResult:
    """Exhaustive family (``max_states`` states incl. Nil over ``alphabet`` labels)
    plus ``random_count`` seeded systems.

    ``inject_fault`` flips the first fair-termination verdict, to confirm that
    the harness notices.
    """
    result = SelftestResult()
    flipped = []

    def tamper(prop, value):
        if prop == "fair_termination" and not flipped:
            flipped.append(True)
            return not value
        return value

    start = time.perf_counter()
    with inclusion_audit() as audit:
        for sys in exhaustive_systems(max_states, alphabet):
            result.systems["exhaustive"] += 1
            check_system(sys, "exhaustive", result, tamper if inject_fault else None)
        if max_states > 0:
            for sys in random_systems(random_count, seed, random_max_states, random_alphabet):
                result.systems["random"] += 1
                check_system(sys, "random", result, tamper if inject_fault else None)
    result.audited = audit.checked
    result.audit_violations = list(audit.violations)
    result.seconds = time.perf_counter() - start
    return result
