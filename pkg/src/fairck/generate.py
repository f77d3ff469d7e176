"""Instance families for the oracle-equivalence suites.

* :func:`exhaustive_systems` lists every session system up to a state bound,
  once per isomorphism class (branch states are interchangeable, Nil is fixed).
* :func:`random_systems` draws seeded systems of bounded size.

State counts include the canonical Nil state.  Generated branch states are
named ``Q1``, ``Q2``, ... so that they can be printed and referenced.
"""

from __future__ import annotations

import itertools
import random
import warnings
from typing import Iterator

from .core import NIL, Alphabet, Branch, Polarity, SessionSystem, SingletonAlphabetWarning

_POLS = (Polarity.IN, Polarity.OUT)


def labels_for(size: int) -> Alphabet:
    """The alphabet ``{a, b, c, ...}`` of the given size."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SingletonAlphabetWarning)
        return Alphabet(tuple(chr(ord("a") + i) for i in range(size)))


def _system(alphabet: Alphabet, branches) -> SessionSystem:
    states = [NIL] + [Branch(p, tuple(cont)) for p, cont in branches]
    names = {f"Q{i}": i for i in range(1, len(states))}
    return SessionSystem(alphabet, states, names)


def _relabel(shape, perm):
    # perm maps old branch index (1-based) to new one; Nil stays 0
    k = len(shape)
    out = [None] * k
    for old, (p, cont) in enumerate(shape, start=1):
        out[perm[old] - 1] = (p, tuple(perm[t] if t else 0 for t in cont))
    return tuple(out)


def exhaustive_systems(max_states: int, alphabet_size: int) -> Iterator[SessionSystem]:
    """All systems with at most ``max_states`` states (Nil included), up to isomorphism.

    Yields the Nil-only system first, then systems by increasing size; within
    a size, in lexicographic order of their canonical encoding.
    """
    if max_states < 1:
        return
    alphabet = labels_for(alphabet_size)
    yield _system(alphabet, [])
    for k in range(1, max_states):
        nodes = [
            (p, cont)
            for p in _POLS
            for cont in itertools.product(range(k + 1), repeat=alphabet_size)
        ]
        perms = [{0: 0, **dict(zip(range(1, k + 1), q))} for q in itertools.permutations(range(1, k + 1))]
        key = {n: i for i, n in enumerate(nodes)}

        def code(shape):
            return tuple(key[n] for n in shape)

        for shape in itertools.product(nodes, repeat=k):
            c = code(shape)
            if all(code(_relabel(shape, perm)) >= c for perm in perms[1:]):
                yield _system(alphabet, shape)


def random_systems(count: int, seed: int, max_states: int = 8, alphabet_size: int = 3,
                   nil_weight: float = 0.35) -> Iterator[SessionSystem]:
    """``count`` seeded systems with 2..``max_states`` states (Nil included).

    Each continuation is Nil with probability ``nil_weight``, else a uniformly
    chosen branch state, so end-types and partial branches are common.
    """
    rng = random.Random(seed)
    alphabet = labels_for(alphabet_size)
    for _ in range(count):
        k = rng.randint(1, max(1, max_states - 1))
        shape = [
            (rng.choice(_POLS), tuple(0 if rng.random() < nil_weight else rng.randint(1, k) for _ in alphabet))
            for _ in range(k)
        ]
        yield _system(alphabet, shape)
