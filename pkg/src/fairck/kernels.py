"""Kernel backend selection.

The compiled extension is used when it was built; otherwise (or when the
environment sets ``FAIRCK_PURE=1``) the pure-Python twin is used.  Both return
identical results.  ``BACKEND`` names the active one.
"""

from __future__ import annotations

import os
from array import array

from . import _pykernels

try:
    if os.environ.get("FAIRCK_PURE", "") not in ("", "0"):
        raise ImportError("pure backend forced")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def _ints(xs) -> array:
    return xs if isinstance(xs, array) else array("i", xs)


class _Backend:
    def __init__(self, name: str):
        self.name = name
        self._mod = _compiled if name == "compiled" else _pykernels

    def lfp(self, n, concl, ptr, prems):
        if self._mod is _pykernels:
            return self._mod.lfp(n, concl, ptr, prems)
        return self._mod.lfp(n, _ints(concl), _ints(ptr), _ints(prems))

    def gfp(self, n, concl, ptr, prems, bound=None):
        if self._mod is _pykernels:
            return self._mod.gfp(n, concl, ptr, prems, bound)
        return self._mod.gfp(n, _ints(concl), _ints(ptr), _ints(prems), bound)

    def bfs(self, n, ptr, adj, sources, blocked=None):
        if self._mod is _pykernels:
            return self._mod.bfs(n, ptr, adj, sources, blocked)
        return self._mod.bfs(n, _ints(ptr), _ints(adj), sources, blocked)


def backend(name: str | None = None) -> _Backend:
    """The active backend, or a specific one (``"python"`` / ``"compiled"``)."""
    name = name or BACKEND
    if name == "compiled" and _compiled is None:
        raise RuntimeError("compiled kernels are not available in this build")
    return _Backend(name)


_active = backend()
lfp = _active.lfp
gfp = _active.gfp
bfs = _active.bfs
