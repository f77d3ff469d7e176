"""Fair termination, fair compliance and fair subtyping for binary session types."""

__version__ = "0.1.0"

from .checkers import (  # noqa: E402
    compliance,
    converges,
    fair_compliance,
    fair_subtyping,
    fair_termination,
    subtyping,
)
from .core import NIL, Alphabet, Branch, Polarity, SessionSystem  # noqa: E402
from .errors import FairckError  # noqa: E402
from .semantics import Action, Config  # noqa: E402
from .syntax import load, parse, pretty, print_system  # noqa: E402
from .verdict import Verdict  # noqa: E402
from .witness import explain, synth_discriminating_client  # noqa: E402

__all__ = [
    "__version__",
    "Action",
    "Alphabet",
    "Branch",
    "Config",
    "FairckError",
    "NIL",
    "Polarity",
    "SessionSystem",
    "Verdict",
    "compliance",
    "converges",
    "explain",
    "fair_compliance",
    "fair_subtyping",
    "fair_termination",
    "load",
    "parse",
    "pretty",
    "print_system",
    "subtyping",
    "synth_discriminating_client",
]
