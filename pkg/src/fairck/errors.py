"""Exception hierarchy. Every error raised by the library derives from FairckError."""

from __future__ import annotations


class FairckError(Exception):
    pass


class DslSyntaxError(FairckError):
    """Malformed `.st` source."""

    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class DuplicateTypeName(FairckError):
    def __init__(self, name: str, line: int = 0):
        self.name = name
        super().__init__(f"type {name!r} defined twice" + (f" (line {line})" if line else ""))


class DuplicateAlphabetLabel(FairckError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"label {label!r} declared twice in alphabet")


class UnknownLabel(FairckError):
    def __init__(self, label: str, line: int = 0):
        self.label = label
        super().__init__(f"label {label!r} is not in the alphabet" + (f" (line {line})" if line else ""))


class UndefinedTypeName(FairckError):
    def __init__(self, name: str, line: int = 0):
        self.name = name
        super().__init__(f"undefined type name {name!r}" + (f" (line {line})" if line else ""))


class UnknownTypeName(FairckError):
    """A name requested by the caller (e.g. on the command line) is not declared."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown type name {name!r}")


class UnguardedRecursion(FairckError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unguarded recursion through {name!r}")


class PolarityMismatch(FairckError):
    pass


class OverlappingLabels(FairckError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"label {label!r} occurs in both operands of +")


class Inapplicable(FairckError):
    pass


class NotFound(FairckError):
    pass
