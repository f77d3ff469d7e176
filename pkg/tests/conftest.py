from pathlib import Path

import pytest

from fairck.syntax import load

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus" / "protocols.st"


@pytest.fixture(scope="session")
def named():
    return load(CORPUS.read_text())


@pytest.fixture(scope="session")
def ref(named):
    return named.ref


# one pass/fail line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
