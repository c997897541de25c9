"""Shared test infrastructure: the acceptance-criteria result board.

Acceptance tests register one line per criterion (or sub-criterion) through
``record``; the terminal summary prints the full board after the run so the
pass/fail state of every golden check is visible in one place.
"""

from collections import OrderedDict

_BOARD: "OrderedDict[str, tuple[bool, str]]" = OrderedDict()


def record(criterion: str, passed: bool, detail: str) -> None:
    _BOARD[criterion] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _BOARD:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, (passed, detail) in _BOARD.items():
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {criterion:<28} {status}  {detail}")
