"""Shared test helpers: the acceptance-criterion result registry.

Acceptance tests register one line per criterion (PASS/FAIL plus the
measured values) before asserting, so the summary block at the end of the
pytest run always shows every criterion's measured outcome, including the
failing ones.
"""

_ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE_RESULTS:
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}: {detail}")
