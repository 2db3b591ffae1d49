"""Shared pytest hooks.

The acceptance tests register a verdict per criterion; the terminal summary
prints one PASS/FAIL line for each so the checks are visible even in a long
``pytest -v`` transcript.
"""

ACCEPTANCE_RESULTS = {}


def record_acceptance(name, passed):
    ACCEPTANCE_RESULTS[name] = "PASS" if passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance checks")
    for name, verdict in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{verdict}  {name}")
