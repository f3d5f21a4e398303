import re

_outcomes: dict[str, str] = {}
_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        key = f"{int(m.group(1)):2d} {m.group(2).replace('_', ' ')}"
        if report.outcome == "failed" or key not in _outcomes:
            _outcomes[key] = "PASS" if report.outcome == "passed" else report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes):
        terminalreporter.write_line(f"criterion {key}: {_outcomes[key]}")
