import re

_CRITERION = re.compile(r"test_ac(\d+)_")
_outcomes: dict = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    ok = _outcomes.get(n, True)
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _outcomes[n] = ok


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        terminalreporter.write_line(f"AC{n}: {'PASS' if _outcomes[n] else 'FAIL'}")
