"""Collects the acceptance outcomes into one pass/fail line per criterion."""

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        _ACCEPTANCE[report.nodeid] = report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, rep in _ACCEPTANCE.items():
        name = nodeid.split("::")[-1]
        detail = dict(rep.user_properties).get("detail", "")
        terminalreporter.write_line(f"{'PASS' if rep.passed else 'FAIL'} {name}: {detail}")
