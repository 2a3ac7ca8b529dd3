"""Collects acceptance-criterion outcomes and prints one verdict line per criterion."""

from collections import defaultdict

_OUTCOMES = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    criterion = dict(report.user_properties).get("criterion")
    if criterion is None:
        return
    if report.when == "call" or report.outcome != "passed":
        # an expected failure is still a failed criterion
        ok = report.passed and not hasattr(report, "wasxfail")
        _OUTCOMES[criterion].append((report.nodeid.split("::")[-1], ok))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_OUTCOMES):
        results = _OUTCOMES[criterion]
        failed = [name for name, ok in results if not ok]
        verdict = "FAIL" if failed else "PASS"
        detail = f" (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(
            f"criterion {criterion:>2}: {verdict}  {len(results) - len(failed)}/{len(results)} checks{detail}"
        )
