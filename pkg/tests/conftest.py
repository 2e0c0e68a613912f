import pytest

_CRITERIA: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _CRITERIA.setdefault(marker.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: (int(s.split()[0].rstrip("ab")), s)):
        outcomes = _CRITERIA[label]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        passed = sum(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"{verdict}  criterion {label}  ({passed}/{len(outcomes)} checks)")
