"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        measured = dict(report.user_properties).get("measured", "")
        _, passed, seen = _RESULTS.get(number, (title, True, ""))
        _RESULTS[number] = (title, passed and not failed, measured or seen)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, measured = _RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"{status}  {number:2d}. {title}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)
