"""Collects one PASS/FAIL verdict per acceptance criterion and prints them at the end of the run."""
import pytest

_VERDICTS: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    verdict = _VERDICTS.setdefault(number, [title, True, False])
    if report.failed:
        verdict[1] = False
    if report.when == "call" and report.passed:
        verdict[2] = True


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        title, ok, ran = _VERDICTS[number]
        status = "PASS" if ok and ran else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {status}: {title}")
