import time

import pytest

_results: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item.elapsed = time.perf_counter() - start


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number, title = mark.args
    passed = call.excinfo is None
    prev = _results.get(number)
    status = "PASS" if passed and (prev is None or prev[0] == "PASS") else "FAIL"
    elapsed = getattr(item, "elapsed", call.duration) + (prev[2] if prev else 0.0)
    _results[number] = (status, title, elapsed)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, title, elapsed = _results[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title} ({elapsed:.1f} s)")
