import numpy as np
import pytest

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        key = (mark.args[0], mark.args[1])
        ok = rep.passed
        _CRITERIA.setdefault(key, []).append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), parts in sorted(_CRITERIA.items(), key=lambda kv: str(kv[0][0])):
        ok = all(p for _, p in parts)
        failed = [name for name, p in parts if not p]
        tail = "" if ok else f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}{tail}")
