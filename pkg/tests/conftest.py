import numpy as np
import pytest

from rmflats.gf import GF


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture(params=[2, 3, 4])
def small_field(request):
    return GF(request.param)


# --- acceptance summary: one line per criterion ------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "setup":
        item.user_properties.append(("setup", rep.duration))
        return
    if rep.when != "call":
        return
    number, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    secs = rep.duration + sum(v for k, v in item.user_properties if k == "setup")
    _CRITERIA[number] = ("PASS" if rep.passed else "FAIL", title, secs, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict, title, secs, detail = _CRITERIA[number]
        line = f"criterion {number:>2}: {verdict}  {title}  ({secs:.1f}s)"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
