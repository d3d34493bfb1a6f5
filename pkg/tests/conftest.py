import pytest

from capplan import _kernels

TABLE1_CSV = """DateTime,U,U^*,X_1,X_2,X_3,X_4,X_5,X_6
9/29/99 0:00,25.25,32.90,32,19,16.45,18.96,15.04,131.56
9/29/99 0:16,27.25,36.85,45,11,17.01,22.49,14.18,136.08
9/29/99 0:32,47.12,54.01,50,42,29.52,33.32,27.07,236.13
9/29/99 0:48,45.88,51.19,53,38,27.29,32.09,24.62,218.29
"""

ACCEPTANCE_RESULTS = []


@pytest.fixture
def table1_csv():
    return TABLE1_CSV


@pytest.fixture(params=sorted(_kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    mod = _kernels.available_backends()[request.param]
    for name in ("qr_reduce", "group_sum_count", "group_max"):
        monkeypatch.setattr(_kernels, name, getattr(mod, name))
    return request.param


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, text in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {text}")
