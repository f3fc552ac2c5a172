import time

import pytest

SUITE_BUDGET_S = 120.0
_START = {}


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    # the whole-suite runtime is part of the property-suite gate; it can only be judged here
    if "t" not in _START or session.testscollected < 50:
        return
    elapsed = time.perf_counter() - _START["t"]
    ok = elapsed < SUITE_BUDGET_S
    reporter = session.config.pluginmanager.get_plugin("terminalreporter")
    line = f"[{'PASS' if ok else 'FAIL'}] criterion 15b: full suite runtime {elapsed:.1f} s (limit {SUITE_BUDGET_S:.0f} s)"
    if reporter is not None:
        reporter.write_line(line)
    else:
        print(line)
    if not ok and session.exitstatus == 0:
        session.exitstatus = pytest.ExitCode.TESTS_FAILED
