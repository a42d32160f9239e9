from __future__ import annotations

from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from entwalk import WalkConfig, evolve, probabilities

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@lru_cache(maxsize=None)
def walk_state(n: int, steps: int):
    return evolve(WalkConfig(n, steps))


@lru_cache(maxsize=None)
def walk_distribution(n: int, steps: int):
    return probabilities(walk_state(n, steps))


# one PASS/FAIL line per acceptance criterion, printed after the run

_ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    marker = getattr(report, "_acceptance", None)
    if marker is None:
        return
    number, title = marker
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "outcomes": []})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcomes"].append((report.nodeid.split("::")[-1], report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        report._acceptance = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        outcomes = entry["outcomes"]
        ok = bool(outcomes) and all(o == "passed" for _, o in outcomes)
        status = "PASS" if ok else "FAIL"
        failed = [name for name, o in outcomes if o != "passed"]
        suffix = f"  (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {number:>2}: {status}  {entry['title']}{suffix}")
