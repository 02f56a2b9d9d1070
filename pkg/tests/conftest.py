from __future__ import annotations

import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit): acceptance criterion with a time limit in seconds")


@pytest.fixture
def budget(request):
    """``with budget(): ...`` times the block and fails it when it overruns the criterion's limit."""
    marker = request.node.get_closest_marker("criterion")
    limit = marker.args[2] if marker else None

    @contextmanager
    def timer():
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        request.node.user_properties.append(("elapsed", elapsed))
        if limit is not None:
            assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"

    return timer


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    number, title, limit = marker.args
    entry = _criteria.setdefault(number, {"title": title, "limit": limit, "ok": True, "elapsed": 0.0, "ran": False})
    if rep.failed or (rep.when == "call" and rep.skipped):
        entry["ok"] = False
    if rep.when == "call":
        entry["ran"] = True
        entry["elapsed"] += sum(v for k, v in rep.user_properties if k == "elapsed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        c = _criteria[number]
        status = "PASS" if c["ok"] and c["ran"] else "FAIL"
        tr.write_line(f"AC{number} {status}  {c['title']}  ({c['elapsed']:.2f} s, limit {c['limit']} s)")
