from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from groupoid_nonprop.formats import load_model

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

DATA = Path(__file__).resolve().parents[1] / "src" / "groupoid_nonprop" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def step_system():
    return load_model(DATA / "step_z.model")


@pytest.fixture(scope="session")
def free_system():
    return load_model(DATA / "free_z.model")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: dict[int, tuple[str, str, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    _, status, secs = _CRITERIA.get(n, (title, "PASS", 0.0))
    if rep.failed or (rep.when == "call" and rep.skipped):
        status = "FAIL"
    _CRITERIA[n] = (title, status, secs + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, status, secs = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}  {title} ({secs:.1f}s)")
