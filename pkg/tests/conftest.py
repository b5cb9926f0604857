import pathlib

import pytest
from hypothesis import HealthCheck, settings

from bayescond.measure import GridSpec

ROOT = pathlib.Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
FIXTURES = pathlib.Path(__file__).resolve().parent / "fixtures"

settings.register_profile(
    "repo", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def grid():
    return GridSpec(nodes=4096)


@pytest.fixture(scope="session")
def fine_grid():
    return GridSpec(nodes=100_000)


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__ == "test_acceptance" and item.name.startswith("test_criterion_"):
        if rep.when == "call" or (rep.when == "setup" and not rep.passed):
            label = (item.obj.__doc__ or item.name).strip().splitlines()[0]
            _ACCEPTANCE[item.name] = (label, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        label, status = _ACCEPTANCE[name]
        number = name.split("_")[2]
        terminalreporter.write_line(f"criterion {number}: {status}  {label}")
