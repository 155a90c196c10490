from __future__ import annotations

import pytest
from hypothesis import settings

from pbr.casestudy import TEAM_ID, case_study_sprint
from pbr.model import Team, default_catalog
from pbr.store import Repository

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_criteria: dict[int, tuple[str, str]] = {}


@pytest.fixture
def catalog():
    return default_catalog()


@pytest.fixture
def sprint():
    return case_study_sprint()


@pytest.fixture
def repo(tmp_path):
    r = Repository.init(tmp_path / "repo")
    r.save_team(Team(TEAM_ID, "SoftwarePeople"))
    return r


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        previous = _criteria.get(number, (title, "PASS"))[1]
        status = "PASS" if report.passed and previous == "PASS" else "FAIL"
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] {number}. {title}")
