import numpy as np
import pytest

from transdist.distributions import DistSpec, FamilyId

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion label")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    _ACCEPTANCE.append((label, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, outcome in _ACCEPTANCE:
        tr.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {label}")


@pytest.fixture(autouse=True)
def _criterion_label(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        record_property("criterion", marker.args[0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sas15():
    return DistSpec(FamilyId.SAS, 1.5, 2.0)
