import pytest

from riopt.config import BUILTIN, parse_config
from riopt.problem import sample_feasible


@pytest.fixture(scope="session")
def ex31():
    return parse_config(BUILTIN["example31"]).problem()


@pytest.fixture(scope="session")
def ex32():
    return parse_config(BUILTIN["example32"]).problem()


@pytest.fixture(scope="session")
def ex31_sample(ex31):
    return sample_feasible(ex31, 1000, 0)


@pytest.fixture(scope="session")
def ex32_sample(ex32):
    return sample_feasible(ex32, 300, 0)


_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        if hasattr(rep, "wasxfail"):
            verdict = "FAIL (expected: claim is false, see test)"
        else:
            verdict = "PASS" if rep.passed else "FAIL"
        _ACCEPTANCE.append((str(mark.args[0]), mark.args[1], verdict))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, title, verdict in _ACCEPTANCE:
        terminalreporter.write_line(f"criterion {label:>3}: {verdict:<5} {title}")
