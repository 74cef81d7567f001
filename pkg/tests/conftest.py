import pytest

from chamberwalk import gallery


@pytest.fixture(scope="session")
def braid3():
    return gallery.braid(3)


@pytest.fixture(scope="session")
def boolean2():
    return gallery.boolean(2)


@pytest.fixture(scope="session")
def fig1():
    return gallery.figure1()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
