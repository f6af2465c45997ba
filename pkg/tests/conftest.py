import pytest

from cuspidal.io import load_fixture
from cuspidal.modform import eta_quotient, level1_newforms

ACCEPTANCE_LINES: list[str] = []

NEWFORM = dict(is_newform=True, prime_to_N_eigenform=True, twist_minimal=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def delta():
    return eta_quotient([(1, 24)], 3000, label="Delta").replace(**NEWFORM)


@pytest.fixture(scope="session")
def level6():
    return eta_quotient([(1, 2), (2, 2), (3, 2), (6, 2)], 3000, label="level6").replace(**NEWFORM)


@pytest.fixture(scope="session")
def f2():
    return eta_quotient([(1, 6), (3, 6)], 3000, label="f2").replace(**NEWFORM)


@pytest.fixture(scope="session")
def f3():
    return eta_quotient([(2, 4), (4, 4)], 3000, label="f3").replace(**NEWFORM)


@pytest.fixture(scope="session")
def level7_wt3():
    # eta(z)^3 eta(7z)^3: weight 3, level 7, character (-7/.)
    return eta_quotient([(1, 3), (7, 3)], 3000, label="level7").replace(**NEWFORM)


@pytest.fixture(scope="session")
def f27():
    return load_fixture("level27_wt4")


@pytest.fixture(scope="session")
def f25():
    return load_fixture("level25_wt4")


@pytest.fixture(scope="session")
def f4():
    return load_fixture("level9_wt8")


@pytest.fixture(scope="session")
def f81():
    return load_fixture("level81_wt6")


@pytest.fixture(scope="session")
def h24():
    return level1_newforms(24, 3000)[0]


@pytest.fixture(scope="session")
def h18():
    return level1_newforms(18, 3000)[0]
