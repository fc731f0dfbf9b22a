import pytest

from foldylax.capacitance import capacitance_matrix
from foldylax.geometry import make_sphere_mesh
from foldylax.kernels import LameParameters

ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} :: {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return passed


@pytest.fixture
def acceptance(capsys):
    """Print a PASS/FAIL line straight to the terminal, bypassing capture."""

    def report(number, title, passed, detail):
        with capsys.disabled():
            print()
            record_acceptance(number, title, passed, detail)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def lame11():
    return LameParameters(1.0, 1.0)


@pytest.fixture(scope="session")
def sphere2():
    return make_sphere_mesh(2)


@pytest.fixture(scope="session")
def sphere3():
    return make_sphere_mesh(3)


@pytest.fixture(scope="session")
def cap2(sphere2, lame11):
    return capacitance_matrix(sphere2, lame11)


@pytest.fixture(scope="session")
def cap3(sphere3, lame11):
    return capacitance_matrix(sphere3, lame11)
