import pytest

from cgdae.study import StudyConfig, run_study

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def report(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def circuit_study():
    return run_study(StudyConfig("circuit", degrees=(1, 2, 3, 4, 5)))


@pytest.fixture(scope="session")
def radau_study():
    return run_study(StudyConfig("circuit", degrees=(), levels=10, baselines=("radau2", "radau3")))


@pytest.fixture(scope="session")
def lobatto_study():
    return run_study(StudyConfig("circuit", degrees=(2, 3), family="gauss-lobatto"))


@pytest.fixture(scope="session")
def heat_linear_study():
    return run_study(StudyConfig("heat", degrees=(1, 2)))


@pytest.fixture(scope="session")
def heat_nonlinear_study():
    return run_study(StudyConfig("heat", degrees=(1,), c1=3.0, c2=1.0))


@pytest.fixture(scope="session")
def pendulum_study():
    return run_study(StudyConfig("pendulum", degrees=(1, 2, 3)))
