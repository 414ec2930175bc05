import pytest

from epsolve.problems import BallProblem, NashCournotProblem
from epsolve.solvers import benchmark_configs, solve


@pytest.fixture(scope="session")
def ball_runs():
    """All five benchmark configurations on the three ball cases, with Gamma recorded."""
    out = {}
    for case in (1, 2, 3):
        prob = BallProblem(case=case)
        x0, x1 = prob.initial_points()
        for name, (key, cfg) in benchmark_configs(prob, record_gamma=True).items():
            out[case, name] = (prob, cfg, solve(key, prob, x0, x1, cfg, name=name))
    return out


@pytest.fixture(scope="session")
def small_nash_cournot():
    return NashCournotProblem.generate(5, 3)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
