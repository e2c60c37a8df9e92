import numpy as np
import pytest

from lowmode import assemble_operator, assemble_rhs, make_grid, manufactured_problem, sample_field


class Case:
    """A manufactured problem assembled on one grid."""

    def __init__(self, name, m, averaging="midpoint"):
        self.problem = manufactured_problem(name)
        self.grid = make_grid(m)
        self.A = assemble_operator(self.grid, self.problem.kappa, averaging)
        self.F = assemble_rhs(self.grid, self.problem.f)
        self.u_exact = sample_field(self.grid, self.problem.u_exact)


@pytest.fixture(scope="session")
def case():
    cache = {}

    def get(name, m):
        if (name, m) not in cache:
            cache[name, m] = Case(name, m)
        return cache[name, m]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
