import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cavitation import critical_lambda, penalty_material, power_law_material, solve_punctured  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def m1():
    """Example 1: n=3, kappa=1, power law C=1, gamma=2, delta=2, stress free."""
    return power_law_material()


@pytest.fixture(scope="session")
def m2():
    """Example 2 with C=20: n=3, kappa=3, penalty law, D=1.5."""
    return penalty_material(20.0)


@pytest.fixture(scope="session")
def bundles(m1):
    """Converged Example 1 solves keyed by ``(lam, eps)``, computed on demand."""
    cache = {}

    def get(lam, eps, **kw):
        key = (lam, eps, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = solve_punctured(m1, lam, eps, **kw)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def critical(m1):
    return critical_lambda(m1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
