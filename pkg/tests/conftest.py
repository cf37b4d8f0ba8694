import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from edgecache.topology import build_grid, cost_matrix, costs_from_array

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture
def line3():
    return cost_matrix(build_grid(1, 3))


def random_costs(rng, M, U, hi=10):
    """Random cost table with c0 strictly above every SCBS entry."""
    sc = rng.integers(0, hi, size=(M, U))
    c0 = np.full((1, U), hi + int(rng.integers(1, 5)))
    return costs_from_array(np.vstack([c0, sc]))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=_criterion_order):
        terminalreporter.write_line(line)


def _criterion_order(line):
    import re
    m = re.search(r"criterion (\d+)", line)
    return (int(m.group(1)) if m else 8, 0 if m else 1)
