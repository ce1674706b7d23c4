import os

import pytest
from hypothesis import HealthCheck, settings

from hysterm.heat import build_grid
from hysterm.hysteresis import Thresholds

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def th():
    return Thresholds(-0.1, 0.1)


@pytest.fixture(scope="session")
def desk_grid():
    return build_grid(401, 1e-5, 0.01)


class _DeskRuns:
    """Fixed-point and relay runs of each preset on the desk grid, computed once."""

    def __init__(self, grid):
        from hysterm.hysteresis import Thresholds

        self.grid = grid
        self.th = Thresholds(-0.1, 0.1)
        self._cache = {}

    def __call__(self, name):
        if name not in self._cache:
            from hysterm.free_boundary import classify_branches, fixed_point_iterate
            from hysterm.hysteresis import simulate_relay
            from hysterm.presets import build_preset

            p = build_preset(name, self.th, self.grid)
            branches = classify_branches(p.phi, p.H0, self.th, self.grid)
            fp = fixed_point_iterate(p.phi, branches, p.H0, self.grid)
            sol = simulate_relay(p.phi, p.H0, self.th, self.grid)
            self._cache[name] = (p, branches, fp, sol)
        return self._cache[name]


@pytest.fixture(scope="session")
def desk_runs(desk_grid):
    return _DeskRuns(desk_grid)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
