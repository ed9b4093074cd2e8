from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from simim.alpha import solve_alpha_surface
from simim.config import config_from_dict
from simim.market import DiscountCurve, LgdAssumption, RatingTable
from simim.rates import HullWhiteParams
from simim.runner import prepare_netting_set


@pytest.fixture(scope="session")
def flat_curve():
    return DiscountCurve.flat(0.02)


@pytest.fixture(scope="session")
def params(flat_curve):
    return HullWhiteParams(0.05, 0.01, flat_curve)


@pytest.fixture(scope="session")
def ratings():
    return RatingTable.default()


@pytest.fixture(scope="session")
def lgd():
    return LgdAssumption()


@pytest.fixture(scope="session")
def desk_config():
    """Default desk configuration: 10,000 paths, monthly grid, six trades, seven ratings."""
    return config_from_dict({"simulation": {"seed": 7}})


@pytest.fixture(scope="session")
def desk_cubes(desk_config):
    p = HullWhiteParams(desk_config.a, desk_config.sigma, desk_config.market.curve)
    return {tc.label: prepare_netting_set(desk_config, p, tc) for tc in desk_config.trades}


@pytest.fixture(scope="session")
def desk_surface(desk_config, desk_cubes):
    m = desk_config.market
    return solve_alpha_surface({k: (v[1], v[2]) for k, v in desk_cubes.items()},
                               m.ratings, m.lgd, m.curve)


def pytest_terminal_summary(terminalreporter):
    import helpers

    if helpers.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(helpers.ACCEPTANCE_LINES, key=lambda s: int(s[2:4])):
            terminalreporter.write_line(line)
