from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from flipflop import GameParams, PlatformPair

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []

costs = st.floats(min_value=0.05, max_value=5.0, allow_nan=False)
org_costs = st.floats(min_value=0.01, max_value=0.49, allow_nan=False)
coords = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def distinct_pairs(draw, min_gap=1e-3):
    x1 = draw(coords)
    x2 = draw(coords.filter(lambda v: abs(v - x1) >= min_gap))
    return PlatformPair(x1, x2)


@st.composite
def game_params(draw, symmetric=False):
    a1 = draw(costs)
    a2 = a1 if symmetric else draw(costs)
    return GameParams(a1, a2, draw(org_costs))


@pytest.fixture
def sym():
    """a = 1/3 (alpha = 2), phi = 0.3."""
    return GameParams.symmetric(1 / 3, 0.3)


@pytest.fixture
def asym():
    """a1 = 1/8, a2 = 1/3 (alphas 3 and 2), phi = 0.45."""
    return GameParams(1 / 8, 1 / 3, 0.45)


@pytest.fixture
def sym_exact():
    return GameParams.symmetric(Fraction(1, 3), Fraction(3, 10))


@pytest.fixture
def asym_exact():
    return GameParams(Fraction(1, 8), Fraction(1, 3), Fraction(9, 20))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def contested_configs(draw, symmetric=False):
    """``(params, pair, m)`` with ``m`` strictly between the two secured intervals."""
    from flipflop import secured_interval

    params = draw(game_params(symmetric=symmetric))
    pair = draw(distinct_pairs(min_gap=1e-2))
    left = 1 if pair.x1 < pair.x2 else 2
    lo = secured_interval(left, pair, params).hi
    hi = secured_interval(3 - left, pair, params).lo
    t = draw(st.floats(0.001, 0.999))
    return params, pair, lo + t * (hi - lo)
