import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from flipflop import (
    SPNE,
    BoundaryUnspecifiedError,
    EpsilonEquilibrium,
    GameParams,
    InvalidInputError,
    NoBestResponseError,
    NoEquilibrium,
    Open,
    PlatformPair,
    Secured,
    WeakFavorite,
    best_response,
    closed_form_g1,
    exante_payoff,
    psi,
    region_partition,
    solve_first_stage,
    solve_subgame,
)
from flipflop.core import KnifeEdge, classify, relabel_status
from flipflop.first_stage import (
    adjacent_limit,
    epsilon_loss_coefficient,
    response_breakpoints,
    response_threshold,
    spne_positions,
)
from flipflop.kernels import exante_payoff_grid

from conftest import costs, distinct_pairs, game_params, org_costs


def alpha_of(a):
    return math.sqrt((1 + a) / a)


def symmetric_spne_payoff(a, phi):
    """Independent closed form: 1/2 - (phi/2) * ((alpha - 1)/(alpha + 1))**2."""
    r = (alpha_of(a) - 1) / (alpha_of(a) + 1)
    return 0.5 - phi / 2 * r * r


# --- thresholds --------------------------------------------------------------


@pytest.mark.parametrize("a, expected", [(1 / 3, 3 / 11), (1 / 8, 0.4)])
def test_psi_values(a, expected):
    assert psi(a) == pytest.approx(expected, abs=1e-15)


def test_psi_decreasing_and_crosses_half():
    grid = np.geomspace(1e-3, 50, 400)
    values = np.array([psi(a) for a in grid])
    assert np.all(np.diff(values) < 0) and np.all(values < 1)
    below_half = values < 0.5
    expected = 4 * np.sqrt(grid * (1 + grid)) > 1
    assert np.array_equal(below_half, expected)


def test_psi_rejects_bad_cost():
    with pytest.raises(InvalidInputError):
        psi(0)


@given(a=costs, phi=org_costs)
def test_response_threshold_reduces_to_psi(a, phi):
    params = GameParams.symmetric(a, phi)
    assert response_threshold(1, params) == pytest.approx(psi(a), rel=1e-12)
    assert response_threshold(2, params) == pytest.approx(psi(a), rel=1e-12)


def test_response_thresholds_asymmetric(asym):
    assert response_threshold(1, asym) == pytest.approx(3 / 13, abs=1e-15)
    assert response_threshold(2, asym) == pytest.approx(4 / 9, abs=1e-15)


@given(params=game_params())
def test_response_thresholds_dominate_psi(params):
    top = max(response_threshold(1, params), response_threshold(2, params))
    assert top >= max(psi(params.a1), psi(params.a2)) - 1e-15


# --- region partition --------------------------------------------------------


def test_region_partition_symmetric(sym):
    parts = region_partition(PlatformPair(1 / 3, 2 / 3), sym)
    assert parts.boundaries == pytest.approx([0, 4 / 9, 1 / 2, 5 / 9, 1], abs=1e-15)
    assert [r.status for r in parts] == [Secured(1), Open(1), Open(2), Secured(2)]
    assert parts.open_probability == pytest.approx(1 / 9, abs=1e-15)


def test_region_partition_asymmetric(asym):
    parts = region_partition(PlatformPair(2 / 5, 4 / 5), asym)
    assert parts.boundaries == pytest.approx([0, 8 / 15, 3 / 5, 16 / 25, 7 / 10, 1], abs=1e-15)
    assert [r.status for r in parts] == [Secured(1), Open(1), WeakFavorite(2, 1), Open(2), Secured(2)]
    assert parts.measure(WeakFavorite) == pytest.approx(0.04, abs=1e-15)


def test_region_partition_rejects_identical(sym):
    with pytest.raises(InvalidInputError):
        region_partition(PlatformPair(0.3, 0.3), sym)


@given(params=game_params(), pair=distinct_pairs())
def test_region_partition_mirrors(params, pair):
    parts = region_partition(pair, params)
    mirror = region_partition(PlatformPair(1 - pair.x2, 1 - pair.x1), params.swapped())
    assert len(parts) == len(mirror)
    for r, q in zip(parts, reversed(mirror.regions)):
        assert q.status == relabel_status(r.status)
        assert (q.lo, q.hi) == pytest.approx((1 - r.hi, 1 - r.lo), abs=1e-12)


@given(params=game_params(), pair=distinct_pairs(), t=st.floats(0.01, 0.99))
def test_region_partition_covers_and_matches_subgames(params, pair, t):
    parts = region_partition(pair, params)
    assert parts.regions[0].lo == 0 and parts.regions[-1].hi == 1
    for a, b in zip(parts.regions, parts.regions[1:]):
        assert a.hi == b.lo and a.lo < a.hi and a.status != b.status
    for r in parts:
        m = r.lo + t * (r.hi - r.lo)
        if isinstance(classify(pair, m, params), KnifeEdge):
            continue
        eq = solve_subgame(pair, m, params)
        assert eq.status == r.status
        assert (eq.expected_payoff1, eq.expected_payoff2) == pytest.approx((r.payoff1, r.payoff2))


# --- ex-ante payoffs ---------------------------------------------------------


def test_exante_payoff_at_symmetric_equilibrium(sym):
    g = exante_payoff(PlatformPair(1 / 3, 2 / 3), sym)
    assert g == pytest.approx((29 / 60, 29 / 60), abs=1e-15)


@pytest.mark.parametrize("x", [0.0, 0.3, 0.5, 1.0])
def test_exante_payoff_identical(sym, x):
    assert exante_payoff(PlatformPair(x, x), sym) == pytest.approx((0.2, 0.2))


def test_exante_payoff_identical_unequal_costs(asym):
    # the more flexible candidate moves and wins every election
    assert exante_payoff(PlatformPair(0.6, 0.6), asym) == pytest.approx((0.55, 0.0))


@pytest.mark.parametrize("x2", [0.5, 0.6, 0.8, 1.0])
def test_payoff_jumps_down_at_collision(sym, x2):
    limits = [exante_payoff(PlatformPair(x2 - d, x2), sym)[0] for d in (1e-3, 1e-6, 1e-9)]
    errors = [abs(g - x2 * (1 - sym.phi)) for g in limits]
    assert errors[0] > errors[1] > errors[2] and errors[2] < 1e-9
    assert x2 * (1 - sym.phi) > exante_payoff(PlatformPair(x2, x2), sym)[0] == pytest.approx(0.2)


@given(params=game_params(), pair=distinct_pairs())
def test_exante_payoffs_bounded(params, pair):
    g1, g2 = exante_payoff(pair, params)
    assert 0 <= g1 <= 1 and 0 <= g2 <= 1 and g1 + g2 <= 1 + 1e-12


@given(params=game_params(), pair=distinct_pairs())
def test_exante_payoff_label_symmetry(params, pair):
    g1, g2 = exante_payoff(pair, params)
    h1, h2 = exante_payoff(pair.swapped(), params.swapped())
    assert (h1, h2) == pytest.approx((g2, g1), abs=1e-12)


# --- closed form -------------------------------------------------------------


def test_closed_form_example(sym):
    assert closed_form_g1(PlatformPair(1 / 3, 2 / 3), sym) == pytest.approx(29 / 60, abs=1e-15)


def test_closed_form_requires_equal_costs_and_order(sym, asym):
    with pytest.raises(InvalidInputError):
        closed_form_g1(PlatformPair(0.2, 0.7), asym)
    with pytest.raises(InvalidInputError):
        closed_form_g1(PlatformPair(0.7, 0.2), sym)


@given(a=costs, phi=org_costs, x2=st.floats(0.01, 1.0))
def test_closed_form_continuous_at_junction(a, phi, x2):
    params = GameParams.symmetric(a, phi)
    al = params.alpha1
    half = (1 - phi) / 2
    x1 = x2 / al
    piece1 = x1 * (half + phi * al / (al + 1)) + x2 * (half + phi / (al + 1))
    k = 2 * phi * al / (al * al - 1)
    piece2 = x1 * (half - k) + x2 * (half + k)
    assert piece1 == pytest.approx(piece2, abs=1e-12)
    assert closed_form_g1(PlatformPair(x1, x2), params) == pytest.approx(piece1, abs=1e-12)


@given(a=costs, phi=org_costs)
def test_closed_form_slope_sign(a, phi):
    params = GameParams.symmetric(a, phi)
    assume(abs(phi - psi(a)) > 1e-9)
    x2 = 0.9
    x_lo, x_hi = x2 / params.alpha1 + 0.01, x2 - 0.01
    slope = closed_form_g1(PlatformPair(x_hi, x2), params) - closed_form_g1(PlatformPair(x_lo, x2), params)
    assert (slope < 0) == (phi > psi(a))


@given(params=game_params(symmetric=True), pair=distinct_pairs())
def test_closed_form_matches_integration(params, pair):
    assume(pair.x1 < pair.x2)
    assert closed_form_g1(pair, params) == pytest.approx(exante_payoff(pair, params)[0], abs=1e-12)


# --- best responses ----------------------------------------------------------


def test_best_response_symmetric(sym):
    assert best_response(2 / 3, 1, sym) == pytest.approx(1 / 3, abs=1e-15)
    assert best_response(1 / 3, 2, sym) == pytest.approx(2 / 3, abs=1e-15)


def test_best_response_asymmetric(asym):
    assert best_response(4 / 5, 1, asym) == pytest.approx(2 / 5, abs=1e-15)
    assert best_response(2 / 5, 2, asym) == pytest.approx(4 / 5, abs=1e-15)


def test_no_best_response_below_threshold():
    params = GameParams.symmetric(1 / 3, 0.1)
    with pytest.raises(NoBestResponseError):
        best_response(2 / 3, 1, params)


def test_best_response_boundary():
    params = GameParams.symmetric(1 / 3, 3 / 11)
    with pytest.raises(BoundaryUnspecifiedError):
        best_response(2 / 3, 1, params)


@given(a=costs, phi=org_costs, x=st.floats(0.05, 0.95))
def test_best_response_beats_dense_grid(a, phi, x):
    params = GameParams.symmetric(a, phi)
    assume(phi > psi(a) + 1e-6)
    try:
        br = best_response(x, 1, params)
    except NoBestResponseError:
        return
    g_star = exante_payoff(PlatformPair(br, x), params)[0] if br != x else 0.5 - phi
    grid = np.linspace(0.0, 1.0, 4001)
    assert exante_payoff_grid(grid, x, 1, params).max() <= g_star + 1e-12


# --- equilibria --------------------------------------------------------------


def test_symmetric_spne(sym):
    sol = solve_first_stage(sym)
    assert isinstance(sol, SPNE)
    assert (sol.x1_star, sol.x2_star) == pytest.approx((1 / 3, 2 / 3), abs=1e-15)
    assert (sol.payoff1, sol.payoff2) == pytest.approx((29 / 60, 29 / 60), abs=1e-15)


def test_asymmetric_spne(asym):
    sol = solve_first_stage(asym)
    assert isinstance(sol, SPNE) and sol.left == 1
    assert (sol.x1_star, sol.x2_star) == pytest.approx((0.4, 0.8), abs=1e-15)
    mid = (sol.x1_star + sol.x2_star) / 2
    a1, a2 = asym.alpha1, asym.alpha2
    assert mid == pytest.approx(0.5 + (a1 - a2) / (2 * (a1 * a2 - 1)), abs=1e-15)
    # integrated payoffs against the landmark closed form
    m_hi, m_tilde, n_lo, phi = 8 / 15, 16 / 25, 7 / 10, asym.phi
    assert sol.payoff1 == pytest.approx(m_hi + (1 - phi) * (m_tilde - m_hi), abs=1e-12)
    assert sol.payoff2 == pytest.approx((1 - n_lo) + (1 - phi) * (n_lo - m_tilde), abs=1e-12)


def test_mirror_image_equilibrium(asym):
    sol = solve_first_stage(asym, left=2)
    assert isinstance(sol, SPNE) and sol.left == 2
    assert (sol.x1_star, sol.x2_star) == pytest.approx((0.6, 0.2), abs=1e-15)
    base = solve_first_stage(asym)
    assert (sol.payoff1, sol.payoff2) == pytest.approx((base.payoff1, base.payoff2), abs=1e-12)


def test_default_orientation_puts_cheaper_candidate_left(asym):
    sol = solve_first_stage(asym.swapped())
    assert sol.left == 2 and (sol.x2_star, sol.x1_star) == pytest.approx((0.4, 0.8))


def test_epsilon_equilibrium():
    sol = solve_first_stage(GameParams.symmetric(1 / 3, 0.1))
    assert isinstance(sol, EpsilonEquilibrium) and sol.center == 0.5
    # slope of the deviation gain: (1 - phi) - 4 alpha phi / (alpha^2 - 1)
    assert sol.loss_coefficient == pytest.approx(0.9 - 0.8 / 3, abs=1e-15)
    assert sol.profile(0.01) == PlatformPair(0.49, 0.51)
    with pytest.raises(InvalidInputError):
        sol.profile(0.0)


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_epsilon_deviation_gain_bounded_by_coefficient(eps):
    params = GameParams.symmetric(1 / 3, 0.1)
    coef = epsilon_loss_coefficient(params)
    grid_size = 1_000_001
    x1, x2 = 0.5 - eps, 0.5 + eps
    g = exante_payoff(PlatformPair(x1, x2), params)[0]
    best = exante_payoff_grid(np.linspace(0, 1, grid_size), x2, 1, params).max()
    slack = 1 / (grid_size - 1)
    assert best - g <= coef * eps + slack
    assert best - g >= coef * eps - slack  # the bound is tight


def test_threshold_boundary_refused():
    with pytest.raises(BoundaryUnspecifiedError):
        solve_first_stage(GameParams.symmetric(1 / 3, 3 / 11))


def test_asymmetric_below_threshold_has_no_equilibrium():
    sol = solve_first_stage(GameParams(1 / 8, 1 / 3, 0.3))
    assert isinstance(sol, NoEquilibrium) and "threshold" in sol.reason


def test_stiffer_candidate_threshold_binds():
    # phi sits above both psi values yet below candidate 2's response threshold
    params = GameParams(1 / 8, 1 / 3, 0.42)
    assert max(psi(params.a1), psi(params.a2)) < 0.42 < response_threshold(2, params)
    assert isinstance(solve_first_stage(params), NoEquilibrium)
    x1, x2 = spne_positions(params, 1)
    g2 = exante_payoff(PlatformPair(x1, x2), params)[1]
    grid = np.linspace(0.0, 1.0, 10_001)
    values = exante_payoff_grid(grid, x1, 2, params)
    assert values.max() > g2 + 1e-3
    # the profitable deviation is a kink well inside the side peak
    assert best_response(x1, 2, params) == pytest.approx(0.6, abs=1e-12)
    assert abs(grid[np.argmax(values)] - 0.6) <= 1e-4


def test_flexible_candidate_prefers_collision():
    a1 = 1 / (1.19**2 - 1)
    a2 = 1 / (1.157**2 - 1)
    params = GameParams(a1, a2, 0.3)
    assert 0.3 > max(response_threshold(1, params), response_threshold(2, params))
    sol = solve_first_stage(params)
    assert isinstance(sol, NoEquilibrium) and "candidate 1" in sol.reason
    x1, x2 = spne_positions(params, 1)
    g1 = exante_payoff(PlatformPair(x1, x2), params)[0]
    collide = exante_payoff(PlatformPair(x2, x2), params)[0]
    assert collide == pytest.approx(0.7)
    assert collide > g1
    assert best_response(x2, 1, params) == x2


def test_stiffer_candidate_leapfrogs():
    params = GameParams(1.0, 2.0, 0.375)
    x1, x2 = spne_positions(params, 1)
    g2 = exante_payoff(PlatformPair(x1, x2), params)[1]
    y = best_response(x1, 2, params)
    assert y < x1
    gain = exante_payoff(PlatformPair(x1, y), params)[1] - g2
    assert gain > 0.1
    sol = solve_first_stage(params)
    assert isinstance(sol, NoEquilibrium) and "candidate 2" in sol.reason


def test_asymmetric_spne_certified(asym):
    sol = solve_first_stage(asym)
    assert isinstance(sol, SPNE)
    assert best_response(sol.x2_star, 1, asym) == pytest.approx(0.4, abs=1e-12)
    assert best_response(sol.x1_star, 2, asym) == pytest.approx(0.8, abs=1e-12)


@given(params=game_params())
def test_spne_implies_phi_above_every_threshold(params):
    try:
        sol = solve_first_stage(params)
    except BoundaryUnspecifiedError:
        return
    if isinstance(sol, SPNE):
        assert params.phi > max(psi(params.a1), psi(params.a2))
        assert params.phi > max(response_threshold(1, params), response_threshold(2, params))
    elif isinstance(sol, EpsilonEquilibrium):
        assert params.is_symmetric and params.phi < psi(params.a1)
    else:
        assert not params.is_symmetric


@given(params=game_params(symmetric=True))
def test_spne_is_a_fixed_point_and_global_maximum(params):
    try:
        sol = solve_first_stage(params)
    except BoundaryUnspecifiedError:
        return
    assume(isinstance(sol, SPNE))
    assert best_response(sol.x2_star, 1, params) == pytest.approx(sol.x1_star, abs=1e-12)
    assert best_response(sol.x1_star, 2, params) == pytest.approx(sol.x2_star, abs=1e-12)
    grid = np.linspace(0.0, 1.0, 10_001)
    assert exante_payoff_grid(grid, sol.x2_star, 1, params).max() <= sol.payoff1 + 1e-9
    assert exante_payoff_grid(grid, sol.x1_star, 2, params).max() <= sol.payoff2 + 1e-9


@given(a=costs, phi=org_costs)
def test_symmetric_payoff_identity(a, phi):
    params = GameParams.symmetric(a, phi)
    assume(phi > psi(a) + 1e-9)
    sol = solve_first_stage(params)
    al = alpha_of(a)
    assert (sol.x1_star, sol.x2_star) == pytest.approx((1 / (al + 1), al / (al + 1)), abs=1e-12)
    assert sol.payoff1 == pytest.approx(symmetric_spne_payoff(a, phi), abs=1e-12)
    r = (al - 1) / (al + 1)
    assert region_partition(sol.pair, params).open_probability == pytest.approx(r * r, abs=1e-12)


def test_polarization_open_probability_and_payoff_monotone_in_cost():
    phi = 0.45
    rows = []
    for a in np.linspace(0.1, 5, 120):
        params = GameParams.symmetric(float(a), phi)
        assert phi > psi(a)
        sol = solve_first_stage(params)
        rows.append((sol.x2_star - sol.x1_star, region_partition(sol.pair, params).open_probability,
                     sol.payoff1))
    pol, open_p, pay = map(np.array, zip(*rows))
    assert np.all(np.diff(pol) < 0) and np.all(np.diff(open_p) < 0) and np.all(np.diff(pay) > 0)


@pytest.mark.parametrize("a2, phi", [(1 / 3, 0.45), (0.2, 0.49)])
def test_asymmetric_comparative_statics(a2, phi):
    rows = []
    for a1 in np.linspace(0.05, a2, 60)[:-1]:
        sol = solve_first_stage(GameParams(float(a1), a2, phi))
        if isinstance(sol, SPNE):
            rows.append((sol.x1_star, sol.payoff1, sol.payoff2))
    assert len(rows) >= 5
    # rows run in increasing a1; lower a1 means closer to the center
    x1, g1, g2 = map(np.array, zip(*rows))
    assert np.all(np.diff(np.abs(x1 - 0.5)) > 0)
    assert np.all(np.diff(g1) <= 1e-15) and np.all(np.diff(g2) > 0)


@given(params=game_params(), opp=st.floats(0.01, 0.99), c=st.sampled_from([1, 2]),
       side=st.sampled_from(["left", "right"]))
def test_adjacent_limit_matches_nearby_payoff(params, opp, c, side):
    # the payoff is affine next to the opponent, so the gap shrinks linearly
    limit = adjacent_limit(opp, c, params, side)

    def gap(delta):
        y = opp - delta if side == "left" else opp + delta
        pair = PlatformPair(y, opp) if c == 1 else PlatformPair(opp, y)
        return abs(exante_payoff(pair, params)[c - 1] - limit)

    assert gap(1e-10) <= gap(1e-7) / 100 + 1e-12


@given(params=game_params(), opp=st.floats(0, 1), c=st.sampled_from([1, 2]))
def test_breakpoints_cover_the_unit_interval(params, opp, c):
    points = response_breakpoints(opp, c, params)
    assert points[0] == 0 and points[-1] == 1 and opp in points
    assert points == sorted(points)
