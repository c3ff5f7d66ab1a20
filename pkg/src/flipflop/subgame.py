"""Second-stage play: the reduced 2x2 game after the median voter is revealed.

Each candidate either stays at its ex-ante platform or moves to its optimal
adjustment; every other ex-post platform is dominated or redundant, so the
closed forms below are exact for the continuation game.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from flipflop.core import (
    GameParams,
    Identical,
    KnifeEdge,
    Open,
    PlatformPair,
    Secured,
    SubgameStatus,
    WeakFavorite,
    check_median,
    classify,
    optimal_adjustment,
    voter_utility,
)
from flipflop.errors import UnresolvedTieError

ADJUST, STAY = 0, 1


class KnifeEdgePolicy(str, enum.Enum):
    """What to do with measure-zero boundary realizations."""

    RAISE = "raise"
    FAIR_COIN = "fair-coin"
    REJECT = "reject"


@dataclass(frozen=True)
class MixedAction:
    stay_platform: float
    adjust_target: float
    adjust_probability: float

    @property
    def stay_probability(self):
        return 1 - self.adjust_probability


@dataclass(frozen=True)
class SubgameEquilibrium:
    action1: MixedAction
    action2: MixedAction
    expected_payoff1: float
    expected_payoff2: float
    status: SubgameStatus

    def action(self, candidate: int) -> MixedAction:
        return self.action1 if candidate == 1 else self.action2

    def payoff(self, candidate: int) -> float:
        return self.expected_payoff1 if candidate == 1 else self.expected_payoff2


def win_share(u_own, u_opp):
    """Winning probability given both median-voter utilities; ties are a coin toss."""
    if u_own > u_opp:
        return 1
    if u_own < u_opp:
        return 0
    return 0.5


def normal_form(pair: PlatformPair, m, params: GameParams):
    """Payoff bimatrix of the reduced game.

    Returns ``cells[row][col] = (payoff1, payoff2)`` where the row is candidate
    1's action and the column candidate 2's, both indexed ``ADJUST, STAY``.
    """
    check_median(m)
    targets = {}
    for c in (1, 2):
        x = pair.of(c)
        targets[c] = (optimal_adjustment(m, x, params.a(c)), x)
    cells = []
    for act1 in (ADJUST, STAY):
        row = []
        for act2 in (ADJUST, STAY):
            y1, y2 = targets[1][act1], targets[2][act2]
            u1 = voter_utility(m, pair.x1, y1, params.a1)
            u2 = voter_utility(m, pair.x2, y2, params.a2)
            w1 = win_share(u1, u2)
            g1 = w1 - (params.phi if y1 != pair.x1 else 0)
            g2 = (1 - w1) - (params.phi if y2 != pair.x2 else 0)
            row.append((g1, g2))
        cells.append(tuple(row))
    return tuple(cells)


def solve_bimatrix(cells):
    """Equilibrium of a 2x2 bimatrix game by support enumeration.

    Pure equilibria are returned first, in (row, column) order. Returns
    ``(p, q, payoff1, payoff2)`` with ``p``/``q`` the probabilities of the
    first row/column.
    """
    a = [[cells[r][c][0] for c in range(2)] for r in range(2)]
    b = [[cells[r][c][1] for c in range(2)] for r in range(2)]
    for r in range(2):
        for c in range(2):
            if a[r][c] >= a[1 - r][c] and b[r][c] >= b[r][1 - c]:
                return (1 - r, 1 - c, a[r][c], b[r][c])
    # No pure equilibrium: each player mixes to make the other indifferent.
    q = (a[1][1] - a[0][1]) / (a[0][0] - a[0][1] - a[1][0] + a[1][1])
    p = (b[1][1] - b[1][0]) / (b[0][0] - b[1][0] - b[0][1] + b[1][1])
    g1 = q * a[0][0] + (1 - q) * a[0][1]
    g2 = p * b[0][0] + (1 - p) * b[1][0]
    return (p, q, g1, g2)


def _equilibrium(pair, m, params, status, p1, p2, g1, g2):
    return SubgameEquilibrium(
        MixedAction(pair.x1, optimal_adjustment(m, pair.x1, params.a1), p1),
        MixedAction(pair.x2, optimal_adjustment(m, pair.x2, params.a2), p2),
        g1,
        g2,
        status,
    )


def identical_payoffs(params: GameParams):
    """Continuation payoffs when both candidates start from the same platform.

    With equal costs both move and split the seat. With unequal costs the
    candidate with the smaller electoral cost moves and wins outright.
    """
    phi = params.phi
    if params.is_symmetric:
        return (0.5 - phi, 0.5 - phi)
    return (1 - phi, 0) if params.a1 < params.a2 else (0, 1 - phi)


def solve_subgame(
    pair: PlatformPair,
    m,
    params: GameParams,
    knife_edge: KnifeEdgePolicy | str = KnifeEdgePolicy.RAISE,
) -> SubgameEquilibrium:
    """Unique equilibrium of the continuation game after ``m`` is revealed.

    Knife-edge realizations raise :class:`UnresolvedTieError` unless the
    caller opts into ``fair-coin`` resolution, in which case the tie-aware
    normal form is solved directly.
    """
    check_median(m)
    knife_edge = KnifeEdgePolicy(knife_edge)
    status = classify(pair, m, params)
    phi = params.phi

    if isinstance(status, Secured):
        g = (1, 0) if status.favorite == 1 else (0, 1)
        return _equilibrium(pair, m, params, status, 0, 0, *g)
    if isinstance(status, Open):
        fav = status.favorite
        p = (1 - phi, phi) if fav == 1 else (phi, 1 - phi)
        g = (1 - phi, 0) if fav == 1 else (0, 1 - phi)
        return _equilibrium(pair, m, params, status, *p, *g)
    if isinstance(status, WeakFavorite):
        strong = status.strong_challenger
        p = (1, 0) if strong == 1 else (0, 1)
        g = (1 - phi, 0) if strong == 1 else (0, 1 - phi)
        return _equilibrium(pair, m, params, status, *p, *g)
    if isinstance(status, Identical):
        g = identical_payoffs(params)
        if params.is_symmetric:
            p = (1, 1)
        else:
            p = (1, 0) if params.a1 < params.a2 else (0, 1)
        return _equilibrium(pair, m, params, status, *p, *g)

    assert isinstance(status, KnifeEdge)
    if knife_edge is not KnifeEdgePolicy.FAIR_COIN:
        raise UnresolvedTieError(f"knife-edge subgame at m={m!r}: {status.reason}")
    p1, p2, g1, g2 = solve_bimatrix(normal_form(pair, m, params))
    return _equilibrium(pair, m, params, status, p1, p2, g1, g2)


def expected_payoffs(pair: PlatformPair, m, params: GameParams, p1, p2):
    """Expected payoffs when candidate ``i`` adjusts with probability ``p_i``."""
    cells = normal_form(pair, m, params)
    probs1, probs2 = (p1, 1 - p1), (p2, 1 - p2)
    g1 = g2 = 0
    for r in range(2):
        for c in range(2):
            w = probs1[r] * probs2[c]
            g1 += w * cells[r][c][0]
            g2 += w * cells[r][c][1]
    return g1, g2
