"""Ex-ante payoffs, best responses and subgame-perfect equilibria.

Ex-ante payoffs are obtained by integrating the piecewise-constant
continuation payoffs over the uniform median: the boundaries of every status
region are roots of a handful of linear equations in ``m``, so the integral is
a finite sum of interval lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from flipflop.core import (
    GameParams,
    KnifeEdge,
    Open,
    PlatformPair,
    Secured,
    SubgameStatus,
    WeakFavorite,
    alpha,
    classify,
    other,
)
from flipflop.errors import (
    BoundaryUnspecifiedError,
    InvalidInputError,
    NoBestResponseError,
)
from flipflop.subgame import identical_payoffs


def psi(a) -> float:
    """Organizational-cost threshold above which divergent platforms are an equilibrium."""
    alpha(a)  # domain check
    return 1 / (1 + 4 * math.sqrt(a * (1 + a)))


def response_threshold(responder: int, params: GameParams) -> float:
    """Cost above which the responder's payoff peaks strictly inside its own side.

    On the segment where its secured interval reaches no boundary of [0, 1],
    the responder's payoff moves with its platform at rate
    ``2 phi / (b**2 - 1) - (1 - phi) / (alpha_own + b)`` (times a positive
    factor), ``b`` being the opponent's alpha. The threshold is where that
    slope changes sign. With equal costs it reduces to :func:`psi`.
    """
    b = params.alpha_of(other(responder))
    s = params.alpha1 + params.alpha2
    return (b * b - 1) / (b * b - 1 + 2 * s)


# --- region integration ------------------------------------------------------


def status_payoffs(status: SubgameStatus, phi):
    """Continuation payoffs attached to a non-degenerate status."""
    if isinstance(status, Secured):
        return (1, 0) if status.favorite == 1 else (0, 1)
    if isinstance(status, Open):
        return (1 - phi, 0) if status.favorite == 1 else (0, 1 - phi)
    if isinstance(status, WeakFavorite):
        return (1 - phi, 0) if status.strong_challenger == 1 else (0, 1 - phi)
    raise InvalidInputError(f"no constant payoff for status {status}")


def boundary_candidates(x1: float, x2: float, alpha1: float, alpha2: float) -> list[float]:
    """Every ``m`` at which some classifying inequality can switch, unfiltered.

    Secured boundaries solve ``|m - x_j| = alpha_j |m - x_i|``; weak-favorite
    boundaries solve ``alpha_1 |m - x_2| = alpha_2 |m - x_1|`` and collapse to
    the midpoint when the alphas coincide.
    """
    roots = [
        (x1 + x2) / 2,
        (alpha2 * x1 - x2) / (alpha2 - 1),
        (alpha2 * x1 + x2) / (alpha2 + 1),
        (alpha1 * x2 - x1) / (alpha1 - 1),
        (alpha1 * x2 + x1) / (alpha1 + 1),
    ]
    if alpha1 != alpha2:
        roots.append((alpha1 * x2 + alpha2 * x1) / (alpha1 + alpha2))
        roots.append((alpha1 * x2 - alpha2 * x1) / (alpha1 - alpha2))
    return roots


def _raw_intervals(pair: PlatformPair, params: GameParams):
    """Sorted elementary intervals of [0, 1] with the status at each interior point."""
    x1, x2 = float(pair.x1), float(pair.x2)
    cuts = sorted(r for r in boundary_candidates(x1, x2, params.alpha1, params.alpha2) if 0 < r < 1)
    edges = [0.0, *cuts, 1.0]
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        status = classify(pair, (lo + hi) / 2, params)
        if isinstance(status, KnifeEdge):
            # Only a rounding sliver between coincident roots can land here.
            continue
        out.append((lo, hi, status))
    return out


@dataclass(frozen=True)
class Region:
    lo: float
    hi: float
    status: SubgameStatus
    payoff1: float
    payoff2: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class RegionPartition:
    """Status regions of the median covering [0, 1], adjacent equal statuses merged."""

    regions: tuple[Region, ...]

    @property
    def boundaries(self) -> list[float]:
        return [self.regions[0].lo] + [r.hi for r in self.regions]

    def measure(self, kind: type) -> float:
        """Total length of regions whose status is an instance of ``kind``."""
        return sum(r.length for r in self.regions if isinstance(r.status, kind))

    @property
    def open_probability(self) -> float:
        """Probability that the election is not secured (weak-favorite bands included)."""
        return self.measure((Open, WeakFavorite))

    def __iter__(self):
        return iter(self.regions)

    def __len__(self):
        return len(self.regions)


def region_partition(pair: PlatformPair, params: GameParams) -> RegionPartition:
    if pair.identical:
        raise InvalidInputError("identical platforms have no region partition")
    merged: list[list] = []
    for lo, hi, status in _raw_intervals(pair, params):
        if merged and merged[-1][2] == status:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi, status])
    regions = tuple(
        Region(lo, hi, status, *status_payoffs(status, params.phi)) for lo, hi, status in merged
    )
    return RegionPartition(regions)


def exante_payoff(pair: PlatformPair, params: GameParams) -> tuple[float, float]:
    """Expected payoffs of both candidates before the median is revealed."""
    if pair.identical:
        return identical_payoffs(params)
    g1 = g2 = 0.0
    for lo, hi, status in _raw_intervals(pair, params):
        p1, p2 = status_payoffs(status, params.phi)
        g1 += (hi - lo) * p1
        g2 += (hi - lo) * p2
    return g1, g2


def closed_form_g1(pair: PlatformPair, params: GameParams) -> float:
    """Piecewise-linear payoff of the left candidate 1 under equal electoral costs."""
    if not params.is_symmetric:
        raise InvalidInputError("closed form covers equal electoral costs only; use exante_payoff")
    x1, x2 = pair.x1, pair.x2
    if not x1 < x2:
        raise InvalidInputError("closed form requires x1 < x2")
    al, phi = params.alpha1, params.phi
    half = (1 - phi) / 2
    if x1 <= x2 / al:
        return x1 * (half + phi * al / (al + 1)) + x2 * (half + phi / (al + 1))
    k = 2 * phi * al / (al * al - 1)
    return x1 * (half - k) + x2 * (half + k)


# --- best responses ----------------------------------------------------------


def adjacent_limit(opponent: float, responder: int, params: GameParams, side: str) -> float:
    """Limit of the responder's payoff as its platform approaches the opponent's.

    All secured intervals vanish in the limit. With equal costs the responder
    keeps the favorite's open-election payoff on its own side; otherwise the
    candidate with the larger alpha wins every open election.
    """
    phi = params.phi
    own, opp = params.alpha_of(responder), params.alpha_of(other(responder))
    if own > opp:
        return 1 - phi
    if own < opp:
        return 0.0
    return (1 - phi) * (opponent if side == "left" else 1 - opponent)


def _payoff_of(responder: int, own: float, opponent: float, params: GameParams) -> float:
    pair = PlatformPair(own, opponent) if responder == 1 else PlatformPair(opponent, own)
    return exante_payoff(pair, params)[responder - 1]


def response_breakpoints(opponent: float, responder: int, params: GameParams) -> list[float]:
    """Own platforms where the responder's payoff can change slope.

    Every region boundary is affine in the responder's platform, and region
    statuses only change where two boundaries cross or one leaves [0, 1]. In
    between, the payoff is affine, so its maximum over any closed piece sits
    at one of these points.
    """
    a1, a2 = params.alpha1, params.alpha2

    def roots(y):
        x1, x2 = (y, opponent) if responder == 1 else (opponent, y)
        return boundary_candidates(x1, x2, a1, a2)

    at0, at1 = roots(0.0), roots(1.0)
    lines = [(r1 - r0, r0) for r0, r1 in zip(at0, at1)]  # root(y) = c*y + d
    points = {0.0, 1.0, float(opponent)}
    for i, (ci, di) in enumerate(lines):
        if ci != 0:
            points.update(((0 - di) / ci, (1 - di) / ci))
        for cj, dj in lines[i + 1:]:
            if ci != cj:
                points.add((dj - di) / (ci - cj))
    return sorted(y for y in points if 0 <= y <= 1)


def _side_limit(values, points, opponent, side):
    """Limit of the affine piece that ends at the opponent's platform."""
    # breakpoints within rounding of the opponent are the opponent itself
    points = [y for y in points if abs(y - opponent) > 1e-12] + [0.0, 1.0]
    if side == "left":
        lo = max(y for y in points if y < opponent)
        y1, y2 = lo + (opponent - lo) / 3, lo + 2 * (opponent - lo) / 3
    else:
        hi = min(y for y in points if y > opponent)
        y1, y2 = hi - (hi - opponent) / 3, hi - 2 * (hi - opponent) / 3
    v1, v2 = values(y1), values(y2)
    return v2 + (v2 - v1) * (opponent - y2) / (y2 - y1)


def best_response(opponent_platform: float, responder: int, params: GameParams) -> float:
    """Payoff-maximizing ex-ante platform against a fixed opponent.

    The payoff is piecewise affine in the responder's platform apart from the
    jump at the opponent's platform, so the maximum is found exactly among
    :func:`response_breakpoints`. If the payoff only approaches its supremum
    next to the opponent, no best response exists. Exact ties go to the point
    nearest the opponent, then to the left for candidate 1 and the right for
    candidate 2.
    """
    from flipflop.kernels import exante_payoff_grid

    x = opponent_platform
    if not 0 <= x <= 1:
        raise InvalidInputError(f"opponent platform must lie in [0, 1], got {x!r}")
    threshold = response_threshold(responder, params)
    if params.phi == threshold:
        raise BoundaryUnspecifiedError(
            f"phi equals the response threshold {threshold!r}: a whole segment is optimal"
        )

    points = [y for y in response_breakpoints(x, responder, params)
              if y == x or abs(y - x) > 1e-12]
    values = exante_payoff_grid(points, x, responder, params)
    toward = -1 if responder == 1 else 1
    best = max(range(len(points)),
               key=lambda i: (values[i], -abs(points[i] - x), toward * (x - points[i])))
    value = float(values[best])

    def payoff(y):
        return float(exante_payoff_grid([y], x, responder, params)[0])

    limits = []
    if x > 0:
        limits.append(_side_limit(payoff, points, x, "left"))
    if x < 1:
        limits.append(_side_limit(payoff, points, x, "right"))
    if limits and max(limits) > value + 1e-12:
        raise NoBestResponseError(
            f"payoff approaches {max(limits)!r} next to the opponent but never attains it"
        )
    return points[best]


# --- equilibria --------------------------------------------------------------


@dataclass(frozen=True)
class SPNE:
    x1_star: float
    x2_star: float
    payoff1: float
    payoff2: float
    left: int

    @property
    def pair(self) -> PlatformPair:
        return PlatformPair(self.x1_star, self.x2_star)


@dataclass(frozen=True)
class EpsilonEquilibrium:
    """Family of near-central profiles ``(1/2 - eps, 1/2 + eps)``.

    Against ``1/2 + eps`` the left candidate forgoes at most
    ``loss_coefficient * eps`` of payoff.
    """

    center: float
    loss_coefficient: float

    def profile(self, epsilon: float) -> PlatformPair:
        if not 0 < epsilon <= 0.5:
            raise InvalidInputError(f"epsilon must lie in (0, 1/2], got {epsilon!r}")
        return PlatformPair(self.center - epsilon, self.center + epsilon)


@dataclass(frozen=True)
class NoEquilibrium:
    reason: str


FirstStageSolution = SPNE | EpsilonEquilibrium | NoEquilibrium


def epsilon_loss_coefficient(params: GameParams) -> float:
    """Slope in ``eps`` of the best deviation gain at ``(1/2 - eps, 1/2 + eps)``.

    The supremum of deviations is the limit next to the opponent, worth
    ``(1 - phi)(1/2 + eps)``, while the profile itself pays
    ``(1 - phi)/2 + 4 alpha phi eps / (alpha**2 - 1)``.
    """
    al, phi = params.alpha1, params.phi
    return (1 - phi) - 4 * al * phi / (al * al - 1)


def spne_positions(params: GameParams, left: int) -> tuple[float, float]:
    """Fixed point of the side-peak best responses with ``left`` on the left."""
    right = other(left)
    al, ar = params.alpha_of(left), params.alpha_of(right)
    x_left = (al - 1) / (al * ar - 1)
    x_right = ar * x_left
    return (x_left, x_right) if left == 1 else (x_right, x_left)


def solve_first_stage(params: GameParams, left: int | None = None) -> FirstStageSolution:
    """Subgame-perfect equilibrium of the platform-choice stage.

    ``left`` picks which candidate sits on the left (the equilibria come in
    mirror-image pairs); by default it is the one with the smaller electoral
    cost, candidate 1 on ties.
    """
    phi = params.phi
    if left is None:
        left = 2 if params.a2 < params.a1 else 1
    thresholds = (response_threshold(1, params), response_threshold(2, params))
    if phi in thresholds:
        raise BoundaryUnspecifiedError(f"phi={phi!r} equals an existence threshold {thresholds}")

    if params.is_symmetric:
        if phi < thresholds[0]:
            return EpsilonEquilibrium(0.5, epsilon_loss_coefficient(params))
    elif phi < max(thresholds):
        k = 1 if phi < thresholds[0] else 2
        return NoEquilibrium(
            f"phi={phi!r} is below candidate {k}'s response threshold {thresholds[k - 1]!r}: "
            "the side-peak platform is no longer a best response"
        )

    x1, x2 = spne_positions(params, left)
    g1, g2 = exante_payoff(PlatformPair(x1, x2), params)
    for c, own, opp, value in ((1, x1, x2, g1), (2, x2, x1, g2)):
        try:
            y = best_response(opp, c, params)
        except NoBestResponseError as exc:
            return NoEquilibrium(f"candidate {c} has no best response to {opp!r}: {exc}")
        if abs(y - own) <= 1e-9:
            continue
        gain = _payoff_of(c, y, opp, params) - value
        if gain > 1e-12:
            return NoEquilibrium(
                f"candidate {c} gains {gain!r} by moving from {own!r} to {y!r}"
            )
        raise BoundaryUnspecifiedError(
            f"candidate {c} is indifferent between {own!r} and {y!r}"
        )
    return SPNE(x1, x2, g1, g2, left)
