"""Domain types, voter utilities and the classification of second-stage subgames.

Every function here is written against plain arithmetic operators so that it
works unchanged on ``float`` and on :class:`fractions.Fraction`. Rational
inputs make classification boundaries exactly reachable, which is how the
knife-edge variant is tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real
from typing import NamedTuple, Union

from flipflop.errors import InvalidInputError

CANDIDATES = (1, 2)


def other(candidate: int) -> int:
    """Return the opponent's id."""
    _check_candidate(candidate)
    return 3 - candidate


def _check_candidate(candidate: int) -> None:
    if candidate not in CANDIDATES:
        raise InvalidInputError(f"candidate id must be 1 or 2, got {candidate!r}")


def _finite(value, name: str) -> None:
    if not isinstance(value, Real) or not math.isfinite(value):
        raise InvalidInputError(f"{name} must be a finite real number, got {value!r}")


def alpha(a) -> float:
    """Working parameter ``sqrt((1 + a) / a)``; always above 1 and decreasing in ``a``."""
    _finite(a, "a")
    if a <= 0:
        raise InvalidInputError(f"electoral cost a must be positive, got {a!r}")
    return math.sqrt((1 + a) / a)


@dataclass(frozen=True)
class GameParams:
    """Electoral costs of both candidates and the common organizational cost.

    ``alpha1``/``alpha2`` are derived once at construction since every
    downstream formula consumes them rather than the raw costs.
    """

    a1: Real
    a2: Real
    phi: Real
    alpha1: float = field(init=False, repr=False, compare=False)
    alpha2: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _finite(self.phi, "phi")
        if not 0 < self.phi < 0.5:
            raise InvalidInputError(f"phi must lie in (0, 1/2), got {self.phi!r}")
        object.__setattr__(self, "alpha1", alpha(self.a1))
        object.__setattr__(self, "alpha2", alpha(self.a2))

    @classmethod
    def symmetric(cls, a, phi) -> GameParams:
        return cls(a, a, phi)

    @property
    def is_symmetric(self) -> bool:
        return self.a1 == self.a2

    def a(self, candidate: int):
        _check_candidate(candidate)
        return self.a1 if candidate == 1 else self.a2

    def alpha_of(self, candidate: int) -> float:
        _check_candidate(candidate)
        return self.alpha1 if candidate == 1 else self.alpha2

    def swapped(self) -> GameParams:
        return GameParams(self.a2, self.a1, self.phi)


@dataclass(frozen=True)
class PlatformPair:
    """Ex-ante platforms; either ordering is allowed."""

    x1: Real
    x2: Real

    def __post_init__(self):
        for name in ("x1", "x2"):
            value = getattr(self, name)
            _finite(value, name)
            if not 0 <= value <= 1:
                raise InvalidInputError(f"{name} must lie in [0, 1], got {value!r}")

    def of(self, candidate: int):
        _check_candidate(candidate)
        return self.x1 if candidate == 1 else self.x2

    @property
    def identical(self) -> bool:
        return self.x1 == self.x2

    def swapped(self) -> PlatformPair:
        return PlatformPair(self.x2, self.x1)

    def mirrored(self) -> PlatformPair:
        """Reflect both platforms through 1/2, keeping labels."""
        return PlatformPair(1 - self.x1, 1 - self.x2)


def check_median(m) -> None:
    _finite(m, "m")
    if not 0 <= m <= 1:
        raise InvalidInputError(f"median m must lie in [0, 1], got {m!r}")


class Orientation(NamedTuple):
    """A pair mapped to the left/right frame, with the labels kept alongside."""

    left: int
    right: int
    x_left: Real
    x_right: Real
    alpha_left: float
    alpha_right: float


def orient(pair: PlatformPair, params: GameParams) -> Orientation:
    """Map a pair to the ``x_left <= x_right`` frame (candidate 1 left on ties)."""
    left = 1 if pair.x1 <= pair.x2 else 2
    right = 3 - left
    return Orientation(
        left, right, pair.of(left), pair.of(right), params.alpha_of(left), params.alpha_of(right)
    )


# --- subgame status variants -------------------------------------------------


@dataclass(frozen=True)
class Identical:
    def __str__(self):
        return "identical"


@dataclass(frozen=True)
class Secured:
    favorite: int

    def __str__(self):
        return f"secured({self.favorite})"


@dataclass(frozen=True)
class Open:
    favorite: int

    def __str__(self):
        return f"open({self.favorite})"


@dataclass(frozen=True)
class WeakFavorite:
    weak_favorite: int
    strong_challenger: int

    def __str__(self):
        return f"weak_favorite({self.weak_favorite},{self.strong_challenger})"


@dataclass(frozen=True)
class KnifeEdge:
    reason: str = field(default="", compare=False)

    def __str__(self):
        return "knife_edge"


SubgameStatus = Union[Identical, Secured, Open, WeakFavorite, KnifeEdge]


def relabel_status(status: SubgameStatus) -> SubgameStatus:
    """Swap candidate ids inside a status."""
    if isinstance(status, Secured):
        return Secured(3 - status.favorite)
    if isinstance(status, Open):
        return Open(3 - status.favorite)
    if isinstance(status, WeakFavorite):
        return WeakFavorite(3 - status.weak_favorite, 3 - status.strong_challenger)
    return status


# --- utilities and adjustments -----------------------------------------------


def voter_utility(t, x, y, a):
    """Utility of voter ``t`` from a candidate who moved from ``x`` to ``y``."""
    return -(t - y) * (t - y) - a * ((y - x) * (y - x))


def optimal_adjustment(m, x, a):
    """The ex-post platform the median voter likes best: a weighted average of ``m`` and ``x``."""
    return (m + a * x) / (1 + a)


def adjusted_utility(m, x, a):
    """Median-voter utility once the candidate has moved to its optimal adjustment."""
    return voter_utility(m, x, optimal_adjustment(m, x, a), a)


class SecuredInterval(NamedTuple):
    lo: float
    hi: float
    candidate: int


def secured_interval(candidate: int, pair: PlatformPair, params: GameParams) -> SecuredInterval:
    """Median locations for which ``candidate`` wins without moving, whatever the opponent does.

    The bounds depend on the opponent's alpha only.
    """
    _check_candidate(candidate)
    if pair.identical:
        raise InvalidInputError("identical platforms have no secured interval")
    x_own, x_opp = pair.of(candidate), pair.of(other(candidate))
    beta = params.alpha_of(other(candidate))
    if x_own < x_opp:
        lo = max((beta * x_own - x_opp) / (beta - 1), 0)
        hi = (beta * x_own + x_opp) / (beta + 1)
    else:
        lo = (beta * x_own + x_opp) / (beta + 1)
        hi = min((beta * x_own - x_opp) / (beta - 1), 1)
    return SecuredInterval(lo, hi, candidate)


def weak_favorite_threshold(pair: PlatformPair, params: GameParams) -> float:
    """Median location between the platforms where both adjusted candidates tie.

    Equals the midpoint for equal costs; otherwise it sits on the side of the
    candidate with the larger electoral cost.
    """
    if pair.identical:
        raise InvalidInputError("identical platforms have no weak-favorite threshold")
    o = orient(pair, params)
    return (o.alpha_left * o.x_right + o.alpha_right * o.x_left) / (o.alpha_left + o.alpha_right)


def classify(pair: PlatformPair, m, params: GameParams) -> SubgameStatus:
    """Status of the second stage once ``m`` is revealed.

    Comparisons are exact, with no tolerance; any classifying equality yields
    :class:`KnifeEdge`.
    """
    if pair.identical:
        if m == pair.x1:
            return KnifeEdge("median at the common platform")
        return Identical()
    d1, d2 = abs(pair.x1 - m), abs(pair.x2 - m)
    if d1 == d2:
        return KnifeEdge("median equidistant from both platforms")
    fav = 1 if d1 < d2 else 2
    chal = 3 - fav
    x_f, x_c = pair.of(fav), pair.of(chal)
    a_f, a_c = params.a(fav), params.a(chal)

    stay_f = voter_utility(m, x_f, x_f, a_f)
    adj_c = adjusted_utility(m, x_c, a_c)
    if stay_f > adj_c:
        return Secured(fav)
    if stay_f == adj_c:
        return KnifeEdge("secured-interval boundary")

    adj_f = adjusted_utility(m, x_f, a_f)
    if adj_c > adj_f:
        return WeakFavorite(fav, chal)
    if adj_c == adj_f:
        return KnifeEdge("weak-favorite boundary")
    return Open(fav)
