"""Equilibria of two-stage electoral competition with costly platform adjustment."""

from flipflop.core import (
    GameParams,
    Identical,
    KnifeEdge,
    Open,
    PlatformPair,
    Secured,
    WeakFavorite,
    alpha,
    classify,
    optimal_adjustment,
    secured_interval,
    voter_utility,
    weak_favorite_threshold,
)
from flipflop.errors import (
    BoundaryUnspecifiedError,
    FlipFlopError,
    InvalidInputError,
    NoBestResponseError,
    UnresolvedTieError,
)
from flipflop.first_stage import (
    SPNE,
    EpsilonEquilibrium,
    NoEquilibrium,
    best_response,
    closed_form_g1,
    exante_payoff,
    psi,
    region_partition,
    solve_first_stage,
)
from flipflop.subgame import KnifeEdgePolicy, normal_form, solve_subgame

__version__ = "0.1.0"

__all__ = [
    "BoundaryUnspecifiedError",
    "EpsilonEquilibrium",
    "FlipFlopError",
    "GameParams",
    "Identical",
    "InvalidInputError",
    "KnifeEdge",
    "KnifeEdgePolicy",
    "NoBestResponseError",
    "NoEquilibrium",
    "Open",
    "PlatformPair",
    "SPNE",
    "Secured",
    "UnresolvedTieError",
    "WeakFavorite",
    "alpha",
    "best_response",
    "classify",
    "closed_form_g1",
    "exante_payoff",
    "normal_form",
    "optimal_adjustment",
    "psi",
    "region_partition",
    "secured_interval",
    "solve_first_stage",
    "solve_subgame",
    "voter_utility",
    "weak_favorite_threshold",
    "__version__",
]
