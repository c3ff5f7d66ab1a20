"""Independent oracles: grid brute force and seeded Monte Carlo play.

Nothing here reuses the closed forms it is meant to check. Grid searches go
through region integration only, subgame checks recompute payoffs from voter
utilities, and the simulator samples the median voter and mixed actions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from flipflop.core import GameParams, PlatformPair, check_median, optimal_adjustment, other
from flipflop.first_stage import (
    SPNE,
    best_response,
    closed_form_g1,
    exante_payoff,
    psi,
    region_partition,
    solve_first_stage,
)
from flipflop.errors import FlipFlopError, InvalidInputError
from flipflop.kernels import exante_payoff_grid, play_draws
from flipflop.subgame import KnifeEdgePolicy, SubgameEquilibrium, solve_subgame

CHUNK_SIZE = 1 << 16
_IDENTICAL, _SECURED, _OPEN, _WEAK, _KNIFE = range(5)


# --- grid oracles ------------------------------------------------------------


def grid_best_response(opponent_platform: float, responder: int, params: GameParams,
                       grid_size: int = 10_001, backend: str | None = None) -> float:
    """Argmax of the responder's ex-ante payoff over a uniform grid on [0, 1].

    Exact ties go to the grid point closest to the opponent.
    """
    if grid_size < 2:
        raise InvalidInputError("grid_size must be at least 2")
    grid = np.linspace(0.0, 1.0, grid_size)
    values = exante_payoff_grid(grid, opponent_platform, responder, params, backend)
    best = np.flatnonzero(values == values.max())
    return float(grid[best[np.argmin(np.abs(grid[best] - opponent_platform))]])


def _pure_payoffs(ys, m, x_own, a_own, opp_platforms, opp_probs, x_opp, a_opp, phi):
    """Expected payoff of each pure ex-post platform in ``ys`` against a mixed opponent."""
    ys = np.asarray(ys, dtype=float)
    u_own = -(m - ys) * (m - ys) - a_own * ((ys - x_own) * (ys - x_own))
    total = np.zeros_like(ys)
    for y_opp, prob in zip(opp_platforms, opp_probs):
        if prob == 0:
            continue
        u_opp = -(m - y_opp) * (m - y_opp) - a_opp * ((y_opp - x_opp) * (y_opp - x_opp))
        share = np.where(u_own > u_opp, 1.0, np.where(u_own < u_opp, 0.0, 0.5))
        total += prob * share
    return total - phi * (ys != x_own)


def grid_subgame_check(pair: PlatformPair, m: float, params: GameParams, grid_size: int = 1001,
                       equilibrium: SubgameEquilibrium | None = None) -> float:
    """Largest gain any candidate gets from a unilateral pure ex-post deviation.

    Deviations range over a uniform grid plus each candidate's stay and
    adjust platforms. ``equilibrium`` defaults to :func:`solve_subgame`'s
    answer; passing a perturbed profile shows the check can fail. Knife-edge
    realizations raise :class:`~flipflop.errors.UnresolvedTieError`.
    """
    if grid_size < 2:
        raise InvalidInputError("grid_size must be at least 2")
    check_median(m)
    eq = equilibrium if equilibrium is not None else solve_subgame(pair, m, params)
    grid = np.linspace(0.0, 1.0, grid_size)
    gain = -math.inf
    for c in (1, 2):
        o = other(c)
        act, opp = eq.action(c), eq.action(o)
        args = (m, pair.of(c), params.a(c),
                (opp.adjust_target, opp.stay_platform),
                (opp.adjust_probability, 1 - opp.adjust_probability),
                pair.of(o), params.a(o), params.phi)
        own = _pure_payoffs([act.adjust_target, act.stay_platform], *args)
        current = act.adjust_probability * own[0] + (1 - act.adjust_probability) * own[1]
        deviations = _pure_payoffs(np.concatenate([grid, [act.adjust_target, act.stay_platform]]), *args)
        gain = max(gain, float(deviations.max() - current))
    return gain


# --- Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class SimulationConfig:
    """Monte Carlo settings.

    Draw ``k`` always belongs to chunk ``k // CHUNK_SIZE``, whose uniforms
    come from its own Philox stream keyed by ``(seed, chunk)``; chunk tallies
    are exact integers (plus per-chunk float sums combined in chunk order), so
    results are bit-identical for any ``worker_count``.
    """

    draws: int = 1_000_000
    seed: int = 0
    worker_count: int = 1
    knife_edge_policy: KnifeEdgePolicy | str = KnifeEdgePolicy.FAIR_COIN
    backend: str | None = None

    def __post_init__(self):
        if self.draws < 1:
            raise InvalidInputError("draws must be at least 1")
        if self.worker_count < 1:
            raise InvalidInputError("worker_count must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        policy = KnifeEdgePolicy(self.knife_edge_policy)
        if policy is KnifeEdgePolicy.RAISE:
            raise InvalidInputError("simulation knife-edge policy must be fair-coin or reject")
        object.__setattr__(self, "knife_edge_policy", policy)


def chunk_uniforms(seed: int, chunk: int, n: int) -> np.ndarray:
    """Uniforms ``(m, u1, u2, u_tie)`` for ``n`` draws of one chunk."""
    ss = np.random.SeedSequence(seed, spawn_key=(chunk,))
    return np.random.Generator(np.random.Philox(ss)).random((n, 4))


def _resolve_knife_edges(u, code, adj1, adj2, winner, pair, params, policy):
    for i in np.flatnonzero(code == _KNIFE):
        if policy is KnifeEdgePolicy.REJECT:
            continue
        m = float(u[i, 0])
        eq = solve_subgame(pair, m, params, KnifeEdgePolicy.FAIR_COIN)
        b1 = u[i, 1] < eq.action1.adjust_probability
        b2 = u[i, 2] < eq.action2.adjust_probability
        y1 = eq.action1.adjust_target if b1 else pair.x1
        y2 = eq.action2.adjust_target if b2 else pair.x2
        v1 = -(m - y1) * (m - y1) - params.a1 * ((y1 - pair.x1) * (y1 - pair.x1))
        v2 = -(m - y2) * (m - y2) - params.a2 * ((y2 - pair.x2) * (y2 - pair.x2))
        adj1[i], adj2[i] = b1 and y1 != pair.x1, b2 and y2 != pair.x2
        winner[i] = 1 if v1 > v2 else 2 if v2 > v1 else (1 if u[i, 3] < 0.5 else 2)


def _tally_chunk(chunk, n, pair, params, config):
    u = chunk_uniforms(config.seed, chunk, n)
    code, fav, adj1, adj2, winner = play_draws(u, pair.x1, pair.x2, params, config.backend)
    _resolve_knife_edges(u, code, adj1, adj2, winner, pair, params, config.knife_edge_policy)

    keep = winner != 0
    m = u[:, 0]
    x1, x2 = float(pair.x1), float(pair.x2)
    t = {"retained": int(keep.sum()), "knife_edge": int((code == _KNIFE).sum())}
    w = {1: (winner == 1) & keep, 2: (winner == 2) & keep}
    f = {1: adj1 & keep, 2: adj2 & keep}
    for c in (1, 2):
        t[f"wins{c}"] = int(w[c].sum())
        t[f"flips{c}"] = int(f[c].sum())
        t[f"win_flips{c}"] = int((w[c] & f[c]).sum())
        t[f"secured{c}"] = int(((code == _SECURED) & (fav == c)).sum())
    t["open"] = int(np.isin(code, (_IDENTICAL, _OPEN, _WEAK)).sum())
    t["weak"] = int((code == _WEAK).sum())

    role = np.isin(code, (_SECURED, _OPEN, _WEAK))
    fav1 = fav == 1
    fav_flip = np.where(fav1, adj1, adj2) & role
    chal_flip = np.where(fav1, adj2, adj1) & role
    fav_win = (winner == fav) & role
    is_open = code == _OPEN
    yh1 = optimal_adjustment(m, x1, params.a1)
    yh2 = optimal_adjustment(m, x2, params.a2)
    mag1, mag2 = np.abs(yh1 - x1), np.abs(yh2 - x2)
    fav_mag = np.where(fav1, mag1, mag2)
    chal_mag = np.where(fav1, mag2, mag1)
    t.update(
        role_draws=int(role.sum()),
        open_roles=int(is_open.sum()),
        fav_flips=int(fav_flip.sum()),
        chal_flips=int(chal_flip.sum()),
        fav_flips_open=int((fav_flip & is_open).sum()),
        chal_flips_open=int((chal_flip & is_open).sum()),
        fav_successes=int((fav_flip & fav_win).sum()),
        chal_successes=int((chal_flip & ~fav_win & role).sum()),
        magnitude_order_violations=int((is_open & (fav_mag >= chal_mag)).sum()),
        fav_magnitude_sum=float(fav_mag[fav_flip].sum()),
        chal_magnitude_sum=float(chal_mag[chal_flip].sum()),
    )

    # Direction is counted per flip; crossing per draw (a flip reaching the
    # opponent's announced platform, or the final order reversing).
    toward = away = 0
    crossed = np.zeros(n, dtype=bool)
    for c, yh in ((1, yh1), (2, yh2)):
        x_own, x_opp = float(pair.of(c)), float(pair.of(other(c)))
        step = (yh - x_own) * (0.5 - x_own)
        toward += int((f[c] & (step > 0)).sum())
        away += int((f[c] & (step <= 0)).sum())
        if x1 != x2:
            crossed |= f[c] & ((yh - x_opp) * (x_own - x_opp) <= 0)
    if x1 != x2:
        y1 = np.where(adj1, yh1, x1)
        y2 = np.where(adj2, yh2, x2)
        crossed |= ((y1 - y2) * (x1 - x2) < 0) & keep
    t.update(toward_center=toward, away_from_center=away, order_crossing=int(crossed.sum()))
    return t


def _ratio(num, den):
    return num / den if den else math.nan


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n) if n else math.nan


@dataclass(frozen=True)
class SimulationStats:
    x1: float
    x2: float
    draws: int
    retained: int
    knife_edge_count: int
    payoff_mean: tuple[float, float]
    payoff_std_error: tuple[float, float]
    flip_frequency: tuple[float, float]
    flip_frequency_given_open: dict
    flip_frequency_by_role: dict
    flip_direction_counts: dict
    flip_magnitude_mean: dict
    flip_success_rate: dict
    open_election_frequency: float
    secured_frequency: tuple[float, float]
    weak_favorite_frequency: float
    counts: dict = field(repr=False)

    def to_dict(self) -> dict:
        return asdict(self)


def _stats_from_tallies(pair, params, config, t):
    n, phi = t["retained"], params.phi
    means, ses = [], []
    for c in (1, 2):
        W, F, WF = t[f"wins{c}"], t[f"flips{c}"], t[f"win_flips{c}"]
        mean = (W - phi * F) / n
        second = (W - 2 * phi * WF + phi * phi * F) / n
        var = max(second - mean * mean, 0.0) * n / (n - 1) if n > 1 else math.nan
        means.append(mean)
        ses.append(math.sqrt(var / n))
    return SimulationStats(
        x1=float(pair.x1),
        x2=float(pair.x2),
        draws=config.draws,
        retained=n,
        knife_edge_count=t["knife_edge"],
        payoff_mean=tuple(means),
        payoff_std_error=tuple(ses),
        flip_frequency=(t["flips1"] / n, t["flips2"] / n),
        flip_frequency_given_open={
            "favorite": _ratio(t["fav_flips_open"], t["open_roles"]),
            "challenger": _ratio(t["chal_flips_open"], t["open_roles"]),
        },
        flip_frequency_by_role={
            "favorite": _ratio(t["fav_flips"], t["role_draws"]),
            "challenger": _ratio(t["chal_flips"], t["role_draws"]),
        },
        flip_direction_counts={
            "toward_center": t["toward_center"],
            "away_from_center": t["away_from_center"],
            "order_crossing": t["order_crossing"],
        },
        flip_magnitude_mean={
            "favorite": _ratio(t["fav_magnitude_sum"], t["fav_flips"]),
            "challenger": _ratio(t["chal_magnitude_sum"], t["chal_flips"]),
        },
        flip_success_rate={
            "favorite": _ratio(t["fav_successes"], t["fav_flips"]),
            "challenger": _ratio(t["chal_successes"], t["chal_flips"]),
        },
        open_election_frequency=t["open"] / n,
        secured_frequency=(t["secured1"] / n, t["secured2"] / n),
        weak_favorite_frequency=t["weak"] / n,
        counts=dict(t),
    )


def simulate(pair: PlatformPair, params: GameParams, config: SimulationConfig) -> SimulationStats:
    """Sample median voters, play the subgame equilibrium and aggregate outcomes."""
    n_chunks = -(-config.draws // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, config.draws - k * CHUNK_SIZE) for k in range(n_chunks)]

    def work(k):
        return _tally_chunk(k, sizes[k], pair, params, config)

    if config.worker_count == 1:
        parts = [work(k) for k in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=config.worker_count) as pool:
            parts = list(pool.map(work, range(n_chunks)))

    total = dict.fromkeys(parts[0], 0)
    for part in parts:  # fixed chunk order keeps float sums reproducible
        for key, value in part.items():
            total[key] += value
    if total["retained"] == 0:
        raise FlipFlopError("every draw was rejected as a knife edge")
    return _stats_from_tallies(pair, params, config, total)


# --- behavioral implications -------------------------------------------------


@dataclass(frozen=True)
class ClauseResult:
    clause: str
    passed: bool
    observed: dict
    expected: dict

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


@dataclass(frozen=True)
class ImplicationReport:
    applicable: bool
    reason: str
    clauses: tuple[ClauseResult, ...] = ()

    @property
    def passed(self) -> bool:
        return self.applicable and all(c.passed for c in self.clauses)

    def to_dict(self) -> dict:
        return asdict(self) | {"passed": self.passed}


def _within(observed, target, se, k=3.0):
    return abs(observed - target) <= k * se


def check_implications(stats: SimulationStats, params: GameParams) -> ImplicationReport:
    """Test the on-path flip-flopping regularities against simulated play.

    Only meaningful at the symmetric divergent equilibrium; anything else is
    reported as not applicable.
    """
    if not params.is_symmetric:
        return ImplicationReport(False, "electoral costs differ; the regularities are stated for equal costs")
    sol = solve_first_stage(params)
    if not isinstance(sol, SPNE):
        return ImplicationReport(False, "no divergent equilibrium at these parameters")
    if abs(stats.x1 - sol.x1_star) > 1e-12 or abs(stats.x2 - sol.x2_star) > 1e-12:
        return ImplicationReport(False, "statistics were not produced at the equilibrium platforms")

    phi, t = params.phi, stats.counts
    dirs = stats.flip_direction_counts
    clauses = [
        ClauseResult(
            "i: flips go only toward the center and never cross the opponent",
            dirs["away_from_center"] == 0 and dirs["order_crossing"] == 0,
            dict(dirs),
            {"away_from_center": 0, "order_crossing": 0},
        )
    ]

    n_open = t["open_roles"]
    ff, fc = stats.flip_frequency_given_open["favorite"], stats.flip_frequency_given_open["challenger"]
    se_f, se_c = binomial_se(1 - phi, n_open), binomial_se(phi, n_open)
    clauses.append(ClauseResult(
        "ii: the favorite flips more often than the challenger",
        _within(ff, 1 - phi, se_f) and _within(fc, phi, se_c) and ff > fc,
        {"favorite_given_open": ff, "challenger_given_open": fc,
         "favorite_unconditional": stats.flip_frequency_by_role["favorite"],
         "challenger_unconditional": stats.flip_frequency_by_role["challenger"],
         "open_draws": n_open},
        {"favorite_given_open": 1 - phi, "challenger_given_open": phi, "tolerance_se": 3.0},
    ))

    mf, mc = stats.flip_magnitude_mean["favorite"], stats.flip_magnitude_mean["challenger"]
    clauses.append(ClauseResult(
        "iii: favorite adjustments are smaller than challenger adjustments",
        mf < mc and t["magnitude_order_violations"] == 0,
        {"favorite_mean": mf, "challenger_mean": mc,
         "per_draw_violations": t["magnitude_order_violations"]},
        {"per_draw_violations": 0},
    ))

    sf, sc = stats.flip_success_rate["favorite"], stats.flip_success_rate["challenger"]
    clauses.append(ClauseResult(
        "iv: favorite flips always win, challenger flips mostly lose",
        sf == 1.0 and _within(sc, phi, binomial_se(phi, t["chal_flips"])) and sc < 0.5,
        {"favorite": sf, "challenger": sc, "challenger_flips": t["chal_flips"]},
        {"favorite": 1.0, "challenger": phi, "tolerance_se": 3.0},
    ))
    return ImplicationReport(True, "symmetric equilibrium", tuple(clauses))


# --- comparative statics -----------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    a: float
    phi: float
    alpha: float
    psi: float
    region: str
    admissible: bool
    x1: float | None = None
    x2: float | None = None
    polarization: float | None = None
    open_probability: float | None = None
    payoff: float | None = None
    sim_payoff_mean: float | None = None
    sim_payoff_std_error: float | None = None
    sim_open_frequency: float | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    polarization_decreasing: bool
    open_probability_decreasing: bool
    payoff_increasing: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _strictly(values, sign):
    return all(sign * (b - a) > 0 for a, b in zip(values, values[1:]))


def sweep_row(a: float, phi: float, config: SimulationConfig | None = None) -> SweepRow:
    params = GameParams.symmetric(a, phi)
    threshold = psi(a)
    region = "R0" if phi > threshold else "R1" if phi < threshold else "boundary"
    base = dict(a=a, phi=phi, alpha=params.alpha1, psi=threshold, region=region)
    if region != "R0":
        return SweepRow(admissible=False, **base)
    sol = solve_first_stage(params)
    parts = region_partition(sol.pair, params)
    extra = {}
    if config is not None:
        stats = simulate(sol.pair, params, config)
        extra = dict(sim_payoff_mean=stats.payoff_mean[0], sim_payoff_std_error=stats.payoff_std_error[0],
                     sim_open_frequency=stats.open_election_frequency)
    return SweepRow(admissible=True, x1=sol.x1_star, x2=sol.x2_star,
                    polarization=sol.x2_star - sol.x1_star,
                    open_probability=parts.open_probability, payoff=sol.payoff1, **base, **extra)


def comparative_sweep(a_values, phi: float, config: SimulationConfig | None = None) -> SweepResult:
    """Equilibrium polarization, open-election probability and payoff across electoral costs.

    Rows whose cost pair admits no divergent equilibrium are kept but flagged;
    the monotonicity verdicts use the admissible rows in increasing ``a``.
    """
    rows = tuple(sweep_row(a, phi, config) for a in a_values)
    ok = sorted((r for r in rows if r.admissible), key=lambda r: r.a)
    return SweepResult(
        rows,
        polarization_decreasing=_strictly([r.polarization for r in ok], -1),
        open_probability_decreasing=_strictly([r.open_probability for r in ok], -1),
        payoff_increasing=_strictly([r.payoff for r in ok], +1),
    )


# --- packaged oracle suite ---------------------------------------------------

DEFAULT_FIXTURES = (
    (1 / 3, 1 / 3, 0.3),
    (1.0, 1.0, 0.3),
    (3.0, 3.0, 0.3),
    (1 / 8, 1 / 3, 0.45),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    fixture: dict

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "value", float(self.value))


def run_verification(grid_size: int = 10_001, inject_perturbed: bool = False, seed: int = 0,
                     backend: str | None = None) -> list[CheckResult]:
    """Cross-check every analytic layer against the brute-force oracles."""
    results = []
    cell = 1 / (grid_size - 1)
    rng = np.random.default_rng(seed)
    for a1, a2, phi in DEFAULT_FIXTURES:
        params = GameParams(a1, a2, phi)
        fx = {"a1": a1, "a2": a2, "phi": phi}
        sol = solve_first_stage(params)
        if not isinstance(sol, SPNE):
            results.append(CheckResult("equilibrium exists", False, math.nan, 0.0, fx))
            continue
        xs = (sol.x1_star, sol.x2_star)
        for c in (1, 2):
            x_opp = xs[2 - c]
            closed = best_response(x_opp, c, params)
            results.append(CheckResult(f"fixed point, candidate {c}", abs(closed - xs[c - 1]) <= 1e-12,
                                       abs(closed - xs[c - 1]), 1e-12, fx))
            grid_br = grid_best_response(x_opp, c, params, grid_size, backend)
            results.append(CheckResult(f"grid best response, candidate {c}", abs(grid_br - closed) <= cell,
                                       abs(grid_br - closed), cell, fx))
            grid = np.linspace(0, 1, grid_size)
            dev = exante_payoff_grid(grid, x_opp, c, params, backend).max() - (sol.payoff1, sol.payoff2)[c - 1]
            results.append(CheckResult(f"no profitable grid deviation, candidate {c}", dev <= 1e-9,
                                       float(dev), 1e-9, fx))
        worst = -math.inf
        for m in np.linspace(0, 1, 101):
            try:
                worst = max(worst, grid_subgame_check(sol.pair, float(m), params, 1001))
            except FlipFlopError:
                continue
        results.append(CheckResult("subgame deviation gain", worst <= 1e-9, worst, 1e-9, fx))

        if params.is_symmetric:
            diff = 0.0
            for _ in range(200):
                x1, x2 = sorted(rng.random(2))
                if x1 == x2:
                    continue
                pair = PlatformPair(x1, x2)
                diff = max(diff, abs(closed_form_g1(pair, params) - exante_payoff(pair, params)[0]))
            results.append(CheckResult("closed form vs integration", diff <= 1e-12, diff, 1e-12, fx))

    if inject_perturbed:
        params = GameParams.symmetric(1 / 3, 0.3)
        pair, m = PlatformPair(1 / 3, 2 / 3), 0.47
        eq = solve_subgame(pair, m, params)
        bad = SubgameEquilibrium(
            type(eq.action1)(eq.action1.stay_platform, eq.action1.adjust_target,
                             eq.action1.adjust_probability + 0.1),
            eq.action2, eq.expected_payoff1, eq.expected_payoff2, eq.status)
        gain = grid_subgame_check(pair, m, params, 1001, equilibrium=bad)
        results.append(CheckResult("subgame deviation gain (perturbed fixture)", gain <= 1e-9, gain, 1e-9,
                                   {"a1": 1 / 3, "a2": 1 / 3, "phi": 0.3, "x1": 1 / 3, "x2": 2 / 3, "m": m,
                                    "perturbation": 0.1}))
    return results


__all__ = [
    "CHUNK_SIZE", "CheckResult", "ClauseResult", "ImplicationReport", "SimulationConfig", "SimulationStats", "SweepResult", "SweepRow",
    "binomial_se", "check_implications", "chunk_uniforms", "comparative_sweep",
    "grid_best_response", "grid_subgame_check", "run_verification", "simulate", "sweep_row",
]
