"""Pure-Python/numpy versions of the compiled kernels (same signatures, same bits)."""

import numpy as np

from flipflop.core import GameParams, PlatformPair
from flipflop.first_stage import exante_payoff

IDENTICAL, SECURED, OPEN, WEAK, KNIFE = range(5)


def _utility(t, x, y, a):
    return -(t - y) * (t - y) - a * ((y - x) * (y - x))


def _adjust(m, x, a):
    return (m + a * x) / (1 + a)


def play_draws(u, x1, x2, a1, a2, phi, code, fav, adj1, adj2, winner):
    m = u[:, 0]
    n = m.shape[0]
    if x1 == x2:
        knife = m == x1
        code[:] = np.where(knife, KNIFE, IDENTICAL)
        fav[:] = 0
        if a1 == a2:
            p1 = p2 = np.ones(n)
        else:
            p1 = np.full(n, 1.0 if a1 < a2 else 0.0)
            p2 = 1.0 - p1
    else:
        d1 = np.abs(x1 - m)
        d2 = np.abs(x2 - m)
        fav1 = d1 < d2
        xf = np.where(fav1, x1, x2)
        xc = np.where(fav1, x2, x1)
        af = np.where(fav1, a1, a2)
        ac = np.where(fav1, a2, a1)
        stay_f = _utility(m, xf, xf, af)
        adj_c = _utility(m, xc, _adjust(m, xc, ac), ac)
        adj_f = _utility(m, xf, _adjust(m, xf, af), af)

        c = np.full(n, OPEN, dtype=np.int8)
        c[adj_c == adj_f] = KNIFE
        c[adj_c > adj_f] = WEAK
        c[stay_f == adj_c] = KNIFE
        c[stay_f > adj_c] = SECURED
        c[d1 == d2] = KNIFE
        knife = c == KNIFE
        code[:] = c
        fav[:] = np.where(d1 == d2, 0, np.where(fav1, 1, 2))

        # Adjustment probabilities expressed from the favorite's side.
        pf = np.zeros(n)
        pc = np.zeros(n)
        is_open = c == OPEN
        pf[is_open] = 1.0 - phi
        pc[is_open] = phi
        pc[c == WEAK] = 1.0
        p1 = np.where(fav1, pf, pc)
        p2 = np.where(fav1, pc, pf)

    b1 = (u[:, 1] < p1) & ~knife
    b2 = (u[:, 2] < p2) & ~knife
    y1 = np.where(b1, _adjust(m, x1, a1), x1)
    y2 = np.where(b2, _adjust(m, x2, a2), x2)
    v1 = _utility(m, x1, y1, a1)
    v2 = _utility(m, x2, y2, a2)
    tie_winner = np.where(u[:, 3] < 0.5, 1, 2)
    w = np.where(v1 > v2, 1, np.where(v2 > v1, 2, tie_winner))
    w[knife] = 0
    adj1[:] = b1
    adj2[:] = b2
    winner[:] = w


def exante_payoff_many(own, opponent, responder, a1, a2, al1, al2, phi, out):
    # alphas are recomputed by GameParams from the same a's
    params = GameParams(a1, a2, phi)
    for i, x in enumerate(own):
        x = float(x)
        pair = PlatformPair(x, opponent) if responder == 1 else PlatformPair(opponent, x)
        out[i] = exante_payoff(pair, params)[responder - 1]
