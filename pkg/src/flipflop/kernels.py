"""Backend selection for the hot loops.

The Cython extension is used when it was built; otherwise, or when
``FLIPFLOP_PURE_PYTHON=1`` is set, the numpy fallback runs instead. Both
produce identical bits, so results never depend on the backend.
"""

from __future__ import annotations

import os

import numpy as np

from flipflop import _fallback
from flipflop.core import GameParams

try:
    from flipflop import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

if _compiled is not None and os.environ.get("FLIPFLOP_PURE_PYTHON", "") in ("", "0"):
    DEFAULT_BACKEND = "compiled"
else:
    DEFAULT_BACKEND = "python"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _impl(backend):
    name = backend or DEFAULT_BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


def play_draws(u: np.ndarray, x1: float, x2: float, params: GameParams, backend: str | None = None):
    """Equilibrium play for each row ``(m, u1, u2, u_tie)`` of uniforms.

    Returns ``(code, favorite, adjusted1, adjusted2, winner)`` arrays. Codes
    are 0 identical, 1 secured, 2 open, 3 weak favorite, 4 knife-edge; knife
    edges are left unplayed (winner 0) for the caller to resolve.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    n = u.shape[0]
    code = np.empty(n, dtype=np.int8)
    fav = np.empty(n, dtype=np.int8)
    adj1 = np.empty(n, dtype=np.uint8)
    adj2 = np.empty(n, dtype=np.uint8)
    winner = np.empty(n, dtype=np.int8)
    _impl(backend).play_draws(
        u, float(x1), float(x2), float(params.a1), float(params.a2), float(params.phi),
        code, fav, adj1, adj2, winner,
    )
    return code, fav, adj1.view(bool), adj2.view(bool), winner


def exante_payoff_grid(own, opponent: float, responder: int, params: GameParams,
                       backend: str | None = None) -> np.ndarray:
    """Responder's ex-ante payoff at each of its candidate platforms ``own``."""
    own = np.ascontiguousarray(own, dtype=np.float64)
    out = np.empty_like(own)
    _impl(backend).exante_payoff_many(
        own, float(opponent), int(responder), float(params.a1), float(params.a2),
        params.alpha1, params.alpha2, float(params.phi), out,
    )
    return out
