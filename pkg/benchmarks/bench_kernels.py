"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --draws 1000000 --grid 10001
"""

import argparse
import timeit

import numpy as np

from flipflop import GameParams
from flipflop.kernels import available_backends, exante_payoff_grid, play_draws
from flipflop.verification import chunk_uniforms


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=1_000_000)
    ap.add_argument("--grid", type=int, default=10_001)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    params = GameParams(1 / 8, 1 / 3, 0.45)
    u = chunk_uniforms(0, 0, args.draws)
    grid = np.linspace(0.0, 1.0, args.grid)
    backends = available_backends()

    timings = {}
    outputs = {}
    for name in backends:
        t_play = best_of(lambda: play_draws(u, 0.4, 0.8, params, name), args.repeat)
        t_grid = best_of(lambda: exante_payoff_grid(grid, 0.8, 1, params, name), args.repeat)
        timings[name] = (t_play, t_grid)
        outputs[name] = (play_draws(u, 0.4, 0.8, params, name), exante_payoff_grid(grid, 0.8, 1, params, name))

    print(f"{'backend':<10} {'play_draws (s)':>15} {'draws/s':>12} {'payoff grid (s)':>16} {'points/s':>12}")
    for name, (tp, tg) in timings.items():
        print(f"{name:<10} {tp:>15.4f} {args.draws / tp:>12.3g} {tg:>16.4f} {args.grid / tg:>12.3g}")
    if len(backends) == 2:
        (tp_c, tg_c), (tp_p, tg_p) = timings["compiled"], timings["python"]
        print(f"speedup    {tp_p / tp_c:>15.1f}x {'':>12} {tg_p / tg_c:>16.1f}x")
        same = all(np.array_equal(a, b) for a, b in zip(outputs["compiled"][0], outputs["python"][0]))
        same &= np.array_equal(outputs["compiled"][1], outputs["python"][1])
        print(f"bit-identical outputs: {same}")


if __name__ == "__main__":
    main()
