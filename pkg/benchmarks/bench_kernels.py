#!/usr/bin/env python3
"""Benchmark the compiled rollout kernels against the numpy fallback.

Run after `pip install -e .`:

    python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from scorelife._kernels import pure
from scorelife.envs import CartpoleParams

try:
    from scorelife._kernels import _speedups
except ImportError:
    _speedups = None


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--batch", type=int, default=4096, help="life values per call")
    ap.add_argument("--horizon", type=int, default=80)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    digits = rng.integers(0, 2, size=(args.batch, args.horizon + 1)).astype(np.uint8)
    x0 = np.array([0.01, -0.05, 0.02, 0.1])
    params = CartpoleParams().as_tuple()

    cases = [
        ("cartpole quadratic", lambda m: m.cartpole_scores(x0, digits, 0.8, args.horizon, 0, params)),
        ("cartpole reward   ", lambda m: m.cartpole_scores(x0, digits, 0.8, args.horizon, 1, params)),
        ("cycle mdp         ", lambda m: m.cycle_scores(0, 3, digits, 0.5, args.horizon)),
    ]

    n_rollouts = args.batch
    print(f"batch={args.batch} horizon={args.horizon} best-of-{args.repeats}")
    print(f"{'kernel':<20} {'pure numpy':>12} {'compiled':>12} {'speedup':>9}")
    for name, call in cases:
        t_pure = time_call(call, pure, repeats=args.repeats)
        if _speedups is None:
            print(f"{name:<20} {t_pure * 1e3:>9.2f} ms {'n/a':>12}")
            continue
        t_fast = time_call(call, _speedups, repeats=args.repeats)
        a = call(pure)
        b = call(_speedups)
        assert np.allclose(a, b, atol=1e-12), f"{name}: backends disagree"
        print(
            f"{name:<20} {t_pure * 1e3:>9.2f} ms {t_fast * 1e3:>9.2f} ms {t_pure / t_fast:>8.1f}x"
            f"   ({n_rollouts / t_fast / 1e6:.2f}M rollouts/s compiled)"
        )


if __name__ == "__main__":
    main()
