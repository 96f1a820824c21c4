"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from latqrs._backend import available_backends
from latqrs.samplers import klein_context


def workloads():
    rng = np.random.Generator(np.random.Philox(1))
    B = rng.integers(-3, 4, size=(6, 6)) + 8 * np.eye(6, dtype=int)
    ctx = klein_context(B, 6.0, rng.normal(size=6))
    U = rng.random((20_000, 6))
    X = rng.integers(-4, 5, size=(20_000, 6))
    args = (ctx.qr.R, ctx.c_prime, ctx.s_i)
    return {
        "klein_batch 20k x 6": lambda k: k.klein_batch(*args, U),
        "support_logs 20k x 6": lambda k: k.support_logs(*args, X),
        "enumerate_ball 52k pts, n=6": lambda k: k.enumerate_ball(ctx.qr.R, ctx.c_prime, 40.0**2, 1 << 20),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    names = sorted(backends)
    print(f"{'workload':28s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in workloads().items():
        best = {n: min(timeit.repeat(lambda: fn(backends[n]), number=1, repeat=args.repeat)) for n in names}
        row = f"{label:28s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if len(names) == 2:
            row += f"{best['python'] / best['cython']:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
