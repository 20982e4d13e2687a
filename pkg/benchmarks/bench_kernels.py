"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--size 512] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from codedlf.kernels import available_backends


def workloads(size, rng):
    values = rng.random((size, size))
    valid = (rng.random((size, size)) < 0.25).astype(np.uint8)
    disp = rng.uniform(5.0, 25.0, (size, size))
    cov = np.ones((size, size), dtype=np.uint8)
    right = rng.random((size, size))
    c = size // 2
    return {
        "fill_rows": lambda k: k.fill_rows(values * valid, valid, 4),
        "warp_rows": lambda k: k.warp_rows(values, disp, cov),
        "sad_curve x3": lambda k: [k.sad_curve(values, right, c, c, 8, -32, 32) for _ in range(3)],
        "masked_l1": lambda k: k.masked_l1(values, right, cov),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    jobs = workloads(args.size, np.random.default_rng(0))
    names = sorted(backends)
    print(f"{'kernel':<14}" + "".join(f"{n + ' ms':>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in jobs.items():
        ms = {}
        for n in names:
            mod = backends[n]
            fn(mod)  # warm-up
            ms[n] = 1e3 * min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        line = f"{label:<14}" + "".join(f"{ms[n]:>12.2f}" for n in names)
        if "cython" in ms:
            line += f"{ms['python'] / ms['cython']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
