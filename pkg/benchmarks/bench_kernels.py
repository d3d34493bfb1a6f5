"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--rows N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from capplan import _kernels


def _cases(rows, rng):
    design = np.column_stack([np.ones(rows), rng.normal(size=(rows, 6))])
    y = design @ rng.normal(size=7) + rng.normal(size=rows)
    ids = np.sort(rng.integers(0, rows // 8, rows)).astype(np.int64)
    values = rng.uniform(0, 100, size=(rows, 7))
    return {
        "qr_reduce": lambda k: k.qr_reduce(design, y),
        "group_sum_count": lambda k: k.group_sum_count(ids, values),
        "group_max": lambda k: k.group_max(ids, values[:, 0].copy()),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    cases = _cases(args.rows, np.random.default_rng(0))
    names = sorted(backends)
    print(f"rows={args.rows:,} repeat={args.repeat} (best of, milliseconds)")
    print(f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for case, fn in cases.items():
        best = {n: min(timeit.repeat(lambda: fn(backends[n]), number=1, repeat=args.repeat)) * 1e3
                for n in names}
        line = f"{case:<18}" + "".join(f"{best[n]:>12.2f}" for n in names)
        if "cython" in best and "python" in best:
            line += f"{best['python'] / best['cython']:>11.2f}x"
        print(line)


if __name__ == "__main__":
    main()
