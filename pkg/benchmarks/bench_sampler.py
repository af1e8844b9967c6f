"""Compare the compiled and numpy sampling kernels.

    python3 benchmarks/bench_sampler.py [--n N] [--repeat R]

Both backends must produce identical counts; the script exits non-zero if
they do not.
"""
import argparse
import sys
import time

from bellcheck import fixtures
from bellcheck.sampler import available_backends, sample

CASES = [
    ("carddeck", ("look", "look")),
    ("product", ("x0", "y1")),
    ("carddeck-complete", ("look", "look")),
]


def bench(name, profile, backend, n, repeat):
    model = fixtures.get(name)
    best, counts = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        counts = sample(model, profile, n, 12345, backend=backend).counts
        best = min(best, time.perf_counter() - start)
    return best, counts


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = available_backends()
    print(f"n={args.n}  best of {args.repeat}  backends: {', '.join(backends)}")
    ok = True
    for name, profile in CASES:
        results = {b: bench(name, profile, b, args.n, args.repeat) for b in backends}
        line = [f"{name:<18}"]
        for b, (t, _) in results.items():
            line.append(f"{b} {t:7.3f}s ({args.n / t / 1e6:6.1f} M/s)")
        if "cython" in results:
            line.append(f"speedup x{results['python'][0] / results['cython'][0]:.1f}")
        same = len({c for _, c in results.values()}) == 1
        ok &= same
        line.append("counts identical" if same else "COUNTS DIFFER")
        print("  ".join(line))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
