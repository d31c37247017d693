"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]

Both backends are checked for agreement on every input before timing.
"""

import argparse
import random
import sys
import timeit

from brdlab import _kernels_py

try:
    from brdlab import _kernels as _compiled
except ImportError:
    _compiled = None


def random_structure(rng, n, d=1, k=2):
    labels = tuple(rng.randrange(d) for _ in range(n))
    rel = [0] * (n * n)
    for a in range(n):
        for b in range(a + 1, n):
            v = rng.randrange(k)
            rel[a * n + b] = rel[b * n + a] = v
    return labels, tuple(rel)


def workloads(rng):
    canon_in = [random_structure(rng, n) for n in (4, 5, 6, 7) for _ in range(40)]
    pairs = []
    for _ in range(60):
        big = random_structure(rng, 9)
        small = random_structure(rng, 4)
        pairs.append((*small, *big))
    return canon_in, pairs


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return 1
    canon_in, pairs = workloads(random.Random(args.seed))
    for s in canon_in:
        assert _kernels_py.canon(*s) == _compiled.canon(*s)
    for p in pairs:
        assert _kernels_py.count_embeddings(*p) == _compiled.count_embeddings(*p)

    jobs = {
        "canon": lambda m: [m.canon(*s) for s in canon_in],
        "count_embeddings": lambda m: [m.count_embeddings(*p) for p in pairs],
        "embeds": lambda m: [m.embeds(*p) for p in pairs],
    }
    print(f"{'kernel':<18}{'python s':>10}{'cython s':>10}{'speedup':>9}")
    for name, fn in jobs.items():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat))
        print(f"{name:<18}{tp:>10.4f}{tc:>10.4f}{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
