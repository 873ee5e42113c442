"""Compare the compiled and pure-Python SMATCH hill-climbing kernels.

    python3 benchmarks/bench_smatch.py --sizes 10 20 40 --pairs 20 --restarts 4

Both kernels run the same climb move for move, so the script also checks that
they report identical scores and mappings.
"""

import argparse
import random
import statistics
import sys
import time

from qamrkit.metrics.smatch import get_kernel, unlabeled_smatch
from qamrkit.model import GenericGraph


def random_graph(rng, n, vocab, p_edge, prefix):
    g = GenericGraph()
    ids = [f"{prefix}{i}" for i in range(n)]
    for i in ids:
        g.add_node(i, (rng.choice(vocab),))
    for a in ids:
        for b in ids:
            if a != b and rng.random() < p_edge:
                g.add_edge(a, b)
    return g


def time_backend(pairs, backend, restarts, seed, repeat):
    results, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        results = [unlabeled_smatch(g1, g2, restarts=restarts, seed=seed, backend=backend)
                   for g1, g2 in pairs]
        best = min(best, time.perf_counter() - t0)
    return best, results


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40])
    p.add_argument("--pairs", type=int, default=20, help="graph pairs per size")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--repeat", type=int, default=3, help="keep the fastest of N timings")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    try:
        get_kernel("cython")
    except ImportError:
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1

    rng = random.Random(args.seed)
    vocab = [f"w{i}" for i in range(8)]
    print(f"{'nodes':>5}  {'python s':>9}  {'cython s':>9}  {'speedup':>7}  same")
    for n in args.sizes:
        pairs = [(random_graph(rng, n, vocab, 2.0 / n, "a"), random_graph(rng, n, vocab, 2.0 / n, "b"))
                 for _ in range(args.pairs)]
        t_py, r_py = time_backend(pairs, "python", args.restarts, args.seed, args.repeat)
        t_cy, r_cy = time_backend(pairs, "cython", args.restarts, args.seed, args.repeat)
        same = r_py == r_cy
        print(f"{n:>5}  {t_py:>9.3f}  {t_cy:>9.3f}  {t_py / t_cy:>6.1f}x  {same}")
        if not same:
            return 2
    mean_f1 = statistics.mean(r.prf.f1 for r in r_cy)
    print(f"mean F1 at the largest size: {mean_f1:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
