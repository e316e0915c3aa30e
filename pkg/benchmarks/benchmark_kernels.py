#!/usr/bin/env python3
"""Compare the compiled and pure-numpy hot-kernel paths.

The package selects its kernel path at import time (SECUREPIM_NO_NUMBA=1
forces pure numpy), so both implementations are imported here explicitly and
timed side by side on the same operands.

Usage:
    python benchmarks/benchmark_kernels.py [--size 512] [--repeat 20]
                                           [--json out.json]
"""

import argparse
import json
import sys
import time

import numpy as np

from securepim import kernels, mac


def bench(fn, args, repeat):
    fn(*args)  # warmup (includes JIT compilation for the compiled path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=512,
                    help="matrix dimension n for n x n operands")
    ap.add_argument("--repeat", type=int, default=20,
                    help="timed repetitions (best-of reported)")
    ap.add_argument("--json", help="also write results to this path")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    n = args.size
    W = rng.integers(0, 1 << 32, size=(n, n), dtype=np.uint32)
    x = rng.integers(0, 1 << 32, size=n, dtype=np.uint32)
    lifted = np.asarray(rng.integers(0, mac.Q, size=(n, n)), dtype=np.uint64)
    vec = np.ascontiguousarray(lifted[0])
    tags = np.asarray(rng.integers(0, mac.Q, size=n), dtype=np.uint64)
    s = 0x1234_5678_9ABC_DEF

    cases = [
        ("gemv", kernels.gemv_np, (W, x)),
        ("gemv_t", kernels.gemv_t_np, (W, x)),
        ("tag_columns", kernels.tag_columns_np, (lifted, s)),
        ("poly_hash", kernels.poly_hash_np, (vec, s)),
        ("dot_tags", kernels.dot_tags_np, (tags, vec)),
    ]
    compiled = {
        "gemv": getattr(kernels, "gemv_nb", None),
        "gemv_t": getattr(kernels, "gemv_t_nb", None),
        "tag_columns": getattr(kernels, "tag_columns_nb", None),
        "poly_hash": getattr(kernels, "poly_hash_nb", None),
        "dot_tags": getattr(kernels, "dot_tags_nb", None),
    }

    results = {"size": n, "numba_available": kernels.HAVE_NUMBA, "kernels": {}}
    header = f"{'kernel':<14}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, np_fn, operands in cases:
        t_np = bench(np_fn, operands, args.repeat) * 1e3
        row = {"numpy_ms": t_np}
        nb_fn = compiled[name]
        if nb_fn is not None:
            t_nb = bench(nb_fn, operands, args.repeat) * 1e3
            row["numba_ms"] = t_nb
            row["speedup"] = t_np / t_nb if t_nb else None
            print(f"{name:<14}{t_np:>12.3f}{t_nb:>12.3f}{row['speedup']:>10.2f}")
        else:
            print(f"{name:<14}{t_np:>12.3f}{'(n/a)':>12}{'':>10}")
        results["kernels"][name] = row

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
        print(f"\nwrote {args.json}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
