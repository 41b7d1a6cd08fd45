"""Time the numba and numpy kernel backends side by side.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Covers the two hot spots: batched Jacobi eigendecomposition (ternary grid and
threshold scans run it on ~10^5 small matrices; sample ICS runs it on one
p x p matrix) and the O(n^2) pairwise weight matrix inside tcov. Results are
checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from icsfds import _kernels


def _spd_stack(rng, nb, n):
    g = rng.normal(size=(nb, n, n))
    return g @ np.swapaxes(g, 1, 2) + n * np.eye(n)


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)

    backends = [_kernels.NUMPY_KERNELS]
    if _kernels.NUMBA_KERNELS is None:
        print("numba not installed: timing the numpy backend only")
    else:
        backends.append(_kernels.NUMBA_KERNELS)

    cases = [
        ("jacobi 100000 x 2x2", "jacobi_eigh_batch", (_spd_stack(rng, 100_000, 2),)),
        ("jacobi 2000 x 9x9", "jacobi_eigh_batch", (_spd_stack(rng, 2000, 9),)),
        ("jacobi 1 x 50x50", "jacobi_eigh_batch", (_spd_stack(rng, 1, 50),)),
        ("pair_weights n=1000 p=10", "pair_weights", (rng.normal(size=(1000, 10)), 2.0)),
        ("pair_weights n=2000 p=50", "pair_weights", (rng.normal(size=(2000, 50)), 2.0)),
    ]

    print(f"{'case':28s}" + "".join(f"{b.name:>14s}" for b in backends) + "   speedup")
    for label, kernel, inputs in cases:
        outs, times = [], []
        for b in backends:
            fn = getattr(b, kernel)
            fn(*inputs)  # warm-up / JIT compile
            outs.append(fn(*inputs))
            times.append(_best_of(lambda: fn(*inputs), args.repeat))
        if len(outs) == 2:
            a, b = outs
            if kernel == "jacobi_eigh_batch":
                diff = np.abs(np.sort(a[0], axis=1) - np.sort(b[0], axis=1)).max()
            else:
                diff = np.abs(a - b).max()
            assert diff < 1e-9, f"{label}: backends disagree by {diff:.2e}"
        speed = f"{times[0] / times[1]:9.1f}x" if len(times) == 2 else ""
        print(f"{label:28s}" + "".join(f"{t * 1e3:12.2f}ms" for t in times) + "  " + speed)


if __name__ == "__main__":
    main()
