"""Time the compiled kernel against the numpy fallback on catalog expressions.

    python3 benchmarks/bench_kernel.py [--points N] [--repeat R]
"""

import argparse
import time

import numpy as np

from minsurf import catalog, kernel
from minsurf import expr as ex


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--entries", nargs="*", default=["elliptic-catenoid", "timelike-catalan-1st",
                                                      "enneper-1st-kind", "epicycloid-3"])
    args = ap.parse_args(argv)

    backends = kernel.available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; only the python backend is available")
    rng = np.random.default_rng(0)
    print(f"{'expression':<44}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name in args.entries:
        d = catalog.get(name).data
        u, v = d.domain.sample_points(d.algebra, grid=1, n_random=args.points, seed=int(rng.integers(1 << 31)))
        for label, e in (("Lz", d.Lz), ("Pz", d.Pz), ("hz", d.hz)):
            prog = ex.compile_expr(e, d.algebra)
            times = {b: best_time(lambda b=b: kernel.evaluate_program(prog, u, v, backend=b), args.repeat)
                     for b in backends}
            ref = kernel.evaluate_program(prog, u, v, backend="python")
            for b in backends:
                got = kernel.evaluate_program(prog, u, v, backend=b)
                assert all(np.allclose(x, y, rtol=1e-13, atol=1e-13) for x, y in zip(got, ref)), (name, label, b)
            row = f"{name + ' ' + label:<44}" + "".join(f"{times[b] * 1e3:>10.2f}ms" for b in backends)
            if "compiled" in times:
                row += f"{times['python'] / times['compiled']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
