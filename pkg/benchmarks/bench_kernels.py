"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Both implementations are called directly, so one process covers both
backends regardless of FAREYGAUSS_DISABLE_NUMBA. The numba timings exclude
the first (compiling) call.
"""

import argparse
import json
import time

import numpy as np

from fareygauss import _backend, kernels


def best_of(fn, repeat):
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t)
    return min(ts), out


def cases():
    x0 = np.random.default_rng(0).uniform(1e-9, 1, 100)
    cps = np.array([100, 1000, 10_000], dtype=np.int64)
    wk, suf = kernels._digit_bounds(0.9, 120)
    tuple_args = (3, 0.9 + 0j, 0, 120, 1e-15, kernels.MODE_TRACE, wk, suf)
    return {
        "log_tau 100x1e4": (lambda: kernels._gauss_log_tau_nb(x0, 10_000),
                            lambda: kernels._gauss_log_tau_np(x0, 10_000)),
        "passage sums 100x1e4": (lambda: kernels._gauss_passage_sums_nb(x0, cps),
                                 lambda: kernels._gauss_passage_sums_np(x0, cps)),
        "tuple sum l=3 z=0.9": (lambda: complex(np.sum(kernels._tuple_sum_nb(*tuple_args)[0])),
                                lambda: kernels._tuple_sum_np(*tuple_args)[0]),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args()
    if not _backend.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rows = []
    print(f"{'case':<24}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  max|diff|")
    for name, (nb, npf) in cases().items():
        nb()  # compile
        t_nb, a = best_of(nb, args.repeat)
        t_np, b = best_of(npf, 1)
        diff = float(np.nanmax(np.abs(np.asarray(a) - np.asarray(b))))
        rows.append({"case": name, "numba_s": t_nb, "numpy_s": t_np, "max_abs_diff": diff})
        print(f"{name:<24}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}x  {diff:.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
