"""Compare the compiled and pure-NumPy MLP kernel backends.

Times forward and backward passes at rollout-like and minibatch-like batch
sizes on the default network shape (obs 6 -> hidden 128 -> out 2).

Usage: python benchmarks/bench_kernels.py [--repeats 2000]
"""
import argparse
import time

import numpy as np

from pposmooth._kernels import numpy_backend

try:
    from pposmooth._kernels import _core
except ImportError:
    _core = None


def bench(fn, args, repeats):
    fn(*args)  # warm up
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument("--in-dim", type=int, default=6)
    parser.add_argument("--hidden-dim", type=int, default=128)
    parser.add_argument("--out-dim", type=int, default=2)
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not available; benchmarking numpy backend only")
    backends = [("numpy", numpy_backend)] + ([("cython", _core)] if _core else [])

    rng = np.random.default_rng(0)
    w1 = rng.normal(size=(args.hidden_dim, args.in_dim))
    b1 = np.zeros(args.hidden_dim)
    w2 = rng.normal(size=(args.out_dim, args.hidden_dim))
    b2 = np.zeros(args.out_dim)

    print(f"network {args.in_dim}-{args.hidden_dim}-{args.out_dim}, "
          f"{args.repeats} repeats, times in microseconds\n")
    header = f"{'batch':>6} {'pass':>9}" + "".join(f" {name:>12}" for name, _ in backends)
    if _core:
        header += f" {'speedup':>9}"
    print(header)
    for batch in (1, 32, 128):
        x = rng.normal(size=(batch, args.in_dim))
        gy = rng.normal(size=(batch, args.out_dim))
        _, hidden = numpy_backend.mlp_forward(w1, b1, w2, b2, x)
        for label, call_args, attr in (
            ("forward", (w1, b1, w2, b2, x), "mlp_forward"),
            ("backward", (w1, w2, x, hidden, gy), "mlp_backward"),
        ):
            times = [bench(getattr(mod, attr), call_args, args.repeats) for _, mod in backends]
            row = f"{batch:>6} {label:>9}" + "".join(f" {t * 1e6:>11.2f}u" for t in times)
            if _core:
                row += f" {times[0] / times[1]:>8.2f}x"
            print(row)


if __name__ == "__main__":
    main()
