"""Compare the numba and pure-numpy kernels on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 400]

Numba timings exclude compilation (one warm-up call per kernel).
"""
import argparse
import timeit

import numpy as np

from picfuchs._kernels import NUMBA_KERNELS, NUMPY_KERNELS


def workloads(size, rng):
    c = rng.normal(size=9) + 1j * rng.normal(size=9)
    z = rng.normal(size=size * 50) + 1j * rng.normal(size=size * 50)
    C = np.zeros((6, 6), dtype=np.complex128)
    for a in range(6):
        for b in range(6 - a):
            C[a, b] = complex(rng.normal(), rng.normal())
    xs = rng.normal(size=size * 10) + 1j * rng.normal(size=size * 10)
    ys = rng.normal(size=size * 10) + 1j * rng.normal(size=size * 10)
    roots = rng.normal(size=size) + 1j * rng.normal(size=size)
    return {
        "horner": (c, z),
        "taylor_shift": (c, 0.3 + 0.2j),
        "uni_shift_l1": (c, 0.3 + 0.2j),
        "bi_shift_l1": (C, 0.1 - 0.2j, 0.4j, 5),
        "grad_norm_min": (C, C.T.copy(), xs, ys),
        "max_pairwise_distance": (roots,),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    work = workloads(args.size, rng)
    if NUMBA_KERNELS is None:
        print("numba is not importable; only numpy timings are shown")
    print("%-24s %14s %14s %9s" % ("kernel", "numpy [us]", "numba [us]", "speedup"))
    for name, call_args in work.items():
        np_fn = NUMPY_KERNELS[name]
        number = max(1, int(200 / max(args.size / 100, 1)))
        t_np = min(timeit.repeat(lambda: np_fn(*call_args), number=number, repeat=args.repeat)) / number
        if NUMBA_KERNELS is None:
            print("%-24s %14.1f %14s %9s" % (name, t_np * 1e6, "-", "-"))
            continue
        nb_fn = NUMBA_KERNELS[name]
        nb_fn(*call_args)  # compile
        t_nb = min(timeit.repeat(lambda: nb_fn(*call_args), number=number, repeat=args.repeat)) / number
        print("%-24s %14.1f %14.1f %8.1fx" % (name, t_np * 1e6, t_nb * 1e6, t_np / t_nb))


if __name__ == "__main__":
    main()
