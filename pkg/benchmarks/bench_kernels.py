"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from mmpoly import _pycore, mmp
from mmpoly import toeplitz_symbol as ts
from mmpoly.specfun import ModelParams

try:
    from mmpoly import _core
except ImportError:
    _core = None


def best(fn, repeat):
    t = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        t.append(time.perf_counter() - t0)
    return min(t)


def cases():
    rng = np.random.default_rng(0)
    h = np.ascontiguousarray(np.triu(rng.standard_normal((150, 150)), -1))
    m = 20000
    cub = [np.ascontiguousarray(rng.standard_normal(m) + 1j * rng.standard_normal(m)) for _ in range(3)]
    arr = [np.ascontiguousarray(v) for v in mmp.diagonal_arrays(400, ModelParams.from_b(1.0, 100.0))]
    tarr = [np.ascontiguousarray(v, dtype=np.float64)
            for v in ts.toeplitz_recurrence_arrays(ts.symbol_blocks(1.0, 1.0), 150)]
    prog = mmp.compile_program((40, 40), ModelParams(1.0, 0.4, -0.4), scale=80.0)
    pargs = (prog.alpha, prog.beta, prog.gamma, prog.p, prog.q, prog.r, prog.chain)
    return [
        ("hqr n=150", lambda k: k.hqr(h.copy(), 6000)),
        ("cubic_roots m=20000", lambda k: k.cubic_roots(*cub)),
        ("ratio_zeros n=400 (b=100)", lambda k: k.ratio_zeros(*arr, -400.0, 400.0)),
        ("ratio_zeros toeplitz 150 blocks", lambda k: k.ratio_zeros(*tarr, -50.0, 50.0)),
        ("program_zeros (40,40)", lambda k: k.program_zeros(*pargs, -100.0, 100.0)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    print("%-34s %12s %12s %9s" % ("kernel", "cython [s]", "numpy [s]", "speedup"))
    for name, fn in cases():
        tp = best(lambda: fn(_pycore), a.repeat)
        if _core is None:
            print("%-34s %12s %12.4f %9s" % (name, "n/a", tp, "-"))
            continue
        tc = best(lambda: fn(_core), a.repeat)
        print("%-34s %12.4f %12.4f %8.1fx" % (name, tc, tp, tp / tc))


if __name__ == "__main__":
    main()
