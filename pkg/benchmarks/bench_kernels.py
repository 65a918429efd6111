"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--steps N]

Runs the RK4 precession kernel over N steps of the default relaxation
scenario and the Jacobi kernel on the 6x6 Sigma = 0 block, on each backend
that is available, and prints time per call and the speedup.
"""
import argparse
import time

import numpy as np

from donorreg.kernels import load_backend
from donorreg.relaxation import RelaxationScenario
from donorreg.spin_model import SystemParams, build_h0, sector_indices


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rk4(mod, steps):
    sc = RelaxationScenario()
    bz0, bz1 = sc.bz_coefficients
    h = sc.Tc / 2 ** 18

    def run():
        state = np.array(sc.I0)
        mod.rk4_precession(state, sc.gamma_n, sc.Bx, bz0, bz1, 0.0, h, steps, 0,
                           np.zeros((1, 3)))

    return _time(run, 3)


def bench_jacobi(mod, calls):
    h = build_h0(SystemParams())
    idx = sector_indices(0.0)
    block = np.ascontiguousarray(h[np.ix_(idx, idx)].real)

    def run():
        for _ in range(calls):
            mod.jacobi_eigh(block)

    return _time(run, 3) / calls


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--calls", type=int, default=200)
    args = ap.parse_args()
    results = {}
    for name in ("cython", "python"):
        try:
            mod = load_backend(name)
        except ImportError:
            print(f"{name:7s} unavailable")
            continue
        results[name] = (bench_rk4(mod, args.steps), bench_jacobi(mod, args.calls))
        rk, jac = results[name]
        print(f"{name:7s} rk4: {rk / args.steps * 1e9:9.1f} ns/step   "
              f"jacobi 6x6: {jac * 1e6:9.1f} us/call")
    if len(results) == 2:
        c, p = results["cython"], results["python"]
        print(f"speedup  rk4: {p[0] / c[0]:.0f}x   jacobi: {p[1] / c[1]:.0f}x")


if __name__ == "__main__":
    main()
