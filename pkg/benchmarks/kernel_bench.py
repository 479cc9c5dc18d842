"""Compare the compiled kernel core against the numpy fallback.

Run:  python benchmarks/kernel_bench.py
The backend is chosen at import time, so the comparison imports both
implementations explicitly and times the same workloads.
"""

import math
import time

import numpy as np

from ricci_ovals import _core_py
from ricci_ovals import kernels

try:
    from ricci_ovals import _core
except ImportError:
    _core = None


def time_fn(fn, *args, repeat=200):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_rhs(n):
    sig = np.linspace(-24.0, 24.0, n)
    h = sig[1] - sig[0]
    u = math.sqrt(2.0) + 1e-3 * np.exp(-(sig / 8.0) ** 2)
    rows = []
    for name, mod in (("numpy", _core_py), ("compiled", _core)):
        if mod is None:
            continue
        du, d2u = mod.sigma_derivs(u, h)

        def full(mod=mod, du=du, d2u=d2u):
            a, b = mod.sigma_derivs(u, h)
            return mod.rescaled_rhs_core(u, a, b, sig, h, n // 2)

        rows.append((name, time_fn(full)))
    return rows


def bench_physical(n):
    x = np.linspace(-1.0, 1.0, n)
    psi = 2.0 * np.cos(math.pi * x / 2.0)
    psi[0] = psi[-1] = 0.0
    Q = psi**2
    h = x[1] - x[0]
    rows = []
    for name, mod in (("numpy", _core_py), ("compiled", _core)):
        if mod is None:
            continue
        rows.append((name, time_fn(lambda mod=mod: mod.physical_q_rhs(Q, x, h, -math.pi, math.pi, True))))
    return rows


def bench_step_rate():
    from ricci_ovals.solver import SolverConfig, run

    cfg = SolverConfig(kind="cylinder", n=512, tau_init=-20.0, tau_end=-18.0)
    t0 = time.perf_counter()
    run(cfg)
    return time.perf_counter() - t0


def main():
    print(f"active backend: {kernels.BACKEND}")
    if _core is None:
        print("compiled core not built; showing numpy only")
    for n in (257, 1025, 4097):
        print(f"\nrescaled rhs, n = {n}")
        for name, dt in bench_rhs(n):
            print(f"  {name:9s} {dt*1e6:9.1f} us/call")
        print(f"physical Q-rhs, n = {n}")
        for name, dt in bench_physical(n):
            print(f"  {name:9s} {dt*1e6:9.1f} us/call")
    print(f"\nend-to-end cylinder run (N=512, 2 units): {bench_step_rate():.2f} s "
          f"on the {kernels.BACKEND} backend")


if __name__ == "__main__":
    main()
