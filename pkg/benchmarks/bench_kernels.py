"""Compiled kernel vs pure-Python kernel vs generic engine.

    python benchmarks/bench_kernels.py [--repeat N] [--t-end T]

Each built-in scenario is integrated with every available path; the table
reports the best wall time of N repeats and checks that the two kernels
agree bitwise.
"""

import argparse
import time

import numpy as np

from sirdelay import _pykernels
from sirdelay.dde import NEGLIGIBLE_LAG, build_mesh, integrate
from sirdelay.model import delayed_field
from sirdelay.workbench import builtin_scenarios

try:
    from sirdelay import _kernels
except ImportError:
    _kernels = None


def _kernel_args(sc, t_end):
    lags = sc.delays.as_tuple()
    mesh = build_mesh(lags, (0.0, t_end), sc.integrator)
    u0 = sc.initial.as_array()
    return (mesh, sc.params.as_array(), sc.incidence.code, sc.incidence.coefficients(),
            sc.vaccination.code, sc.vaccination.coefficients(), sc.treatment.code,
            sc.treatment.coefficients(), lags, np.zeros(1), u0[None, :], u0, NEGLIGIBLE_LAG)


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t-end", type=float, default=None, help="override every horizon")
    ap.add_argument("--skip-generic", action="store_true", help="omit the slow generic engine")
    args = ap.parse_args(argv)

    print(f"{'scenario':<10} {'nodes':>7} {'cython s':>10} {'python s':>10} "
          f"{'generic s':>10} {'speedup':>8} {'bitwise':>8}")
    for sc in builtin_scenarios():
        t_end = args.t_end or sc.t_end
        kargs = _kernel_args(sc, t_end)
        t_py, res_py = _best(lambda: _pykernels.integrate_sir(*kargs), args.repeat)
        if _kernels is not None:
            t_cy, res_cy = _best(lambda: _kernels.integrate_sir(*kargs), args.repeat)
            same = np.array_equal(res_cy[0], res_py[0]) and np.array_equal(res_cy[1], res_py[1])
            cy, speed, bit = f"{t_cy:10.4f}", f"{t_py / t_cy:7.0f}x", str(same)
        else:
            cy, speed, bit = f"{'n/a':>10}", f"{'n/a':>8}", "n/a"
        if args.skip_generic:
            gen = f"{'-':>10}"
        else:
            field = delayed_field(sc.params, sc.incidence, sc.vaccination, sc.treatment)
            t_gen, _ = _best(lambda: integrate(field, sc.delays.as_tuple(), None,
                                               sc.initial.as_array(), (0.0, t_end),
                                               sc.integrator), 1)
            gen = f"{t_gen:10.3f}"
        print(f"{sc.name:<10} {len(kargs[0]):>7} {cy} {t_py:10.4f} {gen} {speed:>8} {bit:>8}")


if __name__ == "__main__":
    main()
