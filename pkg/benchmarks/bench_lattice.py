"""Wall-clock comparison of the compiled and pure-Python lattice kernels.

    python benchmarks/bench_lattice.py [--sizes 60,200,600] [--t-max 50] [--repeat 3]

Each run evolves the fig5 parameter set (n0=12, omega_a=0) with the
default absorber and checks that both kernels return identical ``c_a``.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

import numpy as np

from fanolab import lattice
from fanolab.model import ModelParams

PARAMS = ModelParams(kappa0=1.0, kappaa=0.2, n0=12, omega_a=0.0)


def time_run(cfg, backend, repeat):
    samples, trace = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = lattice.integrate(PARAMS, cfg, backend=backend)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples), trace


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="60,200,600")
    ap.add_argument("--t-max", type=float, default=50.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = lattice.available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; run `python setup.py build_ext --inplace`", file=sys.stderr)
        return 1

    print(f"{'N':>6} {'steps':>7} {'compiled [s]':>13} {'python [s]':>11} {'speedup':>8}  identical")
    for n in (int(x) for x in args.sizes.split(",")):
        cfg = lattice.SimConfig(
            N=n, t_max=args.t_max, absorber=lattice.Absorber(n - n // 4, 1.0, 3), store_sites=False
        )
        t_c, tr_c = time_run(cfg, "compiled", args.repeat)
        t_p, tr_p = time_run(cfg, "python", args.repeat)
        same = np.array_equal(tr_c.ca_series, tr_p.ca_series)
        print(f"{n:>6} {tr_c.steps_accepted:>7} {t_c:>13.4f} {t_p:>11.4f} {t_p / t_c:>8.1f}  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
