"""Convergence of the explicit-bath nonlinearity towards the continuum result.

For each spectrum preset at cutoff 1 the script doubles the number of bath
modes and prints the largest relative deviation on [0, 10] (same measure as
the acceptance suite) together with the observed order.

    python3 scripts/oracle_convergence.py [--modes 250 500 1000 2000 4000]
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from kerrbath.discrete_oracle import discretize_bath, oracle_eta, truncation_report
from kerrbath.greens import solve_greens
from kerrbath.nonlinearity import eta_series
from kerrbath.spectra import BathSpectrum

KINDS = {"subohmic": 0.5, "ohmic": 1.0, "superohmic": 2.0}


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--modes", type=int, nargs="+", default=[250, 500, 1000, 2000, 4000])
    parser.add_argument("--omega-max", type=float, default=20.0)
    parser.add_argument("--gamma", type=float, default=0.3)
    args = parser.parse_args(argv)

    times = np.arange(0, 501) * 0.02
    for name, k in KINDS.items():
        spec = BathSpectrum(k, args.gamma, 1.0)
        cont = eta_series(solve_greens(spec, 10.0, 0.02, 1e-9), spec).eta
        print(f"\n{name} (k={k})")
        print("       N   deviation   order   kernel dev (t=1)")
        previous = None
        for n in args.modes:
            bath = discretize_bath(spec, n, args.omega_max)
            disc = oracle_eta(bath, 1.0, times).eta
            dev = float(np.max(np.abs(disc - cont) / np.maximum(cont, 0.1)))
            kernel_dev = truncation_report(bath, [1.0])["kernel_rel_deviation"][0]
            order = "" if previous is None or dev == 0 else \
                f"{math.log(previous[1] / dev) / math.log(n / previous[0]):7.2f}"
            print(f"{n:8d} {dev:11.3e} {order:>7} {kernel_dev:14.3e}")
            previous = (n, dev)


if __name__ == "__main__":
    main()
