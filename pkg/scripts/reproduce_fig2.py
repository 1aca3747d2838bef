"""Compute both figure presets and print a compact table of the curves.

    python3 scripts/reproduce_fig2.py                  # figure settings
    python3 scripts/reproduce_fig2.py --settings default --out-dir out/default

CSV files and metadata land in ``<out-dir>/fig2a`` and ``<out-dir>/fig2b``.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from kerrbath import cli

SETTINGS = {"figure": ["--convention", "unit", "--kernel-normalization", "printed"],
            "default": ["--convention", "two-over-pi", "--kernel-normalization", "exact"]}
CURVES = ("closed", "subohmic", "ohmic", "superohmic")
REPORT_TIMES = (2.5, 5.0, 10.0, 15.0, 20.0)


def read_eta(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with path.open() as fh:
        rows = list(csv.reader(fh))[1:]
    data = np.array(rows, dtype=float)
    return data[:, 0], data[:, 1]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--settings", choices=sorted(SETTINGS), default="figure")
    parser.add_argument("--out-dir", default="out/fig2")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    status = 0
    for preset in ("fig2a", "fig2b"):
        out = Path(args.out_dir) / preset
        code = cli.main(["--preset", preset, "--out-dir", str(out),
                         "--workers", str(args.workers), *SETTINGS[args.settings]])
        status = max(status, code)
        if code != cli.EXIT_OK:
            print(f"{preset}: exit status {code}", file=sys.stderr)
            continue
        print(f"\n{preset} ({args.settings} settings), eta(t):")
        print("t".rjust(8) + "".join(name.rjust(12) for name in CURVES))
        series = {name: read_eta(out / f"eta_{name}.csv") for name in CURVES}
        times = series["closed"][0]
        for t in REPORT_TIMES:
            i = int(np.argmin(np.abs(times - t)))
            print(f"{t:8.2f}" + "".join(f"{series[n][1][i]:12.4f}" for n in CURVES))
    return status


if __name__ == "__main__":
    sys.exit(main())
