"""Figure-level metrics under both normalisation settings.

For each setting the script reports the plateau, ordering and closeness
metrics used in the acceptance suite, then bisects for the largest
dissipation rate at which every low-cutoff curve stays within 20% of the
closed curve.

    python3 scripts/convention_study.py
"""

from __future__ import annotations

import numpy as np
from scipy import optimize

from kerrbath.greens import solve_greens
from kerrbath.nonlinearity import eta_series
from kerrbath.spectra import BathSpectrum

SETTINGS = {"figure": ("unit", "printed"), "default": ("two-over-pi", "exact")}
KINDS = {"subohmic": 0.5, "ohmic": 1.0, "superohmic": 2.0}
BAND = 0.20


def eta(k, gamma, cutoff, convention, normalization):
    spec = BathSpectrum(k, gamma, cutoff)
    table = solve_greens(spec, 20.0, 0.02, 1e-8, convention=convention)
    return eta_series(table, spec, convention=convention, normalization=normalization)


def worst_deviation(gamma, convention, normalization):
    closed = eta(1.0, 0.0, 1.0, convention, normalization).eta[1:]
    return max(np.max(np.abs(eta(k, gamma, 1.0, convention, normalization).eta[1:] - closed)
                      / closed) for k in KINDS.values())


def main() -> None:
    for label, (convention, normalization) in SETTINGS.items():
        print(f"\n== {label} settings: convention={convention}, kernel={normalization}")
        closed = eta(1.0, 0.0, 100.0, convention, normalization)
        high = {n: eta(k, 0.3, 100.0, convention, normalization) for n, k in KINDS.items()}
        window = closed.times >= 10
        ohm = high["ohmic"]
        slope = np.polyfit(ohm.times[window], ohm.eta[window], 1)[0]
        print(f"cutoff 100: Ohmic eta on [10,20] in [{ohm.eta[window].min():.3f}, "
              f"{ohm.eta[window].max():.3f}], slope {slope:+.4f}")
        print("cutoff 100, t=20: closed {:.3f}, ".format(closed.eta[-1])
              + ", ".join(f"{n} {s.eta[-1]:.3f}" for n, s in high.items()))

        low_closed = eta(1.0, 0.0, 1.0, convention, normalization)
        for n, k in KINDS.items():
            s = eta(k, 0.3, 1.0, convention, normalization)
            rel = np.abs(s.eta[1:] - low_closed.eta[1:]) / low_closed.eta[1:]
            i = int(np.argmax(rel))
            print(f"cutoff 1, {n}: max rel deviation {rel[i]:.3f} at t={s.times[i + 1]:.2f}; "
                  f"max excess over closed {np.max(s.eta - low_closed.eta):+.3f}")

        gamma_star = optimize.brentq(
            lambda g: worst_deviation(g, convention, normalization) - BAND, 1e-3, 0.3,
            xtol=1e-4)
        print(f"largest gamma keeping all cutoff-1 curves within {BAND:.0%}: "
              f"{gamma_star:.4f}")


if __name__ == "__main__":
    main()
