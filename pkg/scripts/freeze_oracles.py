"""Compute reference values with mpmath only and freeze them for the tests.

Nothing from the package is imported: every quantity is obtained directly
from its defining integral at 30 significant digits.

    python3 scripts/freeze_oracles.py   # rewrites tests/data/oracle_values.json
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracle_values.json"


def sigma(k, gamma, cutoff):
    k, gamma, cutoff = mp.mpf(k), mp.mpf(gamma), mp.mpf(cutoff)
    return lambda w: gamma * w * (w / cutoff) ** (k - 1) * mp.exp(-w / cutoff)


def sine_kernel(k, gamma, cutoff, t):
    f = sigma(k, gamma, cutoff)
    t = mp.mpf(t)
    return mp.quadosc(lambda w: f(w) * mp.sin(w * t), [0, mp.inf], omega=t)


def friction_kernel(k, gamma, cutoff, t, c):
    f = sigma(k, gamma, cutoff)
    t = mp.mpf(t)
    if t == 0:
        return c * mp.quad(lambda w: f(w) / w, [0, cutoff, mp.inf])
    # quadosc misjudges the integrable endpoint singularity of sigma/W for
    # k < 1; the tail beyond 80 cutoffs is below 1e-34, so plain panels suffice
    return c * mp.quad(lambda w: f(w) / w * mp.cos(w * t),
                       mp.linspace(0, 80 * cutoff, 400))


def laplace_friction(k, gamma, cutoff, s, c):
    f = sigma(k, gamma, cutoff)
    return c * mp.quad(lambda w: f(w) / w * s / (w * w + s * s),
                       [0, abs(s), cutoff, 10 * cutoff, mp.inf])


def response(k, gamma, cutoff, t, c):
    """Inverse Laplace transform of 1/(s^2 + 1 + s K(s)), K by direct quadrature."""
    def g(s):
        return 1 / (s * s + 1 + s * laplace_friction(k, gamma, cutoff, s, c))
    return mp.invertlaplace(g, t, method="dehoog", degree=30)


def main():
    two_pi = 2 / mp.pi
    data = {"note": "mpmath reference values at 30 digits; see scripts/freeze_oracles.py"}

    data["spectral_density"] = [
        {"k": 2.0, "gamma": 0.3, "cutoff": 1.0, "omega": 2.0,
         "value": float(sigma(2, 0.3, 1)(mp.mpf(2)))},
        {"k": 0.5, "gamma": 0.3, "cutoff": 100.0, "omega": 7.5,
         "value": float(sigma(0.5, 0.3, 100)(mp.mpf(7.5)))},
    ]
    data["total_weight"] = [
        {"k": k, "gamma": 0.3, "cutoff": 1.0, "omega_max": 20.0,
         "value": float(mp.quad(sigma(k, 0.3, 1), [0, 1, 20]))}
        for k in (0.5, 1.0, 2.0)]

    rows = []
    for k, cutoff, t in [(1.0, 1.0, 1.0), (0.5, 1.0, 2.0), (2.0, 1.0, 0.7),
                         (1.0, 100.0, 0.05), (2.0, 100.0, 1.0), (0.5, 100.0, 0.3),
                         (1.5, 3.0, 0.4), (0.75, 1.0, 4.0)]:
        rows.append({"k": k, "gamma": 0.3, "cutoff": cutoff, "t": t,
                     "value": float(sine_kernel(k, 0.3, cutoff, t))})
    data["sine_kernel"] = rows

    rows = []
    for k, cutoff, t in [(0.5, 1.0, 0.0), (0.5, 1.0, 1.5), (1.0, 100.0, 0.02),
                         (2.0, 1.0, 3.0), (1.5, 2.0, 0.6)]:
        rows.append({"k": k, "gamma": 0.3, "cutoff": cutoff, "t": t,
                     "convention": "two-over-pi",
                     "value": float(friction_kernel(k, 0.3, cutoff, t, two_pi))})
    data["friction_kernel"] = rows

    rows = []
    for k in (0.5, 1.0, 2.0):
        for cutoff in (1.0, 100.0):
            for s in (0.3, 1.0, 5.0):
                rows.append({"k": k, "gamma": 0.3, "cutoff": cutoff, "s": s,
                             "convention": "two-over-pi",
                             "value": float(laplace_friction(k, 0.3, cutoff, mp.mpf(s), two_pi))})
    data["laplace_kernel"] = rows

    rows = []
    for k, cutoff in [(1.0, 1.0), (0.5, 100.0), (2.0, 1.0)]:
        for t in (1.0, 4.0, 9.5):
            rows.append({"k": k, "gamma": 0.3, "cutoff": cutoff, "t": t,
                         "convention": "two-over-pi",
                         "value": float(response(k, 0.3, cutoff, t, two_pi))})
    data["response"] = rows

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
