"""Mechanical response function of the damped oscillator.

The response ``G`` solves

    G'' + G + int_0^t Sigma(t - u) G'(u) du = 0,   G(0) = 0,  G'(0) = 1.

Integrating twice gives a linear Volterra equation of the second kind,

    G(t) = t - int_0^t L(t - u) G(u) du,   L(v) = v + int_0^v Sigma,

solved here by product integration with piecewise-linear ``G`` and the
kernel integrated exactly against hat functions.  The scheme is second
order; Romberg extrapolation over successive step halvings supplies both
accuracy and an error estimate.  An independent check inverts
``g(s) = 1/(s^2 + 1 + s Sigma~(s))`` numerically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import mpmath
import numpy as np

from . import spectra
from .errors import AccuracyNotReached, ConvergenceError, DomainError, InstabilityError
from .quadrature import hat_weights, oscillatory_convolution
from .spectra import BathSpectrum

__all__ = [
    "GreensTable",
    "LaplaceResponse",
    "solve_greens",
    "invert_laplace",
    "convolve_bath_coeffs",
    "write_greens_csv",
]

MAX_STEP = 0.05


@dataclass(frozen=True, eq=False)
class GreensTable:
    """Response function on the grid ``t_n = n h``.

    Attributes
    ----------
    t_max, h : float
    g_values : ndarray
        ``G(t_n)``.
    g_cumint : ndarray
        ``int_0^{t_n} G``.
    spec : BathSpectrum
    tol : float
        Error estimate achieved by the solver.
    convention : str
        Coupling convention of the friction kernel.
    levels : int
        Number of step halvings used by the extrapolation.
    """

    t_max: float
    h: float
    g_values: np.ndarray
    g_cumint: np.ndarray
    spec: BathSpectrum
    tol: float
    convention: str = "two-over-pi"
    levels: int = 0

    def __post_init__(self):
        for name in ("g_values", "g_cumint"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.g_values)) * self.h

    @property
    def alpha(self) -> np.ndarray:
        """Position-to-position coefficient, ``1 - int_0^t G``."""
        return 1.0 - self.g_cumint

    @property
    def beta(self) -> np.ndarray:
        """Momentum-to-position coefficient, ``G`` itself."""
        return self.g_values

    def index_of(self, t) -> np.ndarray:
        """Grid indices of the times ``t``; raises if a time is off grid."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.rint(t / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= len(self.g_values)) or \
                np.any(np.abs(idx * self.h - t) > 1e-9 * max(1.0, self.t_max)):
            raise DomainError("requested times are not on the table grid")
        return idx


def _volterra_pass(spec: BathSpectrum, convention: str, t_max: float, h: float,
                   bound: float) -> tuple[np.ndarray, np.ndarray]:
    """One product-trapezoid solve; returns G and its running integral."""
    n = int(round(t_max / h))
    t = np.arange(n + 1) * h
    # L(v) = v integrates exactly against the tents
    weights = h * h * np.arange(n + 1, dtype=float)
    weights[0] = h * h / 6.0
    if spec.gamma > 0:
        panels = max(1, int(math.ceil(h * spec.cutoff)))
        weights = weights + hat_weights(
            lambda v: spectra.memory_kernel_integral(spec, v, convention),
            h, n, panels=panels)
    g = np.zeros(n + 1)
    diag = 1.0 + weights[0]
    reversed_w = weights[::-1].copy()  # reversed_w[n - j] = weights[j]
    for i in range(1, n + 1):
        # sum_{j=1}^{i-1} weights[i-j] g[j]
        acc = np.dot(reversed_w[n - i + 1:n], g[1:i]) if i > 1 else 0.0
        g[i] = (t[i] - acc) / diag
        if abs(g[i]) > bound:
            raise InstabilityError(
                f"|G| exceeded {bound:g} at t={t[i]:.4g}; check the kernel sign "
                "and coupling convention")
    cum = np.zeros(n + 1)
    cum[1:] = np.cumsum(0.5 * h * (g[1:] + g[:-1]))
    return g, cum


def _romberg_step(table: list[list[np.ndarray]], fresh: np.ndarray) -> list[np.ndarray]:
    row = [fresh]
    prev = table[-1] if table else []
    for j in range(1, len(prev) + 1):
        factor = 4.0 ** j
        row.append(row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0))
    table.append(row)
    return row


def solve_greens(spec: BathSpectrum, t_max: float, h: float, tol: float = 1e-6,
                 *, convention: str = "two-over-pi", max_halvings: int = 6,
                 bound: float = 1e3) -> GreensTable:
    """Tabulate the response function on ``t_n = n h``.

    Parameters
    ----------
    spec : BathSpectrum
    t_max : float
        Horizon; rounded to a whole number of steps.
    h : float
        Output step, ``0 < h <= 0.05``.
    tol : float
        Target for the extrapolation error estimate (max abs over the grid).
    convention : {"two-over-pi", "unit"}
        Coupling convention of the friction kernel.
    max_halvings : int
        Maximum number of step halvings beyond ``h``.
    bound : float
        Instability threshold on ``|G|``.

    Returns
    -------
    GreensTable

    Raises
    ------
    ConvergenceError
        If the estimate stays above ``tol`` after ``max_halvings`` halvings.
    InstabilityError
        If ``|G|`` exceeds ``bound``.
    """
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    if not 0 < h <= MAX_STEP:
        raise DomainError(f"h must lie in (0, {MAX_STEP}]")
    if not tol > 0:
        raise DomainError("tol must be positive")
    spectra.convention_factor(convention)
    n = int(round(t_max / h))
    if n < 1:
        raise DomainError("t_max must cover at least one step")
    g_rows: list[list[np.ndarray]] = []
    c_rows: list[list[np.ndarray]] = []
    estimate = np.inf
    best_g = best_c = None
    for level in range(max_halvings + 1):
        stride = 2 ** level
        g, cum = _volterra_pass(spec, convention, n * h, h / stride, bound)
        g_row = _romberg_step(g_rows, g[::stride])
        c_row = _romberg_step(c_rows, cum[::stride])
        if level == 0:
            continue
        g_est = np.max(np.abs(g_row[-1] - g_rows[-2][-1]))
        c_est = np.max(np.abs(c_row[-1] - c_rows[-2][-1]))
        level_est = max(g_est, c_est)
        if level_est < estimate:
            estimate, best_g, best_c = level_est, g_row[-1], c_row[-1]
        if level_est <= tol:
            break
    else:
        raise ConvergenceError(
            f"response function not converged: estimate {estimate:.3e} > tol {tol:.1e}",
            estimate=float(best_g[-1]), error=estimate, tol=tol)
    g_out = best_g.copy()
    g_out[0] = 0.0
    c_out = best_c.copy()
    c_out[0] = 0.0
    return GreensTable(t_max=n * h, h=h, g_values=g_out, g_cumint=c_out,
                       spec=spec, tol=float(estimate), convention=convention,
                       levels=len(g_rows) - 1)


# ---------------------------------------------------------------------------
# Laplace-domain cross-check
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaplaceResponse:
    """Callable ``s -> g(s)`` working in mpmath arithmetic.

    Build from a spectrum with :meth:`from_spectrum`, or wrap any function
    of a complex ``s``.
    """

    func: Callable
    label: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, s):
        return self.func(s)

    @classmethod
    def from_spectrum(cls, spec: BathSpectrum,
                      convention: str = "two-over-pi") -> "LaplaceResponse":
        spectra.convention_factor(convention)

        def g(s):
            kernel = spectra.laplace_kernel_complex(spec, s, convention)
            return 1 / (s * s + 1 + s * kernel)

        return cls(g, label="spectrum",
                   params={"spec": spec, "convention": convention})

    @classmethod
    def free(cls) -> "LaplaceResponse":
        """Undamped oscillator, ``1/(s^2 + 1)``."""
        return cls(lambda s: 1 / (s * s + 1), label="free")


def invert_laplace(resp: LaplaceResponse, t: float, accuracy: float = 1e-8, *,
                   degree: int = 24, max_degree: int = 96) -> float:
    """Numerical inverse Laplace transform by the de Hoog algorithm.

    The Fourier-series inversion on a Bromwich line is accelerated by a
    continued fraction; ``degree`` controls the number of abscissae
    (``2 degree + 1``).  The result at ``degree`` is compared with
    ``degree + 12``; the degree is raised until the two agree to ``accuracy``.
    The bound never drops below double-precision round-off.

    Raises
    ------
    AccuracyNotReached
        Carrying the best estimate and the last difference as error bound.
    """
    if not t > 0:
        raise DomainError("invert_laplace requires t > 0")
    best, bound = math.nan, math.inf
    d = degree
    while d <= max_degree:
        with mpmath.workdps(15):
            lo = mpmath.invertlaplace(resp, t, method="dehoog", degree=d)
        with mpmath.workdps(15):
            hi = mpmath.invertlaplace(resp, t, method="dehoog", degree=d + 12)
        lo, hi = float(mpmath.re(lo)), float(mpmath.re(hi))
        # both results are rounded to double precision
        diff = max(abs(hi - lo), np.finfo(float).eps * max(abs(hi), 1e-300))
        if diff < bound:
            best, bound = hi, diff
        if diff <= accuracy:
            return hi
        d = int(d * 1.5)
    raise AccuracyNotReached(
        f"inverse Laplace at t={t}: error bound {bound:.3e} > {accuracy:.1e}",
        estimate=best, error=bound, tol=accuracy)


# ---------------------------------------------------------------------------
# bath-mode convolutions
# ---------------------------------------------------------------------------

def convolve_bath_coeffs(table: GreensTable, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Convolutions of ``G`` with ``cos(omega t)`` and ``sin(omega t)``.

    Returns ``(alpha_bar, beta_bar)`` with
    ``alpha_bar(t_n) = int_0^{t_n} G(t_n - u) cos(omega u) du`` and the sine
    analogue.  ``G`` is interpolated locally by polynomials and the
    oscillatory factor integrated exactly.
    """
    if not omega >= 0:
        raise DomainError("omega must be non-negative")
    z = oscillatory_convolution(table.g_values, table.h, omega)
    return z.real.copy(), z.imag.copy()


def write_greens_csv(table: GreensTable, path) -> Path:
    """Debug dump with columns ``t, G, alpha, beta``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "G", "alpha", "beta"])
        for row in zip(table.times, table.g_values, table.alpha, table.beta):
            writer.writerow([repr(float(x)) for x in row])
    return path
