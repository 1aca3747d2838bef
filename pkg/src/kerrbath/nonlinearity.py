"""Self-Kerr nonlinearity of the optomechanical evolution.

``eta(t) = g0^2 |U(t) + c T(t)|`` with the unitary part

    U(t) = int_0^t dt' int_0^t' dt'' [beta(t') alpha(t'') - alpha(t') beta(t'')]

and the bath part

    T(t) = int_0^t dt' int_0^t' dt'' W(t', t''),
    W(t', t'') = int_0^t' da int_0^t'' db G(t' - a) G(t'' - b) C(a - b).

``U`` collapses to a single running integral of ``beta A - alpha B`` with
``A, B`` the running integrals of ``alpha, beta`` and is evaluated with a
high-order rule.  ``W`` is a Toeplitz-sandwich matrix product (O(N^3)), and
``T`` follows by nested trapezoids.  The error of the bath part is estimated
by repeating the computation on every second grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import spectra
from .coefficients import kernel_panels
from .errors import DomainError, GridTooCoarse
from .greens import GreensTable
from .quadrature import cumulative_integral, double_convolution, triangle_integral
from .spectra import BathSpectrum

__all__ = [
    "EtaSeries",
    "eta_closed",
    "eta_series",
    "unitary_integrand",
    "unitary_part",
    "bath_part",
]

PROBE_STRIDE = 8
ERROR_FLOOR = 0.1


@dataclass(frozen=True, eq=False)
class EtaSeries:
    """Samples of the nonlinearity and its two contributions.

    Attributes
    ----------
    times, eta, eta_unitary, eta_bath : ndarray
        ``eta == |eta_unitary + eta_bath|``.
    eta_closed : ndarray
        Reference closed-system curve ``g0^2 (t - sin t)``.
    grid_meta : dict
        Step, refinement level and error estimates.
    params : dict
        Spectrum, coupling and conventions used.
    """

    times: np.ndarray
    eta: np.ndarray
    eta_unitary: np.ndarray
    eta_bath: np.ndarray
    eta_closed: np.ndarray
    grid_meta: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def rows(self):
        return zip(self.times, self.eta, self.eta_unitary, self.eta_bath,
                   self.eta_closed)


_SERIES_TERMS = 9


def eta_closed(g0: float, t):
    """Closed-system nonlinearity ``g0^2 (t - sin t)``.

    Below ``t = 0.5`` an alternating Taylor series avoids the cancellation
    in ``t - sin t``.
    """
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0):
        raise DomainError("eta_closed requires t >= 0")
    small = tt < 0.5
    ts = np.where(small, tt, 0.0)
    series = np.zeros_like(ts)
    term = ts ** 3 / 6.0
    for n in range(_SERIES_TERMS):
        series += term
        term = -term * ts * ts / ((2 * n + 4) * (2 * n + 5))
    value = g0 * g0 * np.where(small, series, tt - np.sin(tt))
    return float(value) if value.ndim == 0 else value


def unitary_integrand(table: GreensTable, rows=None, cols=None) -> np.ndarray:
    """Matrix ``beta(t_p) alpha(t_q) - alpha(t_p) beta(t_q)``."""
    a, b = table.alpha, table.beta
    rows = slice(None) if rows is None else rows
    cols = slice(None) if cols is None else cols
    return np.outer(b[rows], a[cols]) - np.outer(a[rows], b[cols])


def unitary_part(alpha: np.ndarray, beta: np.ndarray, beta_cumint: np.ndarray,
                 h: float) -> np.ndarray:
    """``U(t_n)`` from grid samples; ``beta_cumint`` is the running integral of beta."""
    running_alpha = cumulative_integral(alpha, h)
    return cumulative_integral(beta * running_alpha - alpha * beta_cumint, h)


def bath_part(g_values: np.ndarray, h: float, kernel: Callable, panels: int = 1) -> np.ndarray:
    """``T(t_n)`` for a sine kernel ``kernel`` (without the convention factor)."""
    w = double_convolution(g_values, h, kernel, panels=panels)
    return triangle_integral(w, h)


def _components(alpha, beta, beta_cumint, g_values, h, kernel, panels, factor):
    unitary = unitary_part(alpha, beta, beta_cumint, h)
    if kernel is None:
        bath = np.zeros_like(unitary)
    else:
        bath = factor * bath_part(g_values, h, kernel, panels)
    return unitary, bath


def eta_series(table: GreensTable, spec: Optional[BathSpectrum] = None,
               g0: float = 1.0, times=None, *, convention: Optional[str] = None,
               normalization: str = "exact", kernel: Optional[Callable] = None,
               tol: float = 0.02, probe: bool = True) -> EtaSeries:
    """Nonlinearity on (a subset of) the table grid.

    Parameters
    ----------
    table : GreensTable
    spec : BathSpectrum, optional
        Defaults to ``table.spec``; must describe the same bath.
    g0 : float
        Optomechanical coupling.
    times : array_like, optional
        Grid times to report; all grid points up to ``max(times)`` are used
        internally.  Defaults to the whole grid.
    convention : str, optional
        Coupling convention factor of the bath part (default: the table's).
    normalization : {"exact", "printed"}
        Normalisation of the sine kernel.
    kernel : callable, optional
        Replacement sine kernel, e.g. ``lambda t: 0 * t``.
    tol : float
        Relative tolerance of the step-doubling check at the final time.
    probe : bool
        Whether to run the coarse-grid error probe.

    Raises
    ------
    GridTooCoarse
        If doubling the step changes ``eta`` at the final time by more than
        ``tol`` (relative).
    """
    spec = table.spec if spec is None else spec
    if spec != table.spec:
        raise DomainError("spec does not match the spectrum of the table")
    convention = table.convention if convention is None else convention
    factor = spectra.convention_factor(convention)
    h = table.h
    if times is None:
        idx = np.arange(len(table.g_values))
    else:
        idx = table.index_of(times)
    n_last = int(idx.max())
    sl = slice(0, n_last + 1)
    alpha, beta = table.alpha[sl], table.beta[sl]
    beta_cumint, g_values = table.g_cumint[sl], table.g_values[sl]

    custom_kernel = kernel is not None
    if kernel is None and spec.gamma > 0:
        kernel = spectra.kernel_C_function(spec, normalization=normalization)
    panels = kernel_panels(h, spec.cutoff)
    unitary, bath = _components(alpha, beta, beta_cumint, g_values, h, kernel,
                                panels, factor)
    g2 = g0 * g0
    eta_u, eta_b = g2 * unitary, g2 * bath
    eta = g2 * np.abs(unitary + bath)

    meta = {"h": h, "n_steps": n_last, "greens_levels": table.levels,
            "greens_error": table.tol, "probe_stride": PROBE_STRIDE,
            "estimated_abs_error": 0.0, "estimated_rel_error": 0.0,
            "final_change_rel": 0.0}
    if probe and n_last >= 2 * PROBE_STRIDE:
        m_last = n_last // 2
        cs = slice(0, 2 * m_last + 1, 2)
        u2, b2 = _components(alpha[cs], beta[cs], beta_cumint[cs], g_values[cs],
                             2 * h, kernel, kernel_panels(2 * h, spec.cutoff),
                             factor)
        coarse = g2 * np.abs(u2 + b2)
        fine = eta[cs]
        probe_idx = np.arange(0, m_last + 1, PROBE_STRIDE // 2)
        if probe_idx[-1] != m_last:
            probe_idx = np.append(probe_idx, m_last)
        diff = np.abs(fine[probe_idx] - coarse[probe_idx]) / 3.0
        floor = ERROR_FLOOR * g2
        meta["estimated_abs_error"] = float(diff.max())
        meta["estimated_rel_error"] = float(
            np.max(diff / np.maximum(fine[probe_idx], floor)))
        final_change = abs(fine[-1] - coarse[-1]) / max(fine[-1], floor)
        meta["final_change_rel"] = float(final_change)
        meta["probe_times"] = (2 * h * probe_idx).tolist()
        if final_change > tol:
            raise GridTooCoarse(
                f"doubling the step changes eta(t={2 * h * m_last:.4g}) by "
                f"{final_change:.2%} > {tol:.2%}", estimate=float(fine[-1]),
                error=float(final_change), tol=tol)

    pick = idx
    t = pick * h
    return EtaSeries(times=t, eta=eta[pick], eta_unitary=eta_u[pick],
                     eta_bath=eta_b[pick], eta_closed=eta_closed(g0, t),
                     grid_meta=meta,
                     params={"spec": spec.to_dict(), "g0": g0,
                             "convention": convention,
                             "normalization": normalization,
                             "custom_kernel": custom_kernel})
