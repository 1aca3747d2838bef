"""Decoupling coefficients of the optomechanical evolution operator.

With constant coupling ``g0`` the linear coefficients are running
integrals of the response coefficients,

    F_X = -sqrt(2) g0 int alpha,      F_P = -sqrt(2) g0 int beta,

and the quadratic one is

    F_a = -2 g0^2 [ int beta(t') A(t') dt' + bath part ],   A = int alpha,

where the bath part integrates the mode-resolved convolutions of ``G``
against the spectrum.  In the continuum it collapses onto double
convolutions of ``G`` with the sine kernel ``C`` at difference and sum
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import spectra
from .greens import GreensTable
from .quadrature import cumulative_integral, double_convolution, triangle_integral
from .spectra import BathSpectrum

__all__ = [
    "CoefficientSet",
    "compute_FXP",
    "compute_Fa",
    "compute_bath_product",
    "coefficient_set",
    "displacement",
    "kernel_panels",
]

SQRT2 = math.sqrt(2.0)


def displacement(f_x, f_p):
    """Weyl displacement amplitude ``(F_P - i F_X)/sqrt(2)``."""
    return (np.asarray(f_p) - 1j * np.asarray(f_x)) / SQRT2


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """Decoupling coefficients at one time.

    The discrete arrays are filled only by the explicit-bath oracle.
    """

    t: float
    F_a: float
    F_X: float
    F_P: float
    g0: float
    F_jX: Optional[np.ndarray] = None
    F_jP: Optional[np.ndarray] = None

    @property
    def K_m(self) -> complex:
        return complex(displacement(self.F_X, self.F_P))

    @property
    def K_j(self) -> Optional[np.ndarray]:
        if self.F_jX is None:
            return None
        return displacement(self.F_jX, self.F_jP)

    def eta(self) -> float:
        """``|F_a + F_X F_P / 2 + sum_j F_jX F_jP / 2|`` (discrete sums if present)."""
        total = self.F_a + 0.5 * self.F_X * self.F_P
        if self.F_jX is not None:
            total += 0.5 * float(np.dot(self.F_jX, self.F_jP))
        return abs(total)


def kernel_panels(h: float, cutoff: float) -> int:
    """Gauss panels per half tent so that each panel is no wider than ``1/cutoff``."""
    return max(1, int(math.ceil(h * cutoff)))


def _sine_kernel(spec: BathSpectrum, normalization: str,
                 kernel: Optional[Callable]) -> Callable:
    if kernel is not None:
        return kernel
    return spectra.kernel_C_function(spec, normalization=normalization)


def compute_FXP(table: GreensTable, g0: float) -> tuple[np.ndarray, np.ndarray]:
    """Linear coefficients ``F_X``, ``F_P`` on the table grid."""
    running_alpha = cumulative_integral(table.alpha, table.h)
    # g0 enters last so that the scaling law holds bit for bit
    return g0 * (-SQRT2 * running_alpha), g0 * (-SQRT2 * table.g_cumint)


def compute_Fa(table: GreensTable, spec: Optional[BathSpectrum] = None,
               g0: float = 1.0, *, convention: Optional[str] = None,
               normalization: str = "exact",
               kernel: Optional[Callable] = None) -> np.ndarray:
    """Quadratic coefficient ``F_a`` on the table grid.

    Parameters
    ----------
    table : GreensTable
    spec : BathSpectrum, optional
        Defaults to ``table.spec``.
    g0 : float
    convention : str, optional
        Coupling convention of the bath sum; defaults to the table's.
    normalization : {"exact", "printed"}
        Normalisation of the sine kernel.
    kernel : callable, optional
        Replacement for the sine kernel (vectorised in ``t``).

    Notes
    -----
    The bath part equals ``c int_0^t dt' int_0^t' dt'' V(t', t'')`` with
    ``V = (W_diff + W_sum)/2``, the double convolutions of ``G`` against
    ``C(a - b)`` and ``C(a + b)``.
    """
    spec = table.spec if spec is None else spec
    convention = table.convention if convention is None else convention
    h = table.h
    running_alpha = cumulative_integral(table.alpha, h)
    unitary = cumulative_integral(table.beta * running_alpha, h)
    bath = np.zeros_like(unitary)
    if spec.gamma > 0 or kernel is not None:
        c = spectra.convention_factor(convention)
        C = _sine_kernel(spec, normalization, kernel)
        panels = kernel_panels(h, spec.cutoff)
        w_diff = double_convolution(table.g_values, h, C, panels=panels)
        w_sum = double_convolution(table.g_values, h, C, hankel=True, panels=panels)
        bath = c * triangle_integral(0.5 * (w_diff + w_sum), h)
    return (g0 * g0) * (-2.0 * (unitary + bath))


def compute_bath_product(table: GreensTable, spec: Optional[BathSpectrum] = None,
                         g0: float = 1.0, *, convention: Optional[str] = None,
                         normalization: str = "exact",
                         kernel: Optional[Callable] = None) -> np.ndarray:
    """Continuum limit of ``sum_j F_jX F_jP / 2``.

    Equals ``g0^2 c int dW sigma(W) Abar(W, t) Bbar(W, t)`` where ``Abar`` and
    ``Bbar`` are running integrals of the cosine and sine convolutions of
    ``G``; evaluated as a square double integral of convolution tables.
    """
    spec = table.spec if spec is None else spec
    convention = table.convention if convention is None else convention
    n = len(table.g_values)
    if spec.gamma == 0 and kernel is None:
        return np.zeros(n)
    h = table.h
    c = spectra.convention_factor(convention)
    C = _sine_kernel(spec, normalization, kernel)
    panels = kernel_panels(h, spec.cutoff)
    w_diff = double_convolution(table.g_values, h, C, panels=panels)
    w_sum = double_convolution(table.g_values, h, C, hankel=True, panels=panels)
    # cos(Wa) sin(Wb) -> [C(b - a) + C(a + b)] / 2
    square = 0.5 * (w_diff.T + w_sum)
    out = np.zeros(n)
    for m in range(1, n):
        w = np.full(m + 1, h)
        w[0] = w[-1] = 0.5 * h
        out[m] = w @ square[:m + 1, :m + 1] @ w
    return (g0 * g0) * (c * out)


def coefficient_set(table: GreensTable, g0: float, t: float, *,
                    spec: Optional[BathSpectrum] = None,
                    convention: Optional[str] = None,
                    normalization: str = "exact") -> CoefficientSet:
    """Continuum coefficients at a single grid time."""
    idx = int(table.index_of(t)[0])
    sub = GreensTable(t_max=idx * table.h, h=table.h,
                      g_values=table.g_values[:idx + 1],
                      g_cumint=table.g_cumint[:idx + 1], spec=table.spec,
                      tol=table.tol, convention=table.convention,
                      levels=table.levels)
    f_x, f_p = compute_FXP(sub, g0)
    f_a = compute_Fa(sub, spec, g0, convention=convention,
                     normalization=normalization)
    return CoefficientSet(t=idx * table.h, F_a=float(f_a[-1]), F_X=float(f_x[-1]),
                          F_P=float(f_p[-1]), g0=g0)
