"""Bath spectral densities and the kernels derived from them.

All frequencies and times are dimensionless, measured in units of the
mechanical frequency.  The spectral family is

    sigma(W) = gamma * W * (W / cutoff)**(k - 1) * exp(-W / cutoff)

with exponent ``k`` (1/2 sub-Ohmic, 1 Ohmic, 2 super-Ohmic).  Three kernels
follow from it:

* the sine kernel ``C(t) = int sigma(W) sin(W t) dW``,
* the friction (memory) kernel ``Sigma(t) = c int sigma(W)/W cos(W t) dW``,
* its Laplace transform ``c int sigma(W)/W * s / (W**2 + s**2) dW``,

where ``c`` is the bath coupling convention factor (2/pi or 1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, DomainError

__all__ = [
    "BathSpectrum",
    "KernelSample",
    "PRESET_EXPONENTS",
    "COUPLING_CONVENTIONS",
    "convention_factor",
    "preset",
    "spectral_density",
    "total_weight",
    "kernel_C",
    "kernel_C_function",
    "memory_kernel",
    "memory_kernel_integral",
    "laplace_kernel",
    "laplace_kernel_complex",
]

PRESET_EXPONENTS = {"subohmic": 0.5, "ohmic": 1.0, "superohmic": 2.0}

COUPLING_CONVENTIONS = {"two-over-pi": 2.0 / math.pi, "unit": 1.0}

KERNEL_NORMALIZATIONS = ("exact", "printed")


def convention_factor(convention: str) -> float:
    """Return the multiplier linking the spectrum to the discrete couplings."""
    try:
        return COUPLING_CONVENTIONS[convention]
    except KeyError:
        raise DomainError(
            f"unknown coupling convention {convention!r}; "
            f"expected one of {sorted(COUPLING_CONVENTIONS)}") from None


@dataclass(frozen=True)
class BathSpectrum:
    """Parameters of the spectral density.

    Parameters
    ----------
    k : float
        Spectral exponent, ``k > 0``.
    gamma : float
        Dissipation rate, ``gamma >= 0``.
    cutoff : float
        Cutoff frequency, ``cutoff > 0``.
    """

    k: float
    gamma: float
    cutoff: float

    def __post_init__(self):
        for name in ("k", "gamma", "cutoff"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.k <= 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")
        if self.cutoff <= 0:
            raise DomainError(f"cutoff must be positive, got {self.cutoff}")

    @property
    def kind(self) -> str:
        """Preset name for the exponent, or ``"general"``."""
        for name, k in PRESET_EXPONENTS.items():
            if self.k == k:
                return name
        return "general"

    def with_gamma(self, gamma: float) -> "BathSpectrum":
        return BathSpectrum(self.k, gamma, self.cutoff)

    def to_dict(self) -> dict:
        return {"k": self.k, "gamma": self.gamma, "cutoff": self.cutoff,
                "kind": self.kind}


@dataclass(frozen=True)
class KernelSample:
    """One sample of the sine kernel."""

    t: float
    value: float


def preset(kind: str, gamma: float, cutoff: float) -> BathSpectrum:
    """Build a spectrum from a preset name (``subohmic``, ``ohmic``, ``superohmic``)."""
    try:
        k = PRESET_EXPONENTS[kind]
    except KeyError:
        raise DomainError(f"unknown spectrum preset {kind!r}") from None
    return BathSpectrum(k, gamma, cutoff)


def spectral_density(spec: BathSpectrum, omega):
    """Evaluate sigma(omega) for omega >= 0.

    Written as ``gamma * cutoff * u**k * exp(-u)`` with ``u = omega/cutoff``
    so that ``k < 1`` stays finite at the origin.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise DomainError("spectral_density requires omega >= 0")
    u = w / spec.cutoff
    value = spec.gamma * spec.cutoff * u ** spec.k * np.exp(-u)
    return float(value) if value.ndim == 0 else value


def total_weight(spec: BathSpectrum, omega_max: float = np.inf) -> float:
    """Integral of sigma over [0, omega_max], via the regularised gamma function."""
    scale = spec.gamma * spec.cutoff ** 2 * math.gamma(spec.k + 1)
    if np.isinf(omega_max):
        return scale
    return scale * float(special.gammainc(spec.k + 1, omega_max / spec.cutoff))


# ---------------------------------------------------------------------------
# sine kernel
# ---------------------------------------------------------------------------

def _sine_kernel_closed(k: float, cutoff: float, t: np.ndarray) -> np.ndarray:
    """Elementary closed forms for the presets (gamma = 1, t >= 0)."""
    a = cutoff * t
    if k == 1.0:
        return 2.0 * cutoff ** 2 * a / (1.0 + a * a) ** 2
    if k == 2.0:
        return 2.0 * cutoff ** 2 * a * (3.0 - a * a) / (1.0 + a * a) ** 3
    if k == 0.5:
        return (cutoff ** 2 * 0.5 * math.sqrt(math.pi)
                * np.sin(1.5 * np.arctan(a)) / (1.0 + a * a) ** 0.75)
    raise DomainError(f"no elementary closed form for k={k}")


def _sine_kernel_analytic(k: float, cutoff: float, t: np.ndarray) -> np.ndarray:
    """Gamma-function form valid for every k > 0 (gamma = 1, t >= 0)."""
    z = 1.0 - 1j * cutoff * t
    return cutoff ** 2 * math.gamma(k + 1) * np.imag(z ** (-(k + 1)))


def _sine_kernel_quadrature(k: float, cutoff: float, t: float, tol: float,
                            limit: int) -> float:
    """Quadrature of ``int sigma(W) sin(W t) dW`` (gamma = 1, t > 0).

    For ``cutoff t <= 2`` QUADPACK's QAWF integrates the Fourier integral
    cycle by cycle and accelerates the partial sums with the epsilon
    algorithm.  For larger ``cutoff t`` the answer is many orders below the
    size of a single cycle and the cancellation defeats any summation, so
    the frequency contour is rotated onto the positive imaginary axis,
    where the integrand ``Re[sigma(i y)] e^{-y t}`` decays without oscillating.
    """
    if cutoff * t <= 2.0:
        def integrand(w):
            u = w / cutoff
            return cutoff * u ** k * math.exp(-u)

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            rough, _ = integrate.quad(integrand, 0.0, np.inf, weight="sin", wvar=t,
                                      limlst=limit)
            value, err = integrate.quad(integrand, 0.0, np.inf, weight="sin", wvar=t,
                                        epsabs=0.1 * tol * abs(rough), limlst=limit)
    else:
        # y = u / t;  sigma(i y) = cutoff (i y / cutoff)^k e^{-i y / cutoff}
        a = 1.0 / (cutoff * t)
        phase = 0.5 * math.pi * k

        def integrand(u):
            return (a * u) ** k * math.cos(phase - a * u) * math.exp(-u)

        value, err = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0,
                                    epsrel=0.1 * tol, limit=limit)
        value, err = value * cutoff / t, err * cutoff / t
    floor = 1e-15 * cutoff ** 2  # absolute floor near zero crossings
    if not np.isfinite(value) or (err > tol * abs(value) and err > floor):
        raise ConvergenceError(
            f"sine-kernel quadrature at t={t}: error estimate {err:.3e} "
            f"exceeds tolerance {tol:.1e}", estimate=value, error=err, tol=tol)
    return value


def kernel_C(spec: BathSpectrum, t, *, method: str = "auto",
             normalization: str = "exact", tol: float = 1e-8,
             limit: int = 200):
    """Sine kernel ``C(t) = int_0^inf sigma(W) sin(W t) dW``.

    Parameters
    ----------
    spec : BathSpectrum
    t : float or array_like
        Times; the kernel is odd in ``t``.
    method : {"auto", "closed", "analytic", "quadrature"}
        ``closed`` uses elementary formulas (preset exponents only),
        ``analytic`` the gamma-function expression valid for any ``k``,
        ``quadrature`` a Fourier quadrature of sigma.  ``auto`` picks
        ``closed`` for presets and ``analytic`` otherwise.
    normalization : {"exact", "printed"}
        ``printed`` divides the exact integral by the cutoff, an
        alternative normalisation kept for comparison runs.
    tol : float
        Relative tolerance of the quadrature path.

    Returns
    -------
    float or ndarray
    """
    if normalization not in KERNEL_NORMALIZATIONS:
        raise DomainError(f"unknown kernel normalization {normalization!r}")
    tt = np.asarray(t, dtype=float)
    sign = np.sign(tt)
    mag = np.abs(tt)
    if method == "auto":
        method = "closed" if spec.kind != "general" else "analytic"
    if method == "closed":
        shape = _sine_kernel_closed(spec.k, spec.cutoff, mag)
    elif method == "analytic":
        shape = _sine_kernel_analytic(spec.k, spec.cutoff, mag)
    elif method == "quadrature":
        flat = mag.ravel()
        shape = np.array([
            0.0 if x == 0 else _sine_kernel_quadrature(spec.k, spec.cutoff, x, tol, limit)
            for x in flat]).reshape(mag.shape)
    else:
        raise DomainError(f"unknown kernel method {method!r}")
    if normalization == "printed":
        shape = shape / spec.cutoff
    value = spec.gamma * (sign * shape)
    return float(value) if value.ndim == 0 else value


def kernel_C_function(spec: BathSpectrum, *, normalization: str = "exact",
                      method: str = "auto") -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised callable ``t -> C(t)`` bound to ``spec``."""
    if method == "quadrature":
        raise DomainError("bind a closed or analytic method for grid evaluation")

    def C(t):
        return np.asarray(kernel_C(spec, t, method=method,
                                   normalization=normalization), dtype=float)
    return C


# ---------------------------------------------------------------------------
# friction kernel in the time domain
# ---------------------------------------------------------------------------

def memory_kernel(spec: BathSpectrum, t, convention: str = "two-over-pi"):
    """Friction kernel ``Sigma(t) = c int sigma(W)/W cos(W t) dW``.

    Closed form ``c gamma cutoff Gamma(k) Re[(1 - i cutoff t)**(-k)]``.
    For the Ohmic case this is ``c gamma cutoff / (1 + cutoff**2 t**2)``.
    """
    c = convention_factor(convention)
    tt = np.abs(np.asarray(t, dtype=float))
    shape = spec.cutoff * math.gamma(spec.k) * np.real((1.0 - 1j * spec.cutoff * tt) ** (-spec.k))
    value = np.asarray(c * spec.gamma * shape)
    return float(value) if value.ndim == 0 else value


def memory_kernel_integral(spec: BathSpectrum, t, convention: str = "two-over-pi"):
    """Running integral ``int_0^t Sigma(u) du`` (odd in t).

    Uses ``expm1`` on the log of ``1 - i cutoff t`` so that the small-t
    behaviour keeps full relative precision.  ``k = 1`` reduces to
    ``c gamma arctan(cutoff t)``.
    """
    c = convention_factor(convention)
    tt = np.asarray(t, dtype=float)
    sign = np.sign(tt)
    mag = np.abs(tt)
    k = spec.k
    if k == 1.0:
        shape = np.arctan(spec.cutoff * mag)
    else:
        log_z = np.log(1.0 - 1j * spec.cutoff * mag)
        shape = math.gamma(k) * np.real(
            np.expm1((1.0 - k) * log_z) / ((1.0 - k) * -1j))
    value = c * spec.gamma * (sign * shape)
    return float(value) if value.ndim == 0 else value


# ---------------------------------------------------------------------------
# friction kernel in the Laplace domain
# ---------------------------------------------------------------------------

def _laplace_shape_quad(k: float, cutoff: float, s: float, tol: float) -> float:
    """``int_0^inf u**(k-1) e**(-u) s/(cutoff**2 u**2 + s**2) du * cutoff``.

    Split at the Lorentzian scale ``u0 = s/cutoff``; for ``k < 1`` the
    substitution ``u = v**(1/k)`` removes the endpoint singularity.
    """
    u0 = s / cutoff

    def lorentz(u):
        return cutoff * s / (cutoff * cutoff * u * u + s * s)

    if k < 1.0:
        def f(v):
            u = v ** (1.0 / k)
            return math.exp(-u) * lorentz(u) / k
        pieces = [(0.0, u0 ** k), (u0 ** k, np.inf)]
    else:
        def f(u):
            return u ** (k - 1.0) * math.exp(-u) * lorentz(u)
        pieces = [(0.0, u0), (u0, np.inf)]
    total = 0.0
    err_total = 0.0
    for lo, hi in pieces:
        value, err = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=0.1 * tol,
                                    limit=400)
        total += value
        err_total += err
    if err_total > tol * abs(total):
        raise ConvergenceError(
            f"Laplace kernel quadrature at s={s}: error {err_total:.3e}",
            estimate=total, error=err_total, tol=tol)
    return total


def _laplace_shape_tanh_sinh(k: float, cutoff: float, s: float, tol: float) -> float:
    """Same integral in the original frequency variable by tanh-sinh quadrature."""
    dps = max(20, int(-math.log10(tol)) + 8)
    with mpmath.workdps(dps):
        kk = mpmath.mpf(k)
        wc = mpmath.mpf(cutoff)
        ss = mpmath.mpf(s)

        def f(w):
            return (w / wc) ** (kk - 1) * mpmath.exp(-w / wc) * ss / (w * w + ss * ss)

        value, err = mpmath.quad(f, [0, ss, wc, mpmath.inf], error=True)
        if err > tol * abs(value):
            raise ConvergenceError(
                f"tanh-sinh Laplace kernel at s={s}: error {float(err):.3e}",
                estimate=float(value), error=float(err), tol=tol)
        return float(value)


def _stieltjes(k, z, p):
    """``int_0^inf W**(k-1) e**(-p W) / (W + z) dW`` for z off the negative axis."""
    if float(k).is_integer() and k >= 1:
        # S_1 = e^{pz} E_1(pz); S_{n+1} = Gamma(n)/p^n - z S_n
        value = mpmath.exp(p * z) * mpmath.e1(p * z)
        for n in range(1, int(k)):
            value = mpmath.gamma(n) / p ** n - z * value
        return value
    if k == 0.5:
        upper = mpmath.sqrt(mpmath.pi) * mpmath.erfc(mpmath.sqrt(p * z))
    else:
        upper = mpmath.gammainc(1 - k, p * z)
    return mpmath.gamma(k) * z ** (k - 1) * mpmath.exp(p * z) * upper


def laplace_kernel_complex(spec: BathSpectrum, s, convention: str = "two-over-pi"):
    """Laplace-domain friction kernel for complex ``s`` with ``Re(s) > 0``.

    Uses the partial-fraction split ``s/(W^2+s^2) = Im-part of 1/(W - i s)``
    and the Stieltjes transform of ``W**(k-1) exp(-W/cutoff)``, evaluated in
    mpmath.  Returns an mpmath complex number at the working precision.
    """
    c = convention_factor(convention)
    if spec.gamma == 0:
        return mpmath.mpc(0)
    s = mpmath.mpmathify(s)
    if mpmath.re(s) <= 0:
        raise DomainError("laplace_kernel_complex requires Re(s) > 0")
    k = spec.k
    p = 1 / mpmath.mpf(spec.cutoff)
    diff = _stieltjes(k, -1j * s, p) - _stieltjes(k, 1j * s, p)
    return (mpmath.mpf(c) * mpmath.mpf(spec.gamma)
            * mpmath.mpf(spec.cutoff) ** (1 - mpmath.mpf(k)) * diff / 2j)


def laplace_kernel(spec: BathSpectrum, s: float, *, tol: float = 1e-10,
                   method: str = "quadrature",
                   convention: str = "two-over-pi") -> float:
    """Laplace transform of the friction kernel on the positive real axis.

    Parameters
    ----------
    spec : BathSpectrum
    s : float
        Laplace variable, ``s > 0``.
    tol : float
        Relative tolerance, default 1e-10.
    method : {"quadrature", "tanh-sinh", "analytic"}
        Adaptive QUADPACK integration in the scaled variable, mpmath
        tanh-sinh in the original variable, or the closed Stieltjes form.
    convention : {"two-over-pi", "unit"}

    Returns
    -------
    float
    """
    if not np.isfinite(s) or s <= 0:
        raise DomainError(f"laplace_kernel requires s > 0, got {s}")
    c = convention_factor(convention)
    if spec.gamma == 0:
        return 0.0
    if method == "quadrature":
        shape = _laplace_shape_quad(spec.k, spec.cutoff, float(s), tol)
    elif method == "tanh-sinh":
        shape = _laplace_shape_tanh_sinh(spec.k, spec.cutoff, float(s), tol)
    elif method == "analytic":
        with mpmath.workdps(30):
            unit = BathSpectrum(spec.k, 1.0, spec.cutoff)
            shape = float(mpmath.re(laplace_kernel_complex(unit, s, "unit")))
    else:
        raise DomainError(f"unknown Laplace kernel method {method!r}")
    return c * (spec.gamma * shape)
