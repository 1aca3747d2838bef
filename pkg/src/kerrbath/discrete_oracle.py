"""Explicit-bath verification path.

The continuous spectrum is replaced by ``N`` oscillators on a midpoint
frequency grid.  The response function then obeys the memory equation with
the finite kernel ``sum_j kappa_j^2 / W_j cos(W_j t)``, which is integrated
as an ordinary linear ODE by introducing one cosine/sine pair of auxiliary
variables per mode.  All coefficients are then assembled from explicit
per-mode sums; no sine kernel and no frequency quadrature are involved.

A small-``N`` path integrates the raw coupled equations of motion to obtain
the fundamental matrix of the full linear system, which must be symplectic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import spectra
from .coefficients import CoefficientSet
from .errors import ConvergenceError, DomainError, InstabilityError
from .nonlinearity import EtaSeries, eta_closed
from .quadrature import cumulative_integral, oscillatory_convolution
from .spectra import BathSpectrum

__all__ = [
    "DiscreteBath",
    "DiscreteGreens",
    "FundamentalSolution",
    "discretize_bath",
    "default_omega_max",
    "oracle_step",
    "oracle_greens",
    "oracle_coefficients",
    "oracle_F",
    "oracle_eta",
    "discrete_memory_kernel",
    "truncation_report",
    "fundamental_solution",
]

SQRT2 = math.sqrt(2.0)
MODE_CHUNK = 256


@dataclass(frozen=True, eq=False)
class DiscreteBath:
    """Finite set of bath modes.

    Attributes
    ----------
    N : int
    omegas : ndarray
        Mode frequencies ``(j - 1/2) dW``.
    kappas : ndarray
        Couplings, ``kappa_j^2 = c sigma(W_j) dW``.
    omega_max : float
    convention : str
    spec : BathSpectrum
    """

    N: int
    omegas: np.ndarray
    kappas: np.ndarray
    omega_max: float
    convention: str
    spec: BathSpectrum

    @property
    def d_omega(self) -> float:
        return self.omega_max / self.N

    def to_dict(self) -> dict:
        return {"N": self.N, "omega_max": self.omega_max,
                "convention": self.convention, "spec": self.spec.to_dict()}


@dataclass(frozen=True, eq=False)
class DiscreteGreens:
    """Response function of the explicit bath on a uniform grid."""

    h: float
    g_values: np.ndarray
    g_cumint: np.ndarray
    bath: DiscreteBath

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.g_values)) * self.h

    @property
    def alpha(self) -> np.ndarray:
        return 1.0 - self.g_cumint

    @property
    def beta(self) -> np.ndarray:
        return self.g_values


@dataclass(frozen=True, eq=False)
class FundamentalSolution:
    """State-transition matrices of the raw linear system.

    State ordering is ``(X_m, P_m, X_1..X_N, P_1..P_N)``.
    """

    times: np.ndarray
    matrices: np.ndarray
    generator: np.ndarray

    def determinants(self) -> np.ndarray:
        return np.array([np.linalg.det(m) for m in self.matrices])

    def symplectic_defects(self) -> np.ndarray:
        """``max |Phi^T J Phi - J|`` for each time."""
        n = self.generator.shape[0] // 2
        J = _symplectic_form(n)
        return np.array([np.max(np.abs(m.T @ J @ m - J)) for m in self.matrices])


def default_omega_max(spec: BathSpectrum) -> float:
    """Truncation frequency ``max(20, 10 cutoff)`` capped at 20."""
    return min(max(20.0, 10.0 * spec.cutoff), 20.0)


def oracle_step(h: float, omega_max: float) -> float:
    """Largest divisor of ``h`` not exceeding ``0.2 / omega_max``."""
    limit = 0.2 / omega_max
    if h <= limit * (1 + 1e-12):
        return h
    return h / math.ceil(h / limit - 1e-12)


def discretize_bath(spec: BathSpectrum, N: int, omega_max: float,
                    convention: str = "two-over-pi") -> DiscreteBath:
    """Midpoint discretisation of the spectrum on ``(0, omega_max]``.

    Parameters
    ----------
    spec : BathSpectrum
    N : int
        Number of modes, ``N >= 2``.
    omega_max : float
        Truncation frequency.
    convention : {"two-over-pi", "unit"}
        Factor between ``sigma dW`` and ``kappa^2``.
    """
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")
    if not np.isfinite(omega_max) or omega_max <= 0:
        raise DomainError(f"omega_max must be positive, got {omega_max}")
    c = spectra.convention_factor(convention)
    N = int(N)
    d_omega = omega_max / N
    omegas = (np.arange(1, N + 1) - 0.5) * d_omega
    kappas = np.sqrt(c * spectra.spectral_density(spec, omegas) * d_omega)
    return DiscreteBath(N=N, omegas=omegas, kappas=kappas, omega_max=float(omega_max),
                        convention=convention, spec=spec)


def discrete_memory_kernel(bath: DiscreteBath, t) -> np.ndarray:
    """``sum_j kappa_j^2 / W_j cos(W_j t)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    weights = bath.kappas ** 2 / bath.omegas
    return np.cos(np.outer(t, bath.omegas)) @ weights


def oracle_greens(bath: DiscreteBath, t_max: float, h: float, *,
                  rtol: float = 1e-10, atol: float = 1e-12,
                  bound: float = 1e3) -> DiscreteGreens:
    """Response function of the explicit bath.

    The memory integral is carried by auxiliary variables
    ``c_j = int cos(W_j (t-u)) G'(u) du`` and ``s_j`` (sine analogue), giving
    the linear system ``G'' = -G - sum kappa_j^2/W_j c_j``,
    ``c_j' = G' - W_j s_j``, ``s_j' = W_j c_j``, integrated with an
    eighth-order Runge-Kutta method.
    """
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    if not h > 0 or h > 0.2 / bath.omega_max * (1 + 1e-12):
        raise DomainError(
            f"h={h} does not resolve omega_max={bath.omega_max}; need h <= 0.2/omega_max")
    n = int(round(t_max / h))
    grid = np.arange(n + 1) * h
    W = bath.omegas
    kw = bath.kappas ** 2 / W
    N = bath.N

    def rhs(_, y):
        g, gd = y[0], y[1]
        c = y[2:2 + N]
        s = y[2 + N:2 + 2 * N]
        out = np.empty_like(y)
        out[0] = gd
        out[1] = -g - kw @ c
        out[2:2 + N] = gd - W * s
        out[2 + N:2 + 2 * N] = W * c
        out[-1] = g
        return out

    def blow_up(_, y):
        return bound - abs(y[0])
    blow_up.terminal = True

    y0 = np.zeros(2 * N + 3)
    y0[1] = 1.0
    sol = solve_ivp(rhs, (0.0, grid[-1]), y0, method="DOP853", t_eval=grid,
                    rtol=rtol, atol=atol, events=blow_up)
    if sol.status == 1:
        raise InstabilityError(f"|G| exceeded {bound:g} in the explicit-bath solve")
    if not sol.success:
        raise ConvergenceError(f"explicit-bath integration failed: {sol.message}")
    g = sol.y[0].copy()
    cum = sol.y[-1].copy()
    g[0] = cum[0] = 0.0
    return DiscreteGreens(h=h, g_values=g, g_cumint=cum, bath=bath)


def oracle_coefficients(bath: DiscreteBath, table_d: DiscreteGreens, g0: float,
                        keep_modes_at=None) -> dict:
    """All coefficients on the oracle grid.

    Mode coefficients ``alpha_j + i beta_j = int_0^t G(u) exp(i W_j (t-u)) du``
    use exact oscillatory moments of a local polynomial interpolant of
    ``G``.  Modes are processed in fixed-size chunks in a fixed order.

    Returns
    -------
    dict
        ``F_a, F_X, F_P, mode_products`` (the sum of ``F_jX F_jP / 2``),
        the unitary and bath pieces of ``F_a``, and, for each grid index in
        ``keep_modes_at``, the mode arrays ``F_jX, F_jP``.
    """
    h = table_d.h
    alpha, beta = table_d.alpha, table_d.beta
    running_alpha = cumulative_integral(alpha, h)
    unitary = cumulative_integral(beta * running_alpha, h)
    n_t = len(beta)
    keep = [] if keep_modes_at is None else [int(i) for i in np.atleast_1d(keep_modes_at)]
    bath_fa = np.zeros(n_t)
    products = np.zeros(n_t)
    kept_x = np.zeros((len(keep), bath.N))
    kept_p = np.zeros((len(keep), bath.N))
    k2 = bath.kappas ** 2
    for lo in range(0, bath.N, MODE_CHUNK):
        hi = min(lo + MODE_CHUNK, bath.N)
        z = oscillatory_convolution(table_d.g_values, h, bath.omegas[lo:hi])
        big_z = cumulative_integral(z, h)
        a_j, b_j = big_z.real, big_z.imag
        inner = cumulative_integral(z.imag * a_j, h)
        bath_fa += inner @ k2[lo:hi]
        products += (a_j * b_j) @ k2[lo:hi]
        for r, i in enumerate(keep):
            kept_x[r, lo:hi] = g0 * (-SQRT2 * bath.kappas[lo:hi] * a_j[i])
            kept_p[r, lo:hi] = g0 * (-SQRT2 * bath.kappas[lo:hi] * b_j[i])
    g2 = g0 * g0
    out = {
        "times": table_d.times,
        "F_X": g0 * (-SQRT2 * running_alpha),
        "F_P": g0 * (-SQRT2 * table_d.g_cumint),
        "F_a_unitary": g2 * (-2.0 * unitary),
        "F_a_bath": g2 * (-2.0 * bath_fa),
        "mode_products": g2 * products,
        "F_jX": kept_x,
        "F_jP": kept_p,
        "keep": keep,
    }
    out["F_a"] = out["F_a_unitary"] + out["F_a_bath"]
    return out


def oracle_F(bath: DiscreteBath, table_d: DiscreteGreens, g0: float,
             t: float) -> CoefficientSet:
    """Coefficient set including the per-mode arrays at one grid time."""
    i = int(round(t / table_d.h))
    if i < 0 or i >= len(table_d.g_values) or abs(i * table_d.h - t) > 1e-9 * max(1.0, t):
        raise DomainError("t is not on the oracle grid")
    co = oracle_coefficients(bath, table_d, g0, keep_modes_at=[i])
    return CoefficientSet(t=i * table_d.h, F_a=float(co["F_a"][i]),
                          F_X=float(co["F_X"][i]), F_P=float(co["F_P"][i]), g0=g0,
                          F_jX=co["F_jX"][0], F_jP=co["F_jP"][0])


def oracle_eta(bath: DiscreteBath, g0: float, times, *, h: float | None = None,
               rtol: float = 1e-10) -> EtaSeries:
    """Nonlinearity from the explicit-bath coefficient combination.

    Parameters
    ----------
    bath : DiscreteBath
    g0 : float
    times : array_like
        Output times; they must lie on a grid of step ``h``.
    h : float, optional
        Output grid step (default 0.02).  The integration grid refines it to
        ``oracle_step(h, omega_max)``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise DomainError("times must be non-negative")
    h_out = 0.02 if h is None else float(h)
    h_d = oracle_step(h_out, bath.omega_max)
    ratio = int(round(h_out / h_d))
    t_max = float(times.max())
    n_out = int(round(t_max / h_out))
    idx_out = np.rint(times / h_out).astype(int)
    if np.any(np.abs(idx_out * h_out - times) > 1e-9 * max(1.0, t_max)):
        raise DomainError("times are not on the output grid")
    if n_out == 0:
        zeros = np.zeros(len(times))
        return EtaSeries(times=times, eta=zeros, eta_unitary=zeros.copy(),
                         eta_bath=zeros.copy(), eta_closed=eta_closed(g0, times),
                         grid_meta={"h": h_out, "oracle_h": h_d},
                         params={"bath": bath.to_dict(), "g0": g0})
    table_d = oracle_greens(bath, n_out * h_out, h_d, rtol=rtol)
    co = oracle_coefficients(bath, table_d, g0)
    linear = 0.5 * co["F_X"] * co["F_P"]
    eta_u = -(co["F_a_unitary"] + linear)
    eta_b = -(co["F_a_bath"] + co["mode_products"])
    eta = np.abs(co["F_a"] + linear + co["mode_products"])
    pick = idx_out * ratio
    t = pick * h_d
    return EtaSeries(times=t, eta=eta[pick], eta_unitary=eta_u[pick],
                     eta_bath=eta_b[pick], eta_closed=eta_closed(g0, t),
                     grid_meta={"h": h_out, "oracle_h": h_d, "rtol": rtol,
                                "n_steps": int(n_out * ratio)},
                     params={"bath": bath.to_dict(), "g0": g0,
                             "convention": bath.convention})


def truncation_report(bath: DiscreteBath, times=(0.0, 1.0, 5.0)) -> dict:
    """How much of the continuum the discrete bath captures.

    Reports the fraction of spectral weight below ``omega_max`` and the
    relative deviation of the discrete friction kernel from the continuum
    one at a few times.
    """
    spec = bath.spec
    c = spectra.convention_factor(bath.convention)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    report = {"N": bath.N, "omega_max": bath.omega_max, "convention": bath.convention,
              "d_omega": bath.d_omega}
    if spec.gamma == 0:
        report.update(weight_fraction=1.0, coupling_sum=0.0, coupling_sum_continuum=0.0,
                      kernel_times=times.tolist(), kernel_rel_deviation=[0.0] * len(times))
        return report
    report["weight_fraction"] = (spectra.total_weight(spec, bath.omega_max)
                                 / spectra.total_weight(spec))
    report["coupling_sum"] = float(np.sum(bath.kappas ** 2))
    report["coupling_sum_continuum"] = c * spectra.total_weight(spec, bath.omega_max)
    discrete = discrete_memory_kernel(bath, times)
    continuum = np.atleast_1d(spectra.memory_kernel(spec, times, bath.convention))
    scale = abs(spectra.memory_kernel(spec, 0.0, bath.convention))
    report["kernel_times"] = times.tolist()
    report["kernel_rel_deviation"] = (np.abs(discrete - continuum) / scale).tolist()
    return report


# ---------------------------------------------------------------------------
# raw equations of motion, small N
# ---------------------------------------------------------------------------

def _symplectic_form(n: int) -> np.ndarray:
    """``J`` for the ordering (X_m, P_m, X_1..X_N, P_1..P_N)."""
    J = np.zeros((2 * n, 2 * n))
    J[0, 1], J[1, 0] = 1.0, -1.0
    m = n - 1
    J[2:2 + m, 2 + m:] = np.eye(m)
    J[2 + m:, 2:2 + m] = -np.eye(m)
    return J


def fundamental_solution(bath: DiscreteBath, times, max_modes: int = 50,
                         counter_term: str = "none") -> FundamentalSolution:
    """Transition matrices of the raw coupled equations.

    ``X_m' = P_m``, ``P_m' = -X_m + sum_j kappa_j X_j``,
    ``X_j' = W_j P_j``, ``P_j' = -W_j X_j + kappa_j X_m``.

    With ``counter_term="system"`` the mechanical restoring force gains
    ``-sum_j kappa_j^2 / W_j X_m``, a quadratic term in ``X_m`` that cancels
    the static frequency shift; the mechanical response to ``P_m(0) = 1`` then
    obeys the memory equation solved by :func:`oracle_greens`.
    """
    if bath.N > max_modes:
        raise DomainError(f"the raw path is limited to N <= {max_modes}")
    if counter_term not in ("none", "system"):
        raise DomainError(f"unknown counter_term {counter_term!r}")
    N = bath.N
    A = np.zeros((2 * N + 2, 2 * N + 2))
    A[0, 1] = 1.0
    A[1, 0] = -1.0
    if counter_term == "system":
        A[1, 0] -= float(np.sum(bath.kappas ** 2 / bath.omegas))
    A[1, 2:2 + N] = bath.kappas
    A[2:2 + N, 2 + N:] = np.diag(bath.omegas)
    A[2 + N:, 2:2 + N] = -np.diag(bath.omegas)
    A[2 + N:, 0] = bath.kappas
    times = np.atleast_1d(np.asarray(times, dtype=float))
    mats = np.stack([expm(A * t) for t in times])
    return FundamentalSolution(times=times, matrices=mats, generator=A)
