"""Quadrature building blocks on uniform time grids.

* Local Lagrange rules for cumulative integrals, optionally with an
  oscillatory weight (Filon-type exact moments).
* Product-integration weights of a kernel against hat functions, used by
  the Volterra solver.
* Toeplitz/Hankel weight tables for the double convolution
  ``W(t_p, t_q) = int int G(t_p - a) G(t_q - b) K(a -/+ b) da db``
  with piecewise-linear ``G``, and its O(N^3) matrix evaluation.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "interval_weights",
    "cumulative_integral",
    "cumulative_matrix",
    "oscillatory_convolution",
    "hat_weights",
    "pair_weights",
    "double_convolution",
    "triangle_integral",
]


@lru_cache(maxsize=32)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    return x, w


def _lagrange_basis(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Values ``l_j(x_i)`` of the Lagrange basis on ``nodes``; shape (len(x), len(nodes))."""
    n = len(nodes)
    out = np.ones((len(x), n))
    for j in range(n):
        for m in range(n):
            if m != j:
                out[:, j] *= (x - nodes[m]) / (nodes[j] - nodes[m])
    return out


def interval_weights(npts: int, theta=0.0) -> np.ndarray:
    """Weights of the local interpolatory rule on unit spacing.

    Row ``q`` integrates over ``[q, q+1]`` with the polynomial through nodes
    ``0 .. npts-1``; the integrand carries the factor
    ``exp(1j * theta * (q + 1 - x))``.  For ``theta`` an array the result has a
    trailing frequency axis.

    Returns
    -------
    ndarray, shape (npts - 1, npts) or (npts - 1, npts, len(theta))
    """
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    n_gauss = 16 + int(math.ceil(2.0 * np.max(np.abs(theta_arr))))
    xg, wg = _gauss(n_gauss)
    nodes = np.arange(npts, dtype=float)
    rows = []
    for q in range(npts - 1):
        x = q + 0.5 * (xg + 1.0)
        basis = _lagrange_basis(nodes, x) * (0.5 * wg)[:, None]
        if np.all(theta_arr == 0):
            rows.append(np.repeat(basis.sum(0)[:, None], len(theta_arr), axis=1))
        else:
            phase = np.exp(1j * np.outer(q + 1.0 - x, theta_arr))
            rows.append(basis.T @ phase)
    weights = np.stack(rows)
    if np.ndim(theta) == 0:
        weights = weights[..., 0]
        if theta == 0:
            weights = weights.real
    return weights


def _interval_increments(y: np.ndarray, weights: np.ndarray, npts: int) -> np.ndarray:
    """``I_n = sum_j weights[q_n, j, ...] * y[start_n + j]`` for every interval n."""
    n_int = y.shape[0] - 1
    centre = (npts - 2) // 2
    extra = (1,) * (y.ndim - 1)
    dtype = np.result_type(y, weights)
    inc = np.zeros((n_int,) + y.shape[1:], dtype=dtype)
    # interior intervals share one stencil position
    lo, hi = centre, n_int - (npts - 2 - centre)
    if hi > lo:
        for j in range(npts):
            inc[lo:hi] += weights[centre, j] * y[j:j + hi - lo]
    for n in list(range(0, min(lo, n_int))) + list(range(max(hi, lo), n_int)):
        start = min(max(n - centre, 0), y.shape[0] - npts)
        q = n - start
        w = weights[q]
        inc[n] = np.tensordot(w, y[start:start + npts], axes=(0, 0)) if w.ndim == 1 \
            else np.einsum("j...,j...->...", w, y[start:start + npts])
    return inc


def cumulative_integral(y, h: float, order: int = 8) -> np.ndarray:
    """Running integral ``int_0^{t_n} y`` on a uniform grid (along axis 0).

    Each interval uses the interpolating polynomial through ``order``
    neighbouring samples, centred where possible, so the rule is exact for
    polynomials of degree ``order - 1``.
    """
    y = np.asarray(y)
    out = np.zeros(y.shape, dtype=np.result_type(y, float))
    if y.shape[0] < 2:
        return out
    npts = max(2, min(order, y.shape[0]))
    w = interval_weights(npts)
    inc = _interval_increments(y, w, npts)
    out[1:] = h * np.cumsum(inc, axis=0)
    return out


def cumulative_matrix(n_points: int, h: float, order: int = 8) -> np.ndarray:
    """Matrix ``Q`` with ``cumulative_integral(y) == Q @ y``."""
    return cumulative_integral(np.eye(n_points), h, order)


def oscillatory_convolution(g, h: float, omega, order: int = 6) -> np.ndarray:
    """``z_n(W) = int_0^{t_n} g(u) exp(i W (t_n - u)) du`` on the grid of ``g``.

    ``g`` is interpolated locally by polynomials of degree ``order - 1``
    and the oscillatory factor is integrated exactly, so the result stays
    accurate for ``W h`` of order one.  Returns shape ``(len(g), len(omega))``
    (or ``(len(g),)`` for scalar ``omega``).
    """
    g = np.asarray(g, dtype=float)
    scalar = np.ndim(omega) == 0
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n = len(g)
    z = np.zeros((n, len(omega)), dtype=complex)
    if n < 2:
        return z[:, 0] if scalar else z
    npts = max(2, min(order, n))
    theta = omega * h
    w = interval_weights(npts, theta)  # (npts-1, npts, M)
    inc = _interval_increments(g[:, None] * np.ones((1, len(omega))), w, npts) * h
    step = np.exp(1j * theta)
    for m in range(1, n):
        z[m] = step * z[m - 1] + inc[m - 1]
    return z[:, 0] if scalar else z


# ---------------------------------------------------------------------------
# product-integration weights
# ---------------------------------------------------------------------------

def _panel_nodes(lo: float, hi: float, panels: int, n_gauss: int):
    xg, wg = _gauss(n_gauss)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    w = (half[:, None] * wg[None, :]).ravel()
    return x, w


def hat_weights(f: Callable[[np.ndarray], np.ndarray], h: float, n: int,
                panels: int = 1, n_gauss: int = 16) -> np.ndarray:
    """``W_m = int f(v) hat(v - m h) dv`` for ``m = 0..n``.

    ``hat`` is the unit tent of half-width ``h``; ``W_0`` only integrates
    the right half ``[0, h]``.  Gauss-Legendre with ``panels`` sub-panels
    per half-tent.
    """
    x, w = _panel_nodes(0.0, h, panels, n_gauss)
    m = np.arange(n + 1)[:, None]
    rising = (f((m - 1) * h + x[None, :]) * (x / h)[None, :] * w).sum(1)
    falling = (f(m * h + x[None, :]) * (1.0 - x / h)[None, :] * w).sum(1)
    weights = rising + falling
    weights[0] = falling[0]
    return weights


def pair_weights(kernel: Callable[[np.ndarray], np.ndarray], h: float,
                 m_values: np.ndarray, hankel: bool = False, panels: int = 1,
                 n_gauss: int = 16, chunk: int = 256) -> dict[str, np.ndarray]:
    """Double-hat moments of a kernel.

    For tent halves ``L`` (support ``[-h, 0]``, weight ``1 + x/h``) and ``R``
    (support ``[0, h]``, weight ``1 - x/h``) computes

        P_ab[m] = int_a int_b w_a(x) w_b(y) K(m h - x +/- y) dx dy

    with ``+`` for the Toeplitz (difference) case and ``-`` for the Hankel
    (sum) case, then combines them into full/half tent tables.

    Returns
    -------
    dict with keys ``ff``, ``lf``, ``fl``, ``ll`` (arrays over ``m_values``)
    """
    xl, wl = _panel_nodes(-h, 0.0, panels, n_gauss)
    xr, wr = _panel_nodes(0.0, h, panels, n_gauss)
    pieces = {"L": (xl, wl * (1.0 + xl / h)), "R": (xr, wr * (1.0 - xr / h))}
    sign = -1.0 if hankel else 1.0
    shifts = np.asarray(m_values, dtype=float) * h
    table = {}
    for a, (xa, wa) in pieces.items():
        for b, (xb, wb) in pieces.items():
            offset = (-xa[:, None] + sign * xb[None, :]).ravel()
            weight = (wa[:, None] * wb[None, :]).ravel()
            vals = np.empty(len(shifts))
            for i in range(0, len(shifts), chunk):
                block = shifts[i:i + chunk, None] + offset[None, :]
                vals[i:i + chunk] = kernel(block) @ weight
            table[a + b] = vals
    return {
        "ff": table["LL"] + table["LR"] + table["RL"] + table["RR"],
        "lf": table["LL"] + table["LR"],
        "fl": table["LL"] + table["RL"],
        "ll": table["LL"],
    }


def _lower_toeplitz(g: np.ndarray) -> np.ndarray:
    n = len(g)
    idx = np.arange(n)[:, None] - np.arange(n)[None, :]
    mat = np.where(idx >= 0, g[np.clip(idx, 0, None)], 0.0)
    return mat


def double_convolution(g: np.ndarray, h: float,
                       kernel: Callable[[np.ndarray], np.ndarray],
                       hankel: bool = False, panels: int = 1,
                       n_gauss: int = 16) -> np.ndarray:
    """Matrix ``W[p, q] = int_0^{t_p} int_0^{t_q} G(t_p - a) G(t_q - b) K(a - b) da db``.

    ``G`` is the piecewise-linear interpolant of the samples ``g`` (with
    ``g[0] == 0``).  With ``hankel=True`` the kernel argument is ``a + b``.
    The kernel enters only through exact double-tent moments, so a kernel
    varying faster than the grid is still integrated accurately.  Cost is
    two dense matrix products, O(N^3).
    """
    g = np.asarray(g, dtype=float)
    n = len(g)
    r = np.arange(n)
    if hankel:
        m_values = np.arange(0, 2 * n - 1)
        wt = pair_weights(kernel, h, m_values, hankel=True, panels=panels,
                          n_gauss=n_gauss)
        index = r[:, None] + r[None, :]
        lookup = lambda key: wt[key][index]
    else:
        m_values = np.arange(-(n - 1), n)
        wt = pair_weights(kernel, h, m_values, panels=panels, n_gauss=n_gauss)
        index = r[:, None] - r[None, :] + (n - 1)
        lookup = lambda key: wt[key][index]
    moments = lookup("ff")
    moments[0, :] = lookup("lf")[0, :]
    moments[:, 0] = lookup("fl")[:, 0]
    moments[0, 0] = wt["ll"][index[0, 0]]
    gmat = _lower_toeplitz(g)
    return gmat @ moments @ gmat.T


def triangle_integral(w: np.ndarray, h: float) -> np.ndarray:
    """``T_n = int_0^{t_n} dt' int_0^{t'} dt'' W(t', t'')`` by nested trapezoids."""
    n = w.shape[0]
    lower = np.tril(w)
    rows = h * (lower.sum(1) - 0.5 * w[:, 0] - 0.5 * np.diag(w))
    rows[0] = 0.0
    out = np.zeros(n)
    out[1:] = np.cumsum(0.5 * h * (rows[1:] + rows[:-1]))
    return out
