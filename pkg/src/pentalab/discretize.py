"""Difference-equation coordinates of a discretized curve and their limits.

The points of a nondegenerate curve sampled at step eps satisfy a
(d+2)-term linear recurrence.  Its coefficients come in two bases: a_tilde
multiplies the points themselves, A multiplies iterated forward differences.
Scaled copies of the A recover the continuous coefficients u_i as the step
shrinks, which is what `limit_diagnostics` measures.
"""

import math

import numpy as np

from . import linalg
from .fitting import fit_poly_coeffs, geometric_ladder, loglog_slope

_DEFINED_FLOOR = 1e-10


class DiscreteCoords:
    """Both coordinate systems of the one-step recurrence at (x, eps)."""

    __slots__ = ("d", "x", "eps", "a_tilde", "A")

    def __init__(self, d, x, eps, a_tilde, A):
        self.d = d
        self.x = x
        self.eps = eps
        self.a_tilde = np.asarray(a_tilde)
        self.A = np.asarray(A)


def tilde_from_A(A):
    """Point-basis coefficients of the recurrence with difference basis A.

    The leading difference coefficient is one, so the i-th point coefficient
    is an alternating binomial sum over A_i..A_{d+1}.
    """
    A = np.asarray(A)
    d = A.size - 1
    dtype = np.result_type(A.dtype, np.float64)
    full = np.append(A.astype(dtype), dtype.type(1))
    out = np.empty(d + 1, dtype=dtype)
    for i in range(d + 1):
        out[i] = sum((-1) ** (k - i + 1) * math.comb(k, i) * full[k]
                     for k in range(i, d + 2))
    return out


def A_coords(obj):
    """Difference-basis coefficients, from DiscreteCoords or point-basis values.

    The relation between the two systems is unitriangular in A, so it
    inverts by back substitution from the top.
    """
    if isinstance(obj, DiscreteCoords):
        return obj.A.copy()
    a_tilde = np.asarray(obj)
    d = a_tilde.size - 1
    dtype = np.result_type(a_tilde.dtype, np.float64)
    full = np.empty(d + 2, dtype=dtype)
    full[d + 1] = 1
    for i in range(d, -1, -1):
        acc = -a_tilde[i]
        for k in range(i + 1, d + 2):
            acc += (-1) ** (k - i + 1) * math.comb(k, i) * full[k]
        full[i] = acc
    return full[: d + 1]


def coords_from_samples(pts, x, eps):
    """Solve the one-step recurrence from d+2 consecutive curve samples.

    The solve happens in the basis of forward differences scaled by
    1/eps^i: that keeps the matrix O(1)-conditioned however small the step,
    and its solution is A_i/eps^{d+1-i} directly, so the tiny A_i are
    recovered without cancellation on top of what the data already carries.
    """
    if eps == 0:
        raise ValueError("eps must be nonzero")
    pts = np.asarray(pts)
    d = pts.shape[0] - 2
    if pts.shape != (d + 2, d + 1):
        raise ValueError("need d+2 samples of a curve in R^{d+1}")
    diffs = [pts[0]]
    tbl = pts
    for _ in range(d + 1):
        tbl = (tbl[1:] - tbl[:-1]) / eps
        diffs.append(tbl[0])
    cols = np.stack(diffs[: d + 1], axis=1)
    scaled = linalg.solve_dense(cols, -diffs[d + 1])
    A = scaled * np.asarray(eps) ** (d + 1 - np.arange(d + 1))
    return DiscreteCoords(d, x, eps, tilde_from_A(A), A)


def discrete_coords(spec, x, eps):
    """Recurrence coordinates of the curve itself at (x, eps)."""
    if eps == 0:
        raise ValueError("eps must be nonzero")
    pts = np.stack([spec.frame_at(x + i * eps)[0]
                    for i in range(spec.d + 2)])
    return coords_from_samples(pts, x, eps)


def tilde_a(spec, x, eps):
    """Point-basis recurrence coefficients a_tilde_0..a_tilde_d."""
    return discrete_coords(spec, x, eps).a_tilde


class LimitTable:
    """Ladder of recurrence coefficients with fitted orders and limits.

    slopes[i] estimates the decay order of A_i; limits[i] extrapolates
    A_i/eps^{p_i} to zero step, where p_i = d+1-i except for the top
    coefficient whose expansion starts one order later (p_d = 2).
    a0_slope tracks the decay of a_tilde_0 - (-1)^d.  ok flags columns whose
    fit window was usable (nonzero and monotone); nothing here is fatal.
    """

    __slots__ = ("d", "x", "eps", "A", "a_tilde", "powers", "slopes",
                 "limits", "ok", "a0_slope", "a0_ok")

    def __init__(self, d, x, eps, A, a_tilde, powers, slopes, limits, ok,
                 a0_slope, a0_ok):
        self.d = d
        self.x = x
        self.eps = eps
        self.A = A
        self.a_tilde = a_tilde
        self.powers = powers
        self.slopes = slopes
        self.limits = limits
        self.ok = ok
        self.a0_slope = a0_slope
        self.a0_ok = a0_ok


def limit_diagnostics(spec, x, ladder=None, fit_window=8, fit_degree=5):
    """Measure the small-step limits of the recurrence coefficients at x."""
    if ladder is None:
        ladder = geometric_ladder()
    eps = np.asarray(sorted(ladder, reverse=True), dtype=np.float64)
    n = eps.size
    if n < 8:
        raise ValueError("need a ladder of at least 8 steps")
    if not 2 <= fit_window <= n:
        raise ValueError("fit window must fit inside the ladder")
    coords = [discrete_coords(spec, x, e) for e in eps]
    A = np.stack([c.A for c in coords])
    a_tilde = np.stack([c.a_tilde for c in coords])
    d = spec.d
    powers = np.array([d + 1 - i if i < d else 2 for i in range(d + 1)])
    slopes = np.full(d + 1, np.nan)
    limits = np.zeros(d + 1)
    ok = np.zeros(d + 1, dtype=bool)
    win = slice(n - fit_window, n)
    for i in range(d + 1):
        mags = np.abs(A[:, i])
        limits[i] = fit_poly_coeffs(eps, A[:, i] / eps ** powers[i], fit_degree)[0]
        if np.max(mags) <= _DEFINED_FLOOR:
            continue
        slopes[i] = loglog_slope(eps[win], A[win, i])
        ok[i] = bool(np.all(np.diff(mags[win]) < 0))
    resid0 = a_tilde[:, 0] - (-1.0) ** d
    a0_defined = np.max(np.abs(resid0)) > _DEFINED_FLOOR
    a0_slope = loglog_slope(eps[win], resid0[win]) if a0_defined else np.nan
    a0_ok = a0_defined and bool(np.all(np.diff(np.abs(resid0[win])) < 0))
    return LimitTable(d, x, eps, A, a_tilde, powers, slopes, limits, ok,
                      a0_slope, a0_ok)
