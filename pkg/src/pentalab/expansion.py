"""Extraction of the small-step expansion of the map from ladder data.

The image curve evaluated at the working point is resolved against the frame
Γ, Γ', ..., Γ^(d); each frame coordinate, sampled along a geometric ladder of
step sizes, is fitted by a polynomial in ε.  The fitted coefficient of ε^k on
the j-th frame vector is the operator coefficient α_{k,j}.  The first two
corrections are heavily structured (a bare first derivative, then a Schwarzian
like second-order operator), and the checks in this module pin that structure
against the fitted numbers.
"""

import numpy as np

from . import fitting
from .chimap import chi_map_point
from .jets import eval_jet
from .kdvops import kdv_rhs, l_operator
from .linalg import lu_solver

_KMAX_DOUBLE = 4
_KMAX_EXTENDED = 6
_COND_LIMIT = 1e8


class EpsLadder:
    """Geometric ladder of step sizes used for the coefficient fits."""

    __slots__ = ("eps0", "ratio", "count")

    def __init__(self, eps0=0.2, ratio=0.85, count=14):
        if eps0 <= 0:
            raise ValueError("eps0 must be positive")
        if not 0 < ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if count < 8:
            raise ValueError("need at least 8 rungs")
        self.eps0 = float(eps0)
        self.ratio = float(ratio)
        self.count = int(count)

    def values(self, dtype=np.float64):
        base = np.asarray(self.eps0, dtype=dtype)
        return base * np.asarray(self.ratio, dtype=dtype) ** np.arange(self.count)


class ExpansionReport:
    """Fitted expansion coefficients at one working point.

    alpha[k][j] multiplies the j-th frame vector at order ε^k; w holds the
    fitted ε² coefficients of the transformed curve invariants.
    """

    __slots__ = ("x", "d", "kmax", "alpha", "uncertainty", "fit_residual",
                 "w", "flagged")

    def __init__(self, x, d, kmax, alpha, uncertainty, fit_residual, w,
                 flagged):
        self.x = float(x)
        self.d = int(d)
        self.kmax = int(kmax)
        self.alpha = np.asarray(alpha)
        self.uncertainty = np.asarray(uncertainty)
        self.fit_residual = float(fit_residual)
        self.w = np.asarray(w)
        self.flagged = bool(flagged)

    def to_dict(self):
        return {
            "x": self.x,
            "d": self.d,
            "kmax": self.kmax,
            "alpha": [[float(v) for v in row] for row in self.alpha],
            "uncertainty": [[float(v) for v in row]
                            for row in self.uncertainty],
            "fit_residual": self.fit_residual,
            "w": [float(v) for v in self.w],
            "flagged": self.flagged,
        }

    def csv_rows(self):
        """Flat (k, j, alpha, uncertainty) rows."""
        rows = []
        for k in range(self.kmax + 1):
            for j in range(self.d + 1):
                rows.append((k, j, float(self.alpha[k, j]),
                             float(self.uncertainty[k, j])))
        return rows


def extract_alphas(spec, chi, x, ladder=None, kmax=2):
    """Fit the frame coordinates of the image curve on a step ladder."""
    if ladder is None:
        ladder = EpsLadder()
    limit = _KMAX_EXTENDED if spec.dtype == np.longdouble else _KMAX_DOUBLE
    if not 0 <= kmax <= limit:
        raise ValueError(f"kmax must lie in [0, {limit}] at this precision")
    d = spec.d
    eps = ladder.values(spec.dtype)
    frame = spec.frame_at(x)
    solve = lu_solver(frame.T.copy())
    korder = 2 * d + 2
    c_samples = np.empty((eps.size, d + 1), dtype=spec.dtype)
    u_samples = np.empty((eps.size, d), dtype=spec.dtype)
    for idx, e in enumerate(eps):
        lifted, u_jets = chi_map_point(spec, chi, x, e, korder)
        c_samples[idx] = solve(lifted.value())
        u_samples[idx] = [uj.value for uj in u_jets]

    degree = kmax + 2
    alpha = np.zeros((kmax + 1, d + 1))
    uncertainty = np.zeros((kmax + 1, d + 1))
    fit_residual = 0.0
    flagged = False
    for j in range(d + 1):
        coeffs, sigma, resid, cond = fitting.fit_poly_full(
            eps, c_samples[:, j], degree)
        if cond > _COND_LIMIT:
            flagged = True
            sigma = sigma * (cond / _COND_LIMIT)
        alpha[:, j] = coeffs[:kmax + 1]
        uncertainty[:, j] = sigma[:kmax + 1]
        fit_residual = max(fit_residual, resid)
    w = np.zeros(d)
    for i in range(d):
        coeffs, _, resid, cond = fitting.fit_poly_full(
            eps, u_samples[:, i], degree)
        flagged = flagged or cond > _COND_LIMIT
        w[i] = coeffs[2]
        fit_residual = max(fit_residual, resid)
    return ExpansionReport(x, d, kmax, alpha, uncertainty, fit_residual, w,
                           flagged)


def verify_G2_structure(report, spec, x):
    """Residual of the fitted first and second corrections against theory.

    The first correction must be a pure first derivative; the second must be
    a22*(D^2 + 2 u_{d-1}/(d+1)) - a11^2 u_{d-1}/(d+1) with the fitted a11 and
    a22 plugged in.  Returns the worst coefficient mismatch.
    """
    if report.kmax < 2:
        raise ValueError("report must carry at least the second order")
    d = report.d
    u_top = float(spec.u[d - 1](x))
    a11 = report.alpha[1, 1]
    a22 = report.alpha[2, 2]
    predicted = np.zeros(d + 1)
    predicted[2] = a22
    predicted[0] = (2.0 * a22 - a11 ** 2) * u_top / (d + 1)
    resid = float(np.max(np.abs(report.alpha[2] - predicted)))
    off_first = np.abs(np.delete(report.alpha[1], 1))
    return max(resid, float(np.max(off_first)))


def alpha_constancy_check(spec, chi, xs, ladder=None, kmax=2):
    """Spread of the diagonal coefficients across working points."""
    if len(set(float(x) for x in xs)) < 3:
        raise ValueError("need at least 3 distinct working points")
    diag = np.array([
        [extract_alphas(spec, chi, x, ladder, kmax).alpha[i, i]
         for i in range(min(2, kmax) + 1)]
        for x in xs
    ])
    return float(np.max(diag.max(axis=0) - diag.min(axis=0)))


def kdv_rhs_check(spec, chi, x, ladder=None, kmax=2):
    """Fitted ε² drift of the invariants against the hierarchy commutator.

    Valid only when the first-order term is absent; then the invariants move
    at the ε² timescale with velocity a22 times the commutator coefficients.
    """
    report = extract_alphas(spec, chi, x, ladder, kmax)
    if abs(report.alpha[1, 1]) > 1e-3:
        raise ValueError("configuration is not centralized at first order")
    d = spec.d
    u_jets = [eval_jet(spec.u[i], x, 24) for i in range(d)]
    flow = kdv_rhs(l_operator(u_jets), 2)
    predicted = report.alpha[2, 2] * np.array([c.value for c in flow])
    return float(np.max(np.abs(report.w - predicted)))
