"""Plane configurations whose leading evolution is the third-order flow.

For curves in three dimensions the map is built from three plane groups of
three nodes each.  The first two expansion orders vanish exactly when the
three node products agree, and the surviving third-order term is a constant
multiple of the cubic root power (L^{3/4})_+ exactly when one further
polynomial constraint on the nodes holds.  This module checks both
conditions numerically on probe curves, carries the two example families,
the lower bound on how many constraints higher flows require, and a small
derivative-free search for new configurations.
"""

import json
import math

import numpy as np
from scipy import optimize

from .chimap import DegenerateIntersection
from .configs import ChiConfig, sym_table
from .expansion import EpsLadder, extract_alphas
from .jets import eval_jet
from .kdvops import l_operator, q_m

_G12_TOL = 1e-4
_G3_TOL = 1e-3


def dof_lower_bound(m):
    """Minimum number of node constraints for the order-m flow to lead.

    Killing each lower order i < m costs at least (i^2 - 3i + 4)/2
    constraints; the sum telescopes to (m^3 - 6m^2 + 17m - 12)/6, which is
    an exact integer for every m >= 1.
    """
    m = int(m)
    if m < 1:
        raise ValueError("need m >= 1")
    value, rem = divmod(m ** 3 - 6 * m ** 2 + 17 * m - 12, 6)
    if rem:
        raise AssertionError("lower-bound polynomial must be integral")
    return value


def mari_beffa_family(a, b, c):
    """Three-parameter family {{-c,a,b},{c,-a,b},{c,-1,ab}} and its residual.

    Every member has equal node products -abc; the residual is the distance
    from the one-parameter slice c - 1 + a(b - 1) = -5(b - c)/4 on which the
    family is known to produce the third-order flow.  Parameter choices that
    collide nodes inside a group raise ValueError.
    """
    a, b, c = float(a), float(b), float(c)
    chi = ChiConfig(3, [[-c, a, b], [c, -a, b], [c, -1.0, a * b]])
    residual = abs(c - 1.0 + a * (b - 1.0) + 5.0 * (b - c) / 4.0)
    return chi, residual


_R_COEFFS = (2480.0, 33006.0, 72121.0, -198036.0, 89280.0)


def r_poly_roots():
    """Real roots of the quartic gate polynomial, ascending.

    Companion-matrix eigenvalues polished by a few Newton steps; all four
    roots of this particular quartic are real.
    """
    poly = np.array(_R_COEFFS)
    deriv = np.polyder(poly)
    roots = [z.real for z in np.roots(poly) if abs(z.imag) <= 1e-8]
    out = []
    for r in roots:
        for _ in range(4):
            r = r - np.polyval(poly, r) / np.polyval(deriv, r)
        out.append(float(r))
    return np.sort(np.array(out))


class Realization34Report:
    """Outcome of the third-order flow check on one configuration."""

    __slots__ = ("chi", "sigma_top", "sigma_equal", "g1_norm", "g2_norm",
                 "g3_match", "c_fit", "skipped")

    def passes(self, g12_tol=_G12_TOL, g3_tol=_G3_TOL):
        return bool(self.sigma_equal and self.g1_norm <= g12_tol
                    and self.g2_norm <= g12_tol and self.g3_match <= g3_tol)

    def to_dict(self):
        return {
            "chi": self.chi.to_dict(),
            "sigma_top": [float(v) for v in self.sigma_top],
            "sigma_equal": self.sigma_equal,
            "g1_norm": self.g1_norm,
            "g2_norm": self.g2_norm,
            "g3_match": self.g3_match,
            "c_fit": self.c_fit,
            "skipped": list(self.skipped),
            "passes": self.passes(),
        }


def _node_ladder(chi):
    radius = max(1.0, max(abs(p) for g in chi.groups for p in g))
    return EpsLadder(0.2 / radius, 0.85, 14)


def _q3_row(spec, x):
    u_jets = [eval_jet(f, x, 24, dtype=spec.dtype) for f in spec.u]
    q3 = q_m(l_operator(u_jets), 3)
    return np.array([q3.coefficient(k).value for k in range(4)])


def check_34(chi, probe_curves, x, ladder=None):
    """Test whether the map on chi produces the third-order flow.

    Requires three plane groups in dimension 3 and at least three probe
    curves.  The node-product condition is exact arithmetic; the residuals
    are fitted from the expansion of each probe curve at x to order 3 and
    the third-order row is compared against c * (L^{3/4})_+ with a single
    constant shared across probes.  A probe whose intersection degenerates
    is skipped and recorded.
    """
    if chi.d != 3 or any(chi.q(i) != 2 for i in range(chi.r)):
        raise ValueError("need three plane groups in dimension 3")
    if len(probe_curves) < 3:
        raise ValueError("need at least three probe curves")
    if ladder is None:
        ladder = _node_ladder(chi)

    top = sym_table(chi).top()
    scale = max(np.max(np.abs(top)), 1e-30)
    sigma_equal = bool(np.max(np.abs(top - top[0])) <= 1e-9 * scale
                       and abs(float(top[0])) > 0.0)

    g1 = 0.0
    g2 = 0.0
    rows = []
    targets = []
    skipped = []
    for idx, spec in enumerate(probe_curves):
        try:
            rep = extract_alphas(spec, chi, x, ladder, kmax=3)
        except DegenerateIntersection:
            skipped.append(idx)
            continue
        g1 = max(g1, float(np.max(np.abs(rep.alpha[1]))))
        g2 = max(g2, float(np.max(np.abs(rep.alpha[2]))))
        rows.append(rep.alpha[3])
        targets.append(_q3_row(spec, x))
    if not rows:
        raise RuntimeError("every probe curve hit a degenerate intersection")

    rows = np.array(rows, dtype=np.float64)
    targets = np.array(targets, dtype=np.float64)
    c_fit = float(np.sum(rows * targets) / np.sum(targets * targets))

    out = Realization34Report()
    out.chi = chi
    out.sigma_top = np.asarray(top, dtype=np.float64)
    out.sigma_equal = sigma_equal
    out.g1_norm = g1
    out.g2_norm = g2
    out.g3_match = float(np.max(np.abs(rows - c_fit * targets)))
    out.c_fit = c_fit
    out.skipped = tuple(skipped)
    return out


def _project_node_products(params):
    """Rescale each group so all three node products match the first."""
    nodes = np.asarray(params, dtype=np.float64).reshape(3, 3)
    products = np.prod(nodes, axis=1)
    if np.min(np.abs(products)) < 1e-12:
        return nodes.ravel()
    factors = np.cbrt(products[0] / products)
    return (nodes * factors[:, None]).ravel()


class Search34Result:
    """Best configuration found by the descent, with its full report."""

    __slots__ = ("chi", "report", "objective", "converged", "improved",
                 "evaluations")

    def to_dict(self):
        return {
            "chi": self.chi.to_dict(),
            "report": self.report.to_dict(),
            "objective": self.objective,
            "converged": self.converged,
            "improved": self.improved,
            "evaluations": self.evaluations,
        }


def search_34(seed_chi, probe_curves, x, max_iters=200, tol=_G3_TOL,
              checkpoint=None):
    """Derivative-free descent toward a third-order flow configuration.

    The nine nodes are the free parameters; the node-product equalities are
    enforced by projection before every evaluation, so the objective is the
    squared residual sum g1^2 + g2^2 + g3^2 measured on the first probe
    curve.  Best-effort: a seed already inside tolerance is returned as is,
    and a run that fails to improve on the seed returns the seed flagged as
    not converged.  When a checkpoint path is given the best point found is
    saved there after every improvement and reused as the starting point by
    a later call.
    """
    if seed_chi.d != 3 or any(seed_chi.q(i) != 2 for i in range(seed_chi.r)):
        raise ValueError("need three plane groups in dimension 3")
    if len(probe_curves) < 3:
        raise ValueError("need at least three probe curves")
    probe = probe_curves[0]

    params0 = np.array([p for g in seed_chi.groups for p in g])
    if checkpoint is not None:
        try:
            with open(checkpoint) as fh:
                saved = json.load(fh)
            if len(saved.get("params", [])) == params0.size:
                params0 = np.array(saved["params"], dtype=np.float64)
        except (OSError, ValueError):
            pass

    evals = [0]
    best = {"f": np.inf, "params": params0}

    def objective(params):
        evals[0] += 1
        projected = _project_node_products(params)
        try:
            chi = ChiConfig(3, projected.reshape(3, 3))
            rep = extract_alphas(probe, chi, x, _node_ladder(chi), kmax=3)
        except (ValueError, DegenerateIntersection):
            return 1e6
        target = _q3_row(probe, x)
        c = float(np.dot(rep.alpha[3], target) / np.dot(target, target))
        g1 = float(np.max(np.abs(rep.alpha[1])))
        g2 = float(np.max(np.abs(rep.alpha[2])))
        g3 = float(np.max(np.abs(rep.alpha[3] - c * target)))
        f = g1 * g1 + g2 * g2 + g3 * g3
        if f < best["f"]:
            best["f"] = f
            best["params"] = np.array(params)
            if checkpoint is not None:
                blob = {"params": list(map(float, best["params"])),
                        "objective": f, "evaluations": evals[0]}
                with open(checkpoint, "w") as fh:
                    json.dump(blob, fh)
        return f

    f0 = objective(params0)
    if f0 > tol * tol:
        def stop_when_inside(_xk):
            if best["f"] <= tol * tol:
                raise StopIteration

        try:
            optimize.minimize(objective, params0, method="Nelder-Mead",
                              callback=stop_when_inside,
                              options={"maxiter": max_iters, "xatol": 1e-10,
                                       "fatol": 1e-14})
        except StopIteration:
            pass

    improved = bool(best["f"] < f0)
    if improved:
        final = _project_node_products(best["params"])
        chi = ChiConfig(3, final.reshape(3, 3))
    else:
        chi = seed_chi
    out = Search34Result()
    out.chi = chi
    out.report = check_34(chi, probe_curves, x)
    out.objective = float(best["f"])
    out.converged = bool(best["f"] <= tol * tol)
    out.improved = improved
    out.evaluations = evals[0]
    return out
