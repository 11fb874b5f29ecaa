"""Transfer matrices of the discretized system and their continuous limits.

The sampled curve satisfies a one-step recurrence, which in matrix form is a
shift companion L with the point-basis coefficients in its last row.  The
Pascal-signed change of basis D carries point samples to scaled forward
differences; conjugating L by D and peeling one power of the step exposes the
companion U of the differential equation.  Transfer matrices P carry the
frame of the curve to the frame of its image under the map, and the discrete
Lax relation between L before and after the map degenerates, at rate step
cubed, to the zero-curvature equation dU/dt = [V, U] + dV/dx.
"""

import math

import numpy as np

from .chimap import chi_map_point
from .curves import gamma_jet
from .discretize import coords_from_samples, tilde_a
from .expansion import EpsLadder, extract_alphas
from .fitting import fit_poly_coeffs, loglog_slope
from .jets import eval_jet, jet_solver
from .linalg import solve_dense


def _maxabs(m):
    return float(np.max(np.abs(m)))


def u_matrix(spec, x):
    """Companion of the curve's differential equation at x.

    Identity block above, last row (-u_0, ..., -u_{d-1}, 0): the frame
    Γ, Γ', ..., Γ^(d) satisfies Φ' = U Φ.
    """
    d = spec.d
    m = np.zeros((d + 1, d + 1), dtype=spec.dtype)
    for i in range(d):
        m[i, i + 1] = 1
    for i in range(d):
        m[d, i] = -eval_jet(spec.u[i], x, 0, dtype=spec.dtype).value
    return m


def v_matrix_jets(spec, x, c, order=2):
    """Entry jets of the matrix V with V Φ = c (Q_2 Γ derivative stack).

    Q_2 Γ is Γ'' plus 2 u_{d-1} Γ/(d+1); each of its first d derivatives is
    resolved against the frame, one jet solve per row.  `order` is the jet
    depth of the returned entries (>= 1 keeps dV/dx available).
    """
    d = spec.d
    depth = order + d + 2
    g = gamma_jet(spec, x, depth).component_jets()
    u_top = eval_jet(spec.u[d - 1], x, depth, dtype=spec.dtype)
    scale = 2.0 / (d + 1)
    q2g = [gj.derivative().derivative() + gj * u_top * scale for gj in g]
    chains = [[gj] for gj in g]
    for _ in range(d):
        for chain in chains:
            chain.append(chain[-1].derivative())
    solve = jet_solver([[chains[m][j] for j in range(d + 1)]
                        for m in range(d + 1)])
    rows = []
    rhs = q2g
    for _ in range(d + 1):
        rows.append(solve([e * c for e in rhs]))
        rhs = [e.derivative() for e in rhs]
    return rows


def v_matrix(spec, x, c):
    """Value matrix of v_matrix_jets at x."""
    rows = v_matrix_jets(spec, x, c, order=0)
    return np.array([[e.value for e in r] for r in rows])


def _shift_companion(a_tilde, z=1.0):
    """Zero first column, Λ(z) block, recurrence coefficients in last row."""
    a_tilde = np.asarray(a_tilde)
    d = a_tilde.size - 1
    m = np.zeros((d + 1, d + 1), dtype=np.result_type(a_tilde.dtype, type(z)))
    for i in range(d):
        odd_d = d % 2 == 1
        m[i, i + 1] = z if odd_d == (i % 2 == 0) else 1.0
    m[d] = a_tilde
    return m


def l_tilde(spec, x, eps, z=1.0):
    """Shift companion of the sampled curve, spectral parameter in Λ."""
    return _shift_companion(tilde_a(spec, x, eps), z)


def d_eps(d, eps):
    """Point samples to scaled differences: (-1)^{k-i} C(k,i) / eps^k."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    dtype = np.result_type(np.asarray(eps).dtype, np.float64)
    m = np.zeros((d + 1, d + 1), dtype=dtype)
    for k in range(d + 1):
        for i in range(k + 1):
            m[k, i] = (-1) ** (k - i) * math.comb(k, i) / eps ** k
    return m


def d_eps_inv(d, eps):
    """Pascal inverse of d_eps: entries C(k,i) eps^i."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    dtype = np.result_type(np.asarray(eps).dtype, np.float64)
    m = np.zeros((d + 1, d + 1), dtype=dtype)
    for k in range(d + 1):
        for i in range(k + 1):
            m[k, i] = math.comb(k, i) * eps ** i
    return m


def frame_drift_matrix(spec, x, c):
    """Third-order drift of the conjugated transfer matrices.

    The scaled difference frames are themselves ε-dependent at first order,
    so the conjugated transfer matrix is I + ε²V + ε³Σ + O(ε⁴) with
    Σ = T0 V - V T' + c (d/2) e_d (coefficients of (Q_2Γ)^{(d+1)} in the
    frame), where T0 and T' hold the half-integer drift of the difference
    quotients.  Both transfer matrices carry the same Σ, so it cancels in
    the discrete Lax combination; only the shift difference dV/dx survives.
    """
    d = spec.d
    depth = d + 4
    g = gamma_jet(spec, x, depth).component_jets()
    u_top = eval_jet(spec.u[d - 1], x, depth, dtype=spec.dtype)
    q2g = [gj.derivative().derivative() + gj * u_top * (2.0 / (d + 1))
           for gj in g]
    for _ in range(d + 1):
        q2g = [q.derivative() for q in q2g]
    e_coeff = solve_dense(spec.frame_at(x).T, np.array([q.value for q in q2g]))
    v = v_matrix(spec, x, c)
    t0 = np.zeros((d + 1, d + 1))
    tp = np.zeros((d + 1, d + 1))
    for k in range(d):
        t0[k, k + 1] = k / 2.0
        tp[k, k + 1] = k / 2.0
    for i in range(d):
        tp[d, i] = -(d / 2.0) * eval_jet(spec.u[i], x, 0,
                                         dtype=spec.dtype).value
    last = np.zeros(d + 1)
    last[d] = 1.0
    return t0 @ v - v @ tp + c * (d / 2.0) * np.outer(last, e_coeff)


def p_tilde(spec, chi, x, eps, shift_index=0):
    """Transfer matrix from the curve frame to the mapped-curve frame.

    Rows of both frames sample at x + shift_index*eps + j*eps; the result P
    satisfies P (curve rows) = (mapped rows).
    """
    if shift_index not in (0, 1):
        raise ValueError("shift_index must be 0 or 1")
    d = spec.d
    base = x + shift_index * eps
    korder = 2 * d + 2
    w = np.stack([spec.frame_at(base + j * eps)[0] for j in range(d + 1)])
    wt = np.stack([chi_map_point(spec, chi, base + j * eps, eps, korder)[0]
                   .value() for j in range(d + 1)])
    return solve_dense(w.T, wt.T).T


def _entry_fit(eps, stack, degree):
    n1, n2 = stack.shape[1:]
    out = np.zeros((degree + 1, n1, n2))
    for i in range(n1):
        for j in range(n2):
            out[:, i, j] = fit_poly_coeffs(eps, stack[:, i, j], degree)
    return out


class LaxReport:
    """Ladder diagnostics of the discrete Lax relation and its limit."""

    __slots__ = ("d", "x", "c", "eps", "U", "V", "V_prime", "target",
                 "dudt_w", "conj_err", "conj_slope", "conj_limit_dev",
                 "identity_resid", "identity_max", "quot_lhs_limit",
                 "quot_rhs_limit", "quot_lhs_dev", "quot_rhs_dev",
                 "w_target_dev", "p0_eps1", "p0_v_dev", "p1_v_dev",
                 "shift_vprime_dev", "drift_dev", "lhs_dev_per_eps",
                 "rhs_dev_per_eps")

    def to_dict(self):
        return {
            "d": self.d,
            "x": self.x,
            "c": self.c,
            "conj_slope": self.conj_slope,
            "conj_limit_dev": self.conj_limit_dev,
            "identity_max": self.identity_max,
            "quot_lhs_dev": self.quot_lhs_dev,
            "quot_rhs_dev": self.quot_rhs_dev,
            "w_target_dev": self.w_target_dev,
            "p0_eps1": self.p0_eps1,
            "p0_v_dev": self.p0_v_dev,
            "p1_v_dev": self.p1_v_dev,
            "shift_vprime_dev": self.shift_vprime_dev,
            "drift_dev": self.drift_dev,
        }

    def csv_rows(self):
        """Per-rung (eps, lhs deviation, rhs deviation, identity residual)."""
        rows = []
        for k in range(self.eps.size):
            rows.append((float(self.eps[k]), float(self.lhs_dev_per_eps[k]),
                         float(self.rhs_dev_per_eps[k]),
                         float(self.identity_resid[k])))
        return rows


def lax_limit_diagnostics(spec, chi, x, ladder=None, kmax=2):
    """Run the full transfer-matrix ladder at z = 1 and fit every limit.

    Needs a configuration with no first-order drift; the image curve windows
    are computed once per rung and shared between the transfer matrices and
    the mapped-curve companion, which is what makes the discrete relation an
    identity to solver precision.  The fitted expansions of the conjugated
    transfer matrices are checked against V at second order and against the
    frame drift plus dV/dx at third order.
    """
    if ladder is None:
        ladder = EpsLadder()
    report = extract_alphas(spec, chi, x, ladder, kmax)
    if abs(report.alpha[1, 1]) > 1e-3:
        raise ValueError("configuration is not centralized at first order")
    d = spec.d
    c22 = float(report.alpha[2, 2])
    U = np.asarray(u_matrix(spec, x), dtype=np.float64)
    vj = v_matrix_jets(spec, x, c22, order=2)
    V = np.array([[e.value for e in r] for r in vj])
    V_prime = np.array([[e.derivative().value for e in r] for r in vj])
    target = V @ U - U @ V + V_prime
    dudt_w = np.zeros_like(U)
    dudt_w[d, :d] = -np.asarray(report.w, dtype=np.float64)

    eps = ladder.values(spec.dtype)
    n = eps.size
    eye = np.eye(d + 1)
    korder = 2 * d + 2
    conj_err = np.empty(n)
    ident = np.empty(n)
    conj_stack = np.empty((n, d + 1, d + 1))
    qlhs = np.empty((n, d + 1, d + 1))
    qrhs = np.empty((n, d + 1, d + 1))
    p0_stack = np.empty((n, d + 1, d + 1))
    p1_stack = np.empty((n, d + 1, d + 1))
    for r, e in enumerate(eps):
        dm = d_eps(d, e)
        dmi = d_eps_inv(d, e)
        lt0 = l_tilde(spec, x, e)
        conj_stack[r] = (dm @ lt0 @ dmi - eye) / e
        conj_err[r] = _maxabs(conj_stack[r] - U)
        window = np.stack([chi_map_point(spec, chi, x + k * e, e, korder)[0]
                           .value() for k in range(d + 2)])
        w0 = np.stack([spec.frame_at(x + j * e)[0] for j in range(d + 1)])
        w1 = np.stack([spec.frame_at(x + (1 + j) * e)[0]
                       for j in range(d + 1)])
        p0 = solve_dense(w0.T, window[:d + 1].T).T
        p1 = solve_dense(w1.T, window[1:].T).T
        lt1 = _shift_companion(coords_from_samples(window, x, e).a_tilde)
        conjugated = p1 @ lt0 @ solve_dense(p0, eye)
        ident[r] = _maxabs(lt1 - conjugated)
        qlhs[r] = dm @ (lt1 - lt0) @ dmi / e ** 3
        qrhs[r] = dm @ (conjugated - lt0) @ dmi / e ** 3
        p0_stack[r] = dm @ p0 @ dmi - eye
        p1_stack[r] = dm @ p1 @ dmi - eye

    tail = slice(max(0, n - 8), n)
    out = LaxReport()
    out.d, out.x, out.c = d, float(x), c22
    out.eps = np.asarray(eps, dtype=np.float64)
    out.U, out.V, out.V_prime = U, V, V_prime
    out.target, out.dudt_w = target, dudt_w
    out.conj_err = conj_err
    out.conj_slope = loglog_slope(eps[tail], conj_err[tail])
    out.conj_limit_dev = _maxabs(_entry_fit(eps, conj_stack, 3)[0] - U)
    out.identity_resid = ident
    out.identity_max = float(np.max(ident))
    out.quot_lhs_limit = _entry_fit(eps, qlhs, 3)[0]
    out.quot_rhs_limit = _entry_fit(eps, qrhs, 3)[0]
    out.quot_lhs_dev = _maxabs(out.quot_lhs_limit - target)
    out.quot_rhs_dev = _maxabs(out.quot_rhs_limit - target)
    out.w_target_dev = _maxabs(dudt_w - target)
    p0_fit = _entry_fit(eps, p0_stack, 6)
    p1_fit = _entry_fit(eps, p1_stack, 6)
    out.p0_eps1 = _maxabs(p0_fit[1])
    out.p0_v_dev = _maxabs(p0_fit[2] - V)
    out.p1_v_dev = _maxabs(p1_fit[2] - V)
    out.shift_vprime_dev = _maxabs((p1_fit[3] - p0_fit[3]) - V_prime)
    out.drift_dev = _maxabs(p0_fit[3] - frame_drift_matrix(spec, x, c22))
    out.lhs_dev_per_eps = np.array([_maxabs(qlhs[k] - target)
                                    for k in range(n)])
    out.rhs_dev_per_eps = np.array([_maxabs(qrhs[k] - target)
                                    for k in range(n)])
    return out
