"""Nondegenerate curves with unit-Wronskian lifts, given by coefficient data.

A curve never stores an explicit parametrization.  It is defined by d
periodic coefficient functions u_0..u_{d-1} plus one normalized frame at a
base point: the lift solves the linear ODE

    g^(d+1) + u_{d-1} g^(d-1) + ... + u_0 g = 0

componentwise, and because the equation has no g^(d) term the frame
determinant (Wronskian) is conserved, so det = 1 propagates from the initial
frame.  Jets of any order then come from the ODE recursion for free, which is
the ground truth every downstream check leans on.

Frame transport uses Taylor stepping on a fixed anchor grid (order 14, step
1/16), caching frames at visited anchors, rather than a generic ODE
integrator: the recursion hands us the Taylor method directly and keeps the
Wronskian at machine precision.
"""

import math
import json

import numpy as np

from . import linalg
from .jets import AnalyticFn, DegenerateSystem, Jet, det_jet, eval_jet, solve_linear_jets, trig_poly

_STEP = 1.0 / 16.0
_STEP_ORDER = 14


class IntegrationFailure(Exception):
    """Frame transport produced non-finite or exploding values."""


class DegenerateLift(Exception):
    """No normalized lift exists (vanishing or wrong-sign Wronskian)."""


def _falling(n, k):
    """Falling factorial n (n-1) ... (n-k+1) as exact small-int float."""
    out = np.ones_like(np.asarray(n, dtype=np.float64))
    for j in range(k):
        out = out * (np.asarray(n, dtype=np.float64) - j)
    return out


class FrameJet:
    """Jets of all d+1 lift components at one base point.

    coeffs has shape (K+1, d+1): row k holds the k-th Taylor coefficients
    (derivative/k! convention) of the components.  When the jets come from
    frame transport the exact frame rows are kept alongside, so derivative
    rows 0..d reproduce the transported frame bit for bit.
    """

    __slots__ = ("coeffs", "x", "_frame")

    def __init__(self, coeffs, x=None, frame=None):
        self.coeffs = np.asarray(coeffs)
        self.x = x
        self._frame = frame

    @property
    def d(self):
        return self.coeffs.shape[1] - 1

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    def value(self):
        """The point itself: lift components at the base point."""
        if self._frame is not None:
            return self._frame[0].copy()
        return self.coeffs[0].copy()

    def component(self, i):
        return Jet(self.coeffs[:, i])

    def component_jets(self):
        return [Jet(self.coeffs[:, i]) for i in range(self.coeffs.shape[1])]

    def deriv_rows(self, kmax):
        """Matrix with row k = k-th derivative of the lift, k = 0..kmax."""
        if kmax > self.order:
            raise ValueError("requested derivative exceeds jet order")
        k = np.arange(kmax + 1)
        fact = np.array([math.factorial(int(v)) for v in k], dtype=self.coeffs.dtype)
        rows = self.coeffs[: kmax + 1] * fact[:, None]
        if self._frame is not None:
            upto = min(kmax, self._frame.shape[0] - 1)
            rows[: upto + 1] = self._frame[: upto + 1]
        return rows


class CurveSpec:
    """d, coefficient functions u_0..u_{d-1}, base point x0, initial frame F0."""

    def __init__(self, d, u, x0, F0, dtype=np.float64):
        if len(u) != d:
            raise ValueError(f"need exactly {d} coefficient functions, got {len(u)}")
        self.d = int(d)
        self.u = tuple(u)
        self.x0 = float(x0)
        self.dtype = np.dtype(dtype)
        f0 = np.array(F0, dtype=self.dtype)
        if f0.shape != (d + 1, d + 1):
            raise ValueError(f"initial frame must be {(d+1, d+1)}, got {f0.shape}")
        self.F0 = f0
        self._frames = {0: f0}

    # -- serialization --------------------------------------------------

    def to_dict(self):
        return {
            "d": self.d,
            "u": [f.to_dict() for f in self.u],
            "x0": self.x0,
            "F0": [[float(v) for v in row] for row in np.asarray(self.F0, dtype=np.float64)],
        }

    @staticmethod
    def from_dict(obj, dtype=np.float64):
        d = int(obj["d"])
        u = [AnalyticFn.from_dict(node) for node in obj["u"]]
        f0 = np.array(obj["F0"], dtype=np.float64)
        det = float(np.linalg.det(f0))
        if abs(det - 1.0) > 1e-12:
            if det <= 0 and (d + 1) % 2 == 0:
                raise ValueError("initial frame determinant must be positive when d is odd")
            if det == 0:
                raise ValueError("initial frame is singular")
            scale = math.copysign(abs(det) ** (1.0 / (d + 1)), det)
            f0 = f0 / scale
        return CurveSpec(d, u, float(obj["x0"]), f0, dtype=dtype)

    @staticmethod
    def load(path, dtype=np.float64):
        with open(path) as fh:
            return CurveSpec.from_dict(json.load(fh), dtype=dtype)

    # -- frame transport -------------------------------------------------

    def _u_jets(self, x, order):
        return [eval_jet(f, x, order, dtype=self.dtype).c for f in self.u]

    def _advance(self, frame, t, h):
        g = _ode_taylor_coeffs(self._u_jets(t, _STEP_ORDER), frame, self.d, _STEP_ORDER)
        return _frame_from_coeffs(g, h, self.d)

    def frame_at(self, x):
        """Rows g(x), g'(x), ..., g^(d)(x) of the normalized lift."""
        j_target = int(math.floor((x - self.x0) / _STEP + 0.5))
        known = [j for j in self._frames if abs(j - j_target) <= abs(x - self.x0) / _STEP + 1]
        j = min(known, key=lambda v: abs(v - j_target))
        frame = self._frames[j]
        while j != j_target:
            step = 1 if j_target > j else -1
            frame = self._advance(frame, self.x0 + j * _STEP, step * _STEP)
            if not np.all(np.isfinite(frame)) or np.max(np.abs(frame)) > 1e12:
                raise IntegrationFailure(f"frame blew up near x = {self.x0 + j * _STEP:g}")
            j += step
            self._frames[j] = frame
        h = x - (self.x0 + j_target * _STEP)
        if h == 0.0:
            return frame.copy()
        out = self._advance(frame, self.x0 + j_target * _STEP, h)
        if not np.all(np.isfinite(out)):
            raise IntegrationFailure(f"frame blew up near x = {x:g}")
        return out


def _ode_taylor_coeffs(u_coeffs, frame, d, order):
    """Taylor coefficients of the lift at the frame's base point.

    Rows 0..d come from the frame; higher rows from the ODE recursion
    g^(d+1) = -sum_i u_i g^(i), expanded coefficientwise: the m-th Taylor
    coefficient of u_i g^(i) is sum_k u_i[k] * g[m-k+i] * (m-k+i)!/(m-k)!.
    """
    dtype = frame.dtype
    g = np.zeros((order + 1, d + 1), dtype=dtype)
    for k in range(d + 1):
        g[k] = frame[k] / math.factorial(k)
    for m in range(order - d):
        acc = np.zeros(d + 1, dtype=dtype)
        js = np.arange(m, -1, -1)  # j = m-k as k runs 0..m
        for i in range(d):
            w = _falling(js + i, i).astype(dtype)
            acc += (u_coeffs[i][: m + 1] * w) @ g[js + i]
        g[m + d + 1] = -acc / _falling(m + d + 1, d + 1)
    return g


def _frame_from_coeffs(g, h, d):
    """Evaluate rows g^(k)(t+h), k = 0..d, from Taylor coefficients at t."""
    order = g.shape[0] - 1
    out = np.empty((d + 1, d + 1), dtype=g.dtype)
    for k in range(d + 1):
        acc = np.zeros(d + 1, dtype=g.dtype)
        for m in range(order, k - 1, -1):
            acc = acc * h + g[m] * _falling(m, k)
        out[k] = acc
    return out


def gamma_jet(spec: CurveSpec, x, order) -> FrameJet:
    """Jets of the normalized lift at x, to the given order (>= d)."""
    if order < spec.d:
        raise ValueError(f"jet order must be at least d = {spec.d}")
    frame = spec.frame_at(x)
    g = _ode_taylor_coeffs(spec._u_jets(x, order), frame, spec.d, order)
    return FrameJet(g, x=x, frame=frame)


def wronskian(spec: CurveSpec, x) -> float:
    """det(g, g', ..., g^(d)) at x; identically 1 up to transport roundoff."""
    return float(linalg.det_dense(spec.frame_at(x)))


def normalized_lift(raw, d, ref=None):
    """Rescale an arbitrary lift to unit Wronskian and read off its u's.

    raw: FrameJet or list of d+1 component Jets, order >= 2d+1.
    Returns (FrameJet, u_jets) with u_jets the d coefficient jets of the
    ODE satisfied by the rescaled lift.

    Sign handling: when d+1 is odd the real odd root of the Wronskian fixes
    the lift uniquely whatever the sign of W.  When d+1 is even the Wronskian
    must be positive (raises DegenerateLift otherwise) and both signs of the
    root normalize, so the leftover overall sign is chosen to make the dot
    product with ref positive when ref is given.
    """
    comps = raw.component_jets() if isinstance(raw, FrameJet) else list(raw)
    if len(comps) != d + 1:
        raise ValueError(f"need {d + 1} components, got {len(comps)}")
    korder = min(c.order for c in comps)
    if korder < 2 * d + 1:
        raise ValueError(f"component jets must have order >= {2 * d + 1}")

    rows = [comps]
    for _ in range(d):
        rows.append([c.derivative() for c in rows[-1]])
    w = det_jet(rows)
    w0 = float(w.value)
    if w0 == 0.0 or not np.isfinite(w0):
        raise DegenerateLift("vanishing Wronskian")
    sign_free = (d + 1) % 2 == 0
    if not sign_free:  # d+1 odd: the odd root handles either sign of W
        s = 1.0 if w0 > 0 else -1.0
        f = ((w * s) ** (-1.0 / (d + 1))) * s
    else:
        if w0 < 0:
            raise DegenerateLift("negative Wronskian admits no normalized lift")
        f = w ** (-1.0 / (d + 1))

    scaled = [f * c for c in comps]
    if sign_free and ref is not None \
            and float(np.dot(ref, [c.value for c in scaled])) < 0:
        scaled = [-c for c in scaled]

    srows = [scaled]
    for _ in range(d + 1):
        srows.append([c.derivative() for c in srows[-1]])
    a_rows = [[srows[k][i] for k in range(d + 1)] for i in range(d + 1)]
    rhs = [-srows[d + 1][i] for i in range(d + 1)]
    try:
        coeffs = solve_linear_jets(a_rows, rhs)
    except DegenerateSystem as exc:
        raise DegenerateLift(f"frame not invertible: {exc}") from exc
    u_jets = coeffs[:d]

    out = np.stack([c.c for c in scaled], axis=1)
    return FrameJet(out), u_jets


def random_curve_spec(d, seed=None, rng=None, amplitude=0.5, x0=0.0, dtype=np.float64):
    """Random test curve: trig-polynomial u_i with damped harmonics, identity frame."""
    if rng is None:
        rng = np.random.default_rng(seed)
    u = []
    for _ in range(d):
        damp = (1.0, 0.5, 0.25)
        a0 = rng.uniform(-amplitude, amplitude) * damp[0]
        harmonics = [
            (rng.uniform(-amplitude, amplitude) * damp[k],
             rng.uniform(-amplitude, amplitude) * damp[k])
            for k in (1, 2)
        ]
        u.append(trig_poly(a0, harmonics))
    return CurveSpec(d, u, x0, np.eye(d + 1), dtype=dtype)


def zero_curve_spec(d, x0=0.0, dtype=np.float64):
    """The curve with u identically zero: polynomial lift components."""
    u = [AnalyticFn.const(0.0) for _ in range(d)]
    return CurveSpec(d, u, x0, np.eye(d + 1), dtype=dtype)
