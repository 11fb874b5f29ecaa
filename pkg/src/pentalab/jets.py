"""Truncated Taylor-jet arithmetic, expression trees, and jet linear algebra.

A ``Jet`` holds the first K+1 Taylor coefficients of a scalar function of x
at a base point, in the derivative/k! convention, so multiplication is a
plain truncated convolution.  Everything downstream (curve frames, subspace
intersections, operator coefficients) is built from jets, which is what makes
d/dx exact: derivatives are coefficient shifts, never finite differences.

``AnalyticFn`` is a tiny closed expression language (constants, x, +, -, *,
/, sin, cos, powers) used for curve coefficient functions.  It evaluates to a
jet of any requested order and round-trips through a JSON tree, so curve
files can carry their coefficient functions.

Linear algebra over the jet ring (``solve_linear_jets``, ``det_jet``) pivots
on constant terms only: a system is solved order by order against the LU
factorization of its constant-term matrix.
"""

import math

import numpy as np

from . import linalg


class DegenerateSystem(Exception):
    """Constant-term matrix of a jet linear system is singular."""


class Jet:
    """Truncated Taylor series: coeffs[k] = f^(k)(x0) / k!."""

    __slots__ = ("c",)

    def __init__(self, coeffs, copy=True):
        c = np.array(coeffs, copy=copy)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("jet coefficients must be a nonempty 1-d array")
        if not np.issubdtype(c.dtype, np.floating):
            c = c.astype(np.float64)
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    # -- construction -------------------------------------------------

    @staticmethod
    def const(value, order, dtype=np.float64):
        c = np.zeros(order + 1, dtype=dtype)
        c[0] = value
        return Jet(c, copy=False)

    @staticmethod
    def variable(x, order, dtype=np.float64):
        """Jet of the identity function t -> t at base point x."""
        c = np.zeros(order + 1, dtype=dtype)
        c[0] = x
        if order >= 1:
            c[1] = 1
        return Jet(c, copy=False)

    # -- basic queries ------------------------------------------------

    @property
    def order(self):
        return self.c.size - 1

    @property
    def value(self):
        return self.c[0]

    def deriv(self, k):
        """Value of the k-th derivative at the base point."""
        if k > self.order:
            raise ValueError(f"derivative {k} exceeds jet order {self.order}")
        return self.c[k] * math.factorial(k)

    def derivative(self):
        """Jet of f', one order shorter."""
        if self.order == 0:
            return Jet(np.zeros(1, dtype=self.c.dtype), copy=False)
        k = np.arange(1, self.order + 1)
        return Jet(self.c[1:] * k, copy=False)

    def truncate(self, order):
        if order >= self.order:
            return self
        return Jet(self.c[: order + 1])

    def eval_at(self, h):
        """Evaluate the truncated series at offset h from the base point."""
        acc = self.c.dtype.type(0)
        for ck in self.c[::-1]:
            acc = acc * h + ck
        return acc

    def __repr__(self):
        head = np.array2string(self.c[: min(4, self.c.size)], precision=6)
        return f"Jet(order={self.order}, c={head}{'...' if self.order > 3 else ''})"

    # -- arithmetic ---------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        if np.isscalar(other) or isinstance(other, np.generic):
            dt = np.result_type(self.c.dtype, np.asarray(other).dtype)
            return Jet.const(other, self.order, dtype=dt)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        k = min(self.order, o.order) + 1
        return Jet(self.c[:k] + o.c[:k], copy=False)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, copy=False)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        k = min(self.order, o.order) + 1
        return Jet(self.c[:k] - o.c[:k], copy=False)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order) + 1
            return Jet(np.convolve(self.c[:k], other.c[:k])[:k], copy=False)
        if np.isscalar(other) or isinstance(other, np.generic):
            return Jet(self.c * other, copy=False)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        k = min(self.order, o.order)
        b = o.c
        if b[0] == 0:
            raise ZeroDivisionError("jet division needs a nonzero constant term")
        out = np.zeros(k + 1, dtype=np.result_type(self.c.dtype, b.dtype))
        for m in range(k + 1):
            s = self.c[m] if m <= self.order else 0.0
            if m:
                s = s - b[1 : m + 1] @ out[:m][::-1]
            out[m] = s / b[0]
        return Jet(out, copy=False)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        return o.__truediv__(self)

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)):
            if p >= 0:
                out = Jet.const(1.0, self.order, dtype=self.c.dtype)
                for _ in range(int(p)):
                    out = out * self
                return out
            return (1.0 / self) ** (-int(p))
        a0 = self.c[0]
        if a0 <= 0:
            raise ValueError("fractional jet power needs a positive constant term")
        # generalized binomial series around the constant term
        series = np.zeros(self.order + 1, dtype=self.c.dtype)
        series[0] = a0 ** self.c.dtype.type(p)
        for n in range(1, self.order + 1):
            series[n] = series[n - 1] * (p - n + 1) / (n * a0)
        return _outer_series(self, series)


def _outer_series(jet, series):
    """Compose f(a0 + h) = sum series[n] * h^n with h the nilpotent part."""
    h = np.array(jet.c, copy=True)
    h[0] = 0
    hjet = Jet(h, copy=False)
    acc = Jet.const(series[-1], jet.order, dtype=jet.c.dtype)
    for n in range(len(series) - 2, -1, -1):
        acc = acc * hjet + series[n]
    return acc


def jet_sin(jet):
    a0 = jet.c[0]
    s, c = np.sin(a0), np.cos(a0)
    cycle = (s, c, -s, -c)
    series = np.array(
        [cycle[n % 4] / math.factorial(n) for n in range(jet.order + 1)],
        dtype=jet.c.dtype,
    )
    return _outer_series(jet, series)


def jet_cos(jet):
    a0 = jet.c[0]
    s, c = np.sin(a0), np.cos(a0)
    cycle = (c, -s, -c, s)
    series = np.array(
        [cycle[n % 4] / math.factorial(n) for n in range(jet.order + 1)],
        dtype=jet.c.dtype,
    )
    return _outer_series(jet, series)


# ---------------------------------------------------------------------------
# expression trees


_BINARY = ("add", "sub", "mul", "div")
_UNARY = ("sin", "cos")


class AnalyticFn:
    """Expression tree over constants, x, +, -, *, /, sin, cos, pow."""

    __slots__ = ("op", "args", "value", "periodic")

    def __init__(self, op, args=(), value=None, periodic=False):
        self.op = op
        self.args = tuple(args)
        self.value = value
        self.periodic = periodic

    # constructors

    @staticmethod
    def const(v):
        return AnalyticFn("const", value=float(v), periodic=True)

    @staticmethod
    def x():
        return AnalyticFn("x")

    @staticmethod
    def _wrap(v):
        if isinstance(v, AnalyticFn):
            return v
        return AnalyticFn.const(v)

    def _binary(self, other, op, swap=False):
        other = AnalyticFn._wrap(other)
        a, b = (other, self) if swap else (self, other)
        return AnalyticFn(op, (a, b), periodic=a.periodic and b.periodic)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return self._binary(other, "add", swap=True)

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return self._binary(other, "sub", swap=True)

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return self._binary(other, "mul", swap=True)

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return self._binary(other, "div", swap=True)

    def __neg__(self):
        return AnalyticFn.const(0.0) - self

    def __pow__(self, p):
        return AnalyticFn("pow", (self,), value=float(p), periodic=self.periodic)

    def sin(self):
        return AnalyticFn("sin", (self,), periodic=self.periodic)

    def cos(self):
        return AnalyticFn("cos", (self,), periodic=self.periodic)

    # evaluation

    def jet(self, x, order, dtype=np.float64):
        op = self.op
        if op == "const":
            return Jet.const(self.value, order, dtype=dtype)
        if op == "x":
            return Jet.variable(x, order, dtype=dtype)
        if op in _BINARY:
            a = self.args[0].jet(x, order, dtype)
            b = self.args[1].jet(x, order, dtype)
            if op == "add":
                return a + b
            if op == "sub":
                return a - b
            if op == "mul":
                return a * b
            return a / b
        a = self.args[0].jet(x, order, dtype)
        if op == "sin":
            return jet_sin(a)
        if op == "cos":
            return jet_cos(a)
        if op == "pow":
            return a ** self.value
        raise ValueError(f"unknown op {op!r}")

    def __call__(self, x):
        op = self.op
        if op == "const":
            return self.value
        if op == "x":
            return x
        if op == "add":
            return self.args[0](x) + self.args[1](x)
        if op == "sub":
            return self.args[0](x) - self.args[1](x)
        if op == "mul":
            return self.args[0](x) * self.args[1](x)
        if op == "div":
            return self.args[0](x) / self.args[1](x)
        if op == "sin":
            return math.sin(self.args[0](x))
        if op == "cos":
            return math.cos(self.args[0](x))
        if op == "pow":
            return self.args[0](x) ** self.value
        raise ValueError(f"unknown op {op!r}")

    # serialization

    def to_dict(self):
        op = self.op
        if op == "const":
            return {"op": "const", "value": self.value}
        if op == "x":
            return {"op": "x"}
        if op in _BINARY:
            return {"op": op, "args": [a.to_dict() for a in self.args]}
        if op in _UNARY:
            return {"op": op, "arg": self.args[0].to_dict()}
        if op == "pow":
            return {"op": "pow", "arg": self.args[0].to_dict(), "exponent": self.value}
        raise ValueError(f"unknown op {op!r}")

    @staticmethod
    def from_dict(node):
        op = node["op"]
        if op == "const":
            return AnalyticFn.const(node["value"])
        if op == "x":
            return AnalyticFn.x()
        if op in _BINARY:
            a, b = (AnalyticFn.from_dict(n) for n in node["args"])
            return AnalyticFn(op, (a, b), periodic=a.periodic and b.periodic)
        if op in _UNARY:
            a = AnalyticFn.from_dict(node["arg"])
            return AnalyticFn(op, (a,), periodic=a.periodic)
        if op == "pow":
            a = AnalyticFn.from_dict(node["arg"])
            return AnalyticFn("pow", (a,), value=float(node["exponent"]),
                              periodic=a.periodic)
        raise ValueError(f"unknown op {op!r}")


def trig_poly(a0, harmonics):
    """a0 + sum_k (c_k cos(kx) + s_k sin(kx)); harmonics = [(c_1, s_1), ...].

    Integer harmonics only, so the result is honestly 2*pi-periodic.
    """
    f = AnalyticFn.const(a0)
    x = AnalyticFn.x()
    for k, (ck, sk) in enumerate(harmonics, start=1):
        if ck:
            f = f + AnalyticFn.const(ck) * (AnalyticFn.const(k) * x).cos()
        if sk:
            f = f + AnalyticFn.const(sk) * (AnalyticFn.const(k) * x).sin()
    f.periodic = True
    return f


def eval_jet(f, x, order, dtype=np.float64):
    """Jet of an AnalyticFn at x: coefficient k is f^(k)(x)/k! to roundoff."""
    if order < 0:
        raise ValueError("jet order must be nonnegative")
    return f.jet(x, order, dtype=dtype)


# ---------------------------------------------------------------------------
# linear algebra over the jet ring


def _entry_tensor(rows):
    n = len(rows)
    m = len(rows[0])
    order = min(min(e.order for e in r) for r in rows)
    dtype = np.result_type(*[e.c.dtype for r in rows for e in r])
    t = np.empty((order + 1, n, m), dtype=dtype)
    for i, r in enumerate(rows):
        for j, e in enumerate(r):
            t[:, i, j] = e.c[: order + 1]
    return t


def jet_solver(a_rows):
    """Factor a square jet matrix once; returns solve(b_jets) -> list of Jets.

    Solves order by order against the LU factors of the constant-term matrix,
    so pivoting sees constant terms only.
    """
    t = _entry_tensor(a_rows)
    try:
        solve0 = linalg.lu_solver(t[0])
    except linalg.SingularMatrixError as exc:
        raise DegenerateSystem(str(exc)) from exc

    def solve(b_jets):
        kb = min(t.shape[0] - 1, min(e.order for e in b_jets))
        dtype = np.result_type(t.dtype, *[e.c.dtype for e in b_jets])
        bc = np.empty((kb + 1, len(b_jets)), dtype=dtype)
        for j, e in enumerate(b_jets):
            bc[:, j] = e.c[: kb + 1]
        x = np.empty((kb + 1, t.shape[1]), dtype=dtype)
        for m in range(kb + 1):
            rhs = bc[m]
            for k in range(1, m + 1):
                rhs = rhs - t[k] @ x[m - k]
            x[m] = solve0(rhs)
        return [Jet(x[:, j]) for j in range(t.shape[1])]

    return solve


def solve_linear_jets(a_rows, b_jets):
    """Solve A x = b over the jet ring (A square, invertible constant term)."""
    return jet_solver(a_rows)(b_jets)


def jet_matvec(a_rows, x_jets):
    out = []
    for row in a_rows:
        acc = row[0] * x_jets[0]
        for e, v in zip(row[1:], x_jets[1:]):
            acc = acc + e * v
        out.append(acc)
    return out


def det_jet(a_rows):
    """Determinant over the jet ring by cofactor expansion (small matrices)."""
    n = len(a_rows)
    if n == 1:
        return a_rows[0][0]
    if n == 2:
        return a_rows[0][0] * a_rows[1][1] - a_rows[0][1] * a_rows[1][0]
    acc = None
    for i in range(n):
        minor = [row[1:] for k, row in enumerate(a_rows) if k != i]
        term = a_rows[i][0] * det_jet(minor)
        if i % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc
