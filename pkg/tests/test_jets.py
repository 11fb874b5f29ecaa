import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pentalab.jets import (
    AnalyticFn,
    DegenerateSystem,
    Jet,
    det_jet,
    eval_jet,
    jet_matvec,
    solve_linear_jets,
    trig_poly,
)


def random_jet(rng, order):
    c = rng.uniform(-1, 1, order + 1)
    return Jet(c)


def random_fn(rng):
    return trig_poly(rng.uniform(-0.5, 0.5),
                     [(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                      (rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2))])


def test_sine_jet_at_zero():
    j = eval_jet(AnalyticFn.x().sin(), 0.0, 3)
    assert_allclose(j.c, [0.0, 1.0, 0.0, -1.0 / 6.0], atol=1e-15)


def test_constant_jet():
    j = eval_jet(AnalyticFn.const(5.0), 1.7, 2)
    assert_allclose(j.c, [5.0, 0.0, 0.0])


def test_square_jet():
    x = AnalyticFn.x()
    j = eval_jet(x * x, 2.0, 2)
    # hand expansion of t^2 at t = 2: 4 + 4h + h^2
    assert_allclose(j.c, [4.0, 4.0, 1.0], atol=1e-14)


def test_division_series():
    one = Jet.const(1.0, 6)
    onepx = Jet([1.0, 1.0, 0, 0, 0, 0, 0])
    q = one / onepx
    assert_allclose(q.c, [(-1.0) ** k for k in range(7)], atol=1e-15)


def test_division_needs_nonzero_constant():
    with pytest.raises(ZeroDivisionError):
        Jet.const(1.0, 3) / Jet([0.0, 1.0, 0, 0])


def test_fractional_power_roundtrip(rng):
    a = Jet(rng.uniform(0.5, 1.5, 9))
    b = (a ** 0.5) * (a ** 0.5)
    assert_allclose(b.c, a.c, rtol=1e-12)
    with pytest.raises(ValueError):
        Jet([-1.0, 0.3, 0.1]) ** 0.5


def test_integer_power_matches_repeated_product(rng):
    a = random_jet(rng, 7)
    assert_allclose((a ** 3).c, (a * a * a).c, rtol=1e-13)


def test_ring_axioms_on_random_triples(rng):
    for _ in range(20):
        a, b, c = (random_jet(rng, 8) for _ in range(3))
        lhs = ((a * b) * c).c
        rhs = (a * (b * c)).c
        assert_allclose(lhs, rhs, atol=1e-12)
        assert_allclose((a * (b + c)).c, (a * b + a * c).c, atol=1e-12)


def test_product_rule_through_trees(rng):
    for _ in range(8):
        f, g = random_fn(rng), random_fn(rng)
        x = rng.uniform(-2, 2)
        jf, jg = eval_jet(f, x, 8), eval_jet(g, x, 8)
        jfg = eval_jet(f * g, x, 8)
        assert_allclose(jfg.c, (jf * jg).c, rtol=1e-10, atol=1e-12)


def test_derivative_of_sin_tree():
    f = AnalyticFn.x().sin()
    j = eval_jet(f, 0.4, 6)
    assert_allclose(j.derivative().c, eval_jet(f, 0.4, 6).c[1:] * np.arange(1, 7))
    assert_allclose(j.deriv(2), -math.sin(0.4), atol=1e-14)


def test_declared_periodic_holds(rng):
    f = random_fn(rng)
    assert f.periodic
    for x in rng.uniform(-3, 3, 5):
        assert f(x + 2 * math.pi) == pytest.approx(f(x), abs=1e-12)


def test_json_roundtrip(rng):
    f = random_fn(rng) / (AnalyticFn.const(2.0) + AnalyticFn.x().cos()) ** 2.0
    g = AnalyticFn.from_dict(f.to_dict())
    for x in rng.uniform(-2, 2, 5):
        assert g(x) == pytest.approx(f(x), rel=1e-14)
        assert_allclose(eval_jet(g, x, 5).c, eval_jet(f, x, 5).c, rtol=1e-13)


def test_eval_jet_matches_numeric_derivatives(rng):
    f = random_fn(rng)
    x = 0.37
    j = eval_jet(f, x, 4)
    h = 1e-5
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    assert j.deriv(1) == pytest.approx(d1, abs=1e-8)
    assert j.deriv(2) == pytest.approx(d2, abs=1e-5)


# -- linear algebra over jets -------------------------------------------------


def jet_eye(n, order):
    return [[Jet.const(1.0 if i == j else 0.0, order) for j in range(n)] for i in range(n)]


def test_solve_identity(rng):
    b = [random_jet(rng, 5) for _ in range(3)]
    x = solve_linear_jets(jet_eye(3, 5), b)
    for xi, bi in zip(x, b):
        assert_allclose(xi.c, bi.c, atol=1e-14)


def test_solve_scalar_division():
    a = [[Jet([1.0, 1.0, 0, 0, 0])]]
    x = solve_linear_jets(a, [Jet.const(1.0, 4)])
    assert_allclose(x[0].c, [1, -1, 1, -1, 1], atol=1e-13)


def test_solve_random_system_residual(rng):
    n, order = 4, 5
    a = [[random_jet(rng, order) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        a[i][i] = a[i][i] + 3.0  # keep the constant-term matrix well conditioned
    b = [random_jet(rng, order) for _ in range(n)]
    x = solve_linear_jets(a, b)
    ax = jet_matvec(a, x)
    for lhs, rhs in zip(ax, b):
        assert_allclose(lhs.c, rhs.c, rtol=1e-10, atol=1e-12)


def test_solve_singular_constant_term():
    a = [[Jet([0.0, 1.0]), Jet([0.0, 0.0])],
         [Jet([0.0, 0.0]), Jet([1.0, 0.0])]]
    with pytest.raises(DegenerateSystem):
        solve_linear_jets(a, [Jet.const(1.0, 1), Jet.const(1.0, 1)])


def test_det_identity_and_diagonal(rng):
    assert_allclose(det_jet(jet_eye(4, 3)).c, [1, 0, 0, 0], atol=1e-15)
    a, b = random_jet(rng, 5), random_jet(rng, 5)
    z = Jet.const(0.0, 5)
    d = det_jet([[a, z], [z, b]])
    assert_allclose(d.c, (a * b).c, atol=1e-14)


def test_det_order_zero_matches_scalar(rng):
    m = rng.uniform(-1, 1, (3, 3))
    rows = [[Jet([v]) for v in r] for r in m]
    assert det_jet(rows).value == pytest.approx(np.linalg.det(m), rel=1e-12)


def test_det_higher_order_against_product_expansion(rng):
    # det of a triangular jet matrix is the product of its diagonal
    n, order = 4, 6
    rows = [[Jet.const(0.0, order) for _ in range(n)] for _ in range(n)]
    diag = [random_jet(rng, order) + 2.0 for _ in range(n)]
    for i in range(n):
        rows[i][i] = diag[i]
        for j in range(i + 1, n):
            rows[i][j] = random_jet(rng, order)
    expect = diag[0]
    for dj in diag[1:]:
        expect = expect * dj
    assert_allclose(det_jet(rows).c, expect.c, rtol=1e-12)
