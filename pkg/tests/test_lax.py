import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pentalab.configs import evenly_spaced_chi, short_diagonal_chi
from pentalab.curves import gamma_jet, random_curve_spec, zero_curve_spec
from pentalab.jets import eval_jet
from pentalab.lax import (
    d_eps,
    d_eps_inv,
    frame_drift_matrix,
    l_tilde,
    lax_limit_diagnostics,
    p_tilde,
    u_matrix,
    v_matrix,
    v_matrix_jets,
)

X0 = 0.3


@pytest.fixture(scope="module")
def report_d2():
    spec = random_curve_spec(2, seed=11)
    return spec, lax_limit_diagnostics(spec, short_diagonal_chi(2), X0)


@pytest.fixture(scope="module")
def report_d3():
    spec = random_curve_spec(3, seed=23)
    return spec, lax_limit_diagnostics(spec, short_diagonal_chi(3), X0)


def frame_values(spec, x, rows):
    """Stack of derivative rows Γ, Γ', ... as plain floats."""
    g = gamma_jet(spec, x, rows + 1).component_jets()
    out = np.empty((rows, spec.d + 1))
    for i in range(rows):
        out[i] = [jet.value for jet in g]
        g = [jet.derivative() for jet in g]
    return out


class TestCompanion:
    def test_zero_curve_is_nilpotent_shift(self):
        spec = zero_curve_spec(2)
        assert_allclose(u_matrix(spec, 0.7),
                        [[0, 1, 0], [0, 0, 1], [0, 0, 0]], atol=0)

    def test_last_row_holds_coefficients(self, curve_d3):
        u = u_matrix(curve_d3, X0)
        vals = [eval_jet(f, X0, 0).value for f in curve_d3.u]
        assert_allclose(u[3, :3], np.negative(vals), atol=1e-14)
        assert u[3, 3] == 0.0

    def test_characteristic_polynomial(self, curve_d3):
        # det(lam*I - U) recovers the coefficients of the curve's equation
        u = u_matrix(curve_d3, X0)
        vals = [eval_jet(f, X0, 0).value for f in curve_d3.u]
        expected = [1.0, 0.0, vals[2], vals[1], vals[0]]
        assert_allclose(np.poly(np.asarray(u, dtype=float)), expected,
                        atol=1e-10)

    def test_frame_satisfies_ode(self, curve_d2):
        u = np.asarray(u_matrix(curve_d2, X0), dtype=float)
        rows = frame_values(curve_d2, X0, 5)
        assert_allclose(u @ rows[:3], rows[1:4], atol=1e-9)


class TestVMatrix:
    def test_zero_curve_squares_companion(self):
        spec = zero_curve_spec(2)
        u = np.asarray(u_matrix(spec, 0.2), dtype=float)
        assert_allclose(v_matrix(spec, 0.2, 0.375), 0.375 * u @ u,
                        atol=1e-12)

    def test_linear_in_scale(self, curve_d2):
        assert_allclose(v_matrix(curve_d2, X0, 0.75),
                        2.0 * v_matrix(curve_d2, X0, 0.375), atol=1e-12)

    @pytest.mark.parametrize("d,seed", [(2, 11), (3, 23)])
    def test_defining_relation(self, d, seed):
        # V resolves the derivative stack of Q2 Gamma against the frame
        spec = random_curve_spec(d, seed=seed)
        c = 0.4
        v = v_matrix(spec, X0, c)
        g = gamma_jet(spec, X0, d + 4).component_jets()
        u_top = eval_jet(spec.u[d - 1], X0, d + 4)
        q2g = [gj.derivative().derivative() + gj * u_top * (2.0 / (d + 1))
               for gj in g]
        rows = np.empty((d + 1, d + 1))
        for k in range(d + 1):
            rows[k] = [jet.value for jet in q2g]
            q2g = [jet.derivative() for jet in q2g]
        frame = frame_values(spec, X0, d + 1)
        assert_allclose(v @ frame, c * rows, atol=1e-9)

    def test_jet_derivative_matches_difference(self, curve_d2):
        h = 1e-4
        vj = v_matrix_jets(curve_d2, X0, 0.375, order=2)
        vp = np.array([[e.derivative().value for e in r] for r in vj])
        fd = (v_matrix(curve_d2, X0 + h, 0.375)
              - v_matrix(curve_d2, X0 - h, 0.375)) / (2 * h)
        assert_allclose(vp, fd, atol=1e-5)


class TestShiftCompanion:
    def test_zero_curve_binomial_row(self):
        lt = l_tilde(zero_curve_spec(2), 0.4, 0.17)
        assert_allclose(lt[2], [1.0, -3.0, 3.0], atol=1e-10)
        assert_allclose(lt[:2], [[0, 1, 0], [0, 0, 1]], atol=0)

    def test_spectral_slot_placement(self, curve_d2, curve_d3):
        lt3 = l_tilde(curve_d3, X0, 0.1, z=7.0)
        assert (lt3[0, 1], lt3[1, 2], lt3[2, 3]) == (7.0, 1.0, 7.0)
        lt2 = l_tilde(curve_d2, X0, 0.1, z=7.0)
        assert (lt2[0, 1], lt2[1, 2]) == (1.0, 7.0)

    @pytest.mark.parametrize("d,seed", [(2, 11), (3, 23)])
    def test_advances_sample_stack(self, d, seed):
        spec = random_curve_spec(d, seed=seed)
        e = 0.08
        samples = np.stack([spec.frame_at(X0 + k * e)[0]
                            for k in range(d + 2)])
        lt = l_tilde(spec, X0, e)
        assert_allclose(lt @ samples[:d + 1], samples[1:], atol=1e-9)


class TestDifferenceBasis:
    def test_d1_entries(self):
        e = 0.25
        assert_allclose(d_eps(1, e), [[1, 0], [-4.0, 4.0]], atol=1e-14)
        assert_allclose(d_eps_inv(1, e), [[1, 0], [1.0, 0.25]], atol=1e-14)

    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_inverse_pair(self, d):
        e = 0.13
        assert_allclose(d_eps(d, e) @ d_eps_inv(d, e), np.eye(d + 1),
                        atol=1e-10)

    def test_maps_samples_to_difference_quotients(self, curve_d2):
        e = 0.05
        samples = np.stack([curve_d2.frame_at(X0 + k * e)[0]
                            for k in range(3)])
        scaled = d_eps(2, e) @ samples
        for k in range(3):
            assert_allclose(scaled[k],
                            np.diff(samples, n=k, axis=0)[0] / e ** k,
                            atol=1e-10)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            d_eps(2, 0.0)
        with pytest.raises(ValueError):
            d_eps_inv(2, -0.1)


class TestTransfer:
    @pytest.mark.parametrize("shift", [0, 1])
    def test_defining_relation(self, curve_d2, shift):
        from pentalab.chimap import chi_map_point

        chi = short_diagonal_chi(2)
        e = 0.1
        p = p_tilde(curve_d2, chi, X0, e, shift_index=shift)
        base = X0 + shift * e
        w = np.stack([curve_d2.frame_at(base + j * e)[0] for j in range(3)])
        wt = np.stack([chi_map_point(curve_d2, chi, base + j * e, e, 6)[0]
                       .value() for j in range(3)])
        assert_allclose(p @ w, wt, atol=1e-8)

    def test_rejects_other_shifts(self, curve_d2):
        with pytest.raises(ValueError):
            p_tilde(curve_d2, short_diagonal_chi(2), X0, 0.1, shift_index=2)


class TestLimits:
    def test_kinematic_limit_d2(self, report_d2):
        _, rep = report_d2
        assert 0.8 < rep.conj_slope < 1.2
        assert rep.conj_limit_dev <= 1e-3

    def test_kinematic_limit_d3(self, report_d3):
        _, rep = report_d3
        assert 0.8 < rep.conj_slope < 1.2
        assert rep.conj_limit_dev <= 1e-3

    def test_discrete_relation_is_identity(self, report_d2, report_d3):
        assert report_d2[1].identity_max <= 1e-9
        assert report_d3[1].identity_max <= 1e-9

    def test_quotients_reach_zero_curvature_d2(self, report_d2):
        _, rep = report_d2
        assert rep.quot_lhs_dev <= 2e-2
        assert rep.quot_rhs_dev <= 2e-2
        assert rep.w_target_dev <= 1e-3

    def test_quotients_reach_zero_curvature_d3(self, report_d3):
        _, rep = report_d3
        assert rep.quot_lhs_dev <= 2e-2
        assert rep.quot_rhs_dev <= 2e-2
        assert rep.w_target_dev <= 5e-3

    def test_transfer_expansion_d2(self, report_d2):
        _, rep = report_d2
        assert rep.p0_eps1 <= 1e-4
        assert rep.p0_v_dev <= 1e-3
        assert rep.p1_v_dev <= 2e-3

    def test_transfer_expansion_d3(self, report_d3):
        _, rep = report_d3
        assert rep.p0_eps1 <= 1e-4
        assert rep.p0_v_dev <= 1e-3

    def test_third_order_structure(self, report_d2, report_d3):
        # both transfer matrices share the frame-drift term; the shift
        # difference of their third-order coefficients is dV/dx
        assert report_d2[1].drift_dev <= 2e-3
        assert report_d2[1].shift_vprime_dev <= 2e-2
        assert report_d3[1].drift_dev <= 2e-2
        assert report_d3[1].shift_vprime_dev <= 1e-1

    def test_zero_curve_targets_vanish(self):
        spec = zero_curve_spec(2)
        rep = lax_limit_diagnostics(spec, short_diagonal_chi(2), 0.4)
        assert np.max(np.abs(rep.target)) <= 1e-10
        assert rep.quot_lhs_dev <= 1e-6
        assert rep.quot_rhs_dev <= 1e-6
        assert rep.identity_max <= 1e-11

    def test_requires_centralized_configuration(self, curve_d2):
        chi = evenly_spaced_chi((-0.8, 0.5), 0.9, 2)
        with pytest.raises(ValueError, match="centralized"):
            lax_limit_diagnostics(curve_d2, chi, X0)


class TestDrift:
    def test_zero_curve_has_no_drift(self):
        assert_allclose(frame_drift_matrix(zero_curve_spec(2), 0.4, 0.375),
                        0.0, atol=1e-13)

    def test_scales_linearly(self, curve_d2):
        assert_allclose(frame_drift_matrix(curve_d2, X0, 0.75),
                        2.0 * frame_drift_matrix(curve_d2, X0, 0.375),
                        atol=1e-12)


class TestReportInterface:
    def test_to_dict_is_json_ready(self, report_d2):
        _, rep = report_d2
        blob = json.loads(json.dumps(rep.to_dict()))
        assert blob["d"] == 2
        assert set(blob) >= {"conj_slope", "identity_max", "quot_lhs_dev",
                             "p0_eps1", "drift_dev", "shift_vprime_dev"}

    def test_csv_rows_per_rung(self, report_d2):
        _, rep = report_d2
        rows = rep.csv_rows()
        assert len(rows) == rep.eps.size
        assert all(len(r) == 4 for r in rows)
        assert rows[0][0] > rows[-1][0]
