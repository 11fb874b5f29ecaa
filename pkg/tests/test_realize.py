import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from pentalab.configs import ChiConfig, sym_table
from pentalab.curves import random_curve_spec
from pentalab.realize import (
    Realization34Report,
    check_34,
    dof_lower_bound,
    mari_beffa_family,
    r_poly_roots,
    search_34,
)

X0 = 0.3


@pytest.fixture(scope="module")
def probes():
    return [random_curve_spec(3, seed=s) for s in (23, 41, 57)]


@pytest.fixture(scope="module")
def integer_instance():
    chi, residual = mari_beffa_family(-2, 3, -5)
    assert residual == 0.0
    return chi


@pytest.fixture(scope="module")
def integer_report(integer_instance, probes):
    return check_34(integer_instance, probes, X0)


class TestDofBound:
    def test_small_values(self):
        assert [dof_lower_bound(m) for m in (2, 3, 4)] == [1, 2, 4]

    @pytest.mark.parametrize("m", range(2, 13))
    def test_matches_per_order_sum(self, m):
        # each killed order i contributes (i^2 - 3i + 4)/2 restrictions
        total = sum((i * i - 3 * i + 4) // 2 for i in range(1, m))
        assert dof_lower_bound(m) == total

    def test_first_order_is_free(self):
        assert dof_lower_bound(1) == 0

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            dof_lower_bound(0)


class TestFamily:
    def test_integer_instance_nodes(self, integer_instance):
        assert integer_instance.groups == ((-2.0, 3.0, 5.0),
                                           (-5.0, 2.0, 3.0),
                                           (-6.0, -5.0, -1.0))

    def test_off_slice_residual(self):
        _, residual = mari_beffa_family(2, 3, 4)
        assert residual == pytest.approx(5.75)

    @pytest.mark.parametrize("a,b,c", [(-2, 3, -5), (3, 2, 18)])
    def test_zero_residual_members_have_equal_products(self, a, b, c):
        chi, residual = mari_beffa_family(a, b, c)
        assert residual <= 1e-12
        top = sym_table(chi).top()
        assert_allclose(top, -a * b * c, atol=1e-12)


class TestRootGate:
    def test_four_distinct_real_roots(self):
        roots = r_poly_roots()
        assert roots.shape == (4,)
        assert np.all(np.diff(roots) > 1e-6)

    def test_polished_residuals(self):
        poly = [2480.0, 33006.0, 72121.0, -198036.0, 89280.0]
        for r in r_poly_roots():
            assert abs(np.polyval(poly, r)) <= 1e-8


class TestCheck34:
    def test_integer_instance_passes(self, integer_report):
        rep = integer_report
        assert rep.sigma_equal
        assert_allclose(rep.sigma_top, -30.0, atol=1e-12)
        assert rep.g1_norm <= 1e-4
        assert rep.g2_norm <= 1e-4
        assert rep.g3_match <= 1e-3
        assert rep.passes()
        assert rep.skipped == ()

    def test_fitted_constant_matches_product_rule(self, integer_report):
        # the third-order constant is the common node product over 3!
        assert integer_report.c_fit == pytest.approx(-5.0, abs=5e-3)

    @pytest.mark.parametrize("root_index", [0, 2])
    def test_quartic_gate_configs_pass(self, probes, root_index):
        r = r_poly_roots()[root_index]
        chi = ChiConfig(3, [[-1.0, 1.5, 4.0], [1.2, 10.0, -0.5],
                            [1.0, -r, 6.0 / r]])
        rep = check_34(chi, probes, X0)
        assert rep.sigma_equal
        assert_allclose(rep.sigma_top, -6.0, atol=1e-9)
        assert rep.passes()
        assert rep.c_fit == pytest.approx(-1.0, abs=5e-3)

    def test_perturbed_instance_fails(self, probes):
        chi = ChiConfig(3, [[5.05, -2.0, 3.0], [-5.0, 2.0, 3.0],
                            [-5.0, -1.0, -6.0]])
        rep = check_34(chi, probes, X0)
        assert not rep.sigma_equal
        assert rep.g1_norm >= 1e-3
        assert not rep.passes()

    def test_rejects_wrong_shape(self, probes):
        flat = ChiConfig(2, [[-1.0, 1.0], [-2.0, 2.0]])
        with pytest.raises(ValueError):
            check_34(flat, probes, X0)

    def test_rejects_too_few_probes(self, integer_instance, probes):
        with pytest.raises(ValueError):
            check_34(integer_instance, probes[:2], X0)

    def test_report_round_trip(self, integer_report):
        blob = json.loads(json.dumps(integer_report.to_dict()))
        assert blob["passes"] is True
        assert blob["sigma_equal"] is True
        assert len(blob["sigma_top"]) == 3
        assert blob["chi"]["d"] == 3


class TestSearch:
    def test_passing_seed_is_fixed_point(self, integer_instance, probes):
        res = search_34(integer_instance, probes, X0, max_iters=40)
        assert res.converged
        assert not res.improved
        assert res.evaluations == 1
        assert res.chi == integer_instance
        assert res.report.passes()

    def test_recovers_from_small_perturbation(self, probes):
        seed = ChiConfig(3, [[5.0, -2.02, 3.0], [-5.0, 2.0, 3.0],
                             [-5.0, -1.0, -6.0]])
        res = search_34(seed, probes, X0, max_iters=80)
        assert res.converged
        assert res.improved
        assert res.report.passes()

    def test_checkpoint_written_and_reused(self, integer_instance, probes,
                                           tmp_path):
        path = tmp_path / "search.json"
        first = search_34(integer_instance, probes, X0, max_iters=10,
                          checkpoint=str(path))
        assert first.converged
        saved = json.loads(path.read_text())
        assert len(saved["params"]) == 9
        again = search_34(integer_instance, probes, X0, max_iters=10,
                          checkpoint=str(path))
        assert again.converged
        assert again.evaluations == 1

    def test_rejects_too_few_probes(self, integer_instance, probes):
        with pytest.raises(ValueError):
            search_34(integer_instance, probes[:1], X0)

    def test_result_round_trip(self, integer_instance, probes):
        res = search_34(integer_instance, probes, X0, max_iters=5)
        blob = json.loads(json.dumps(res.to_dict()))
        assert blob["converged"] is True
        assert blob["report"]["passes"] is True
