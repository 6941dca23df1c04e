import math
from fractions import Fraction

import pytest

from biasedtree import (
    CapacityExceeded,
    InexactParameter,
    TableKind,
    catalan_number,
    convolve_first_return,
    first_return_catalan,
    first_return_dp,
    make_params,
    pn_return_dp,
    spectral_radius,
)
from biasedtree.exact import (
    central_binomial_return,
    first_return_partial_sum,
    log_central_binomial_return,
    log_first_return_catalan,
)
from biasedtree.genfun import return_probability
from conftest import oracle_grid
from oracles import (
    catalan_recurrence,
    dyck_count,
    radial_path_sum,
    tree_first_return_probabilities,
    tree_return_probabilities,
)

F = Fraction


class TestPnReturnDp:
    def test_spec_values_simple(self, simple3):
        t = pn_return_dp(simple3, 6)
        assert (t[2], t[4], t[6]) == (F(1, 3), F(5, 27), F(29, 243))

    def test_spec_values_critical(self, critical3):
        t = pn_return_dp(critical3, 4)
        assert (t[2], t[4]) == (F(1, 2), F(3, 8))

    @pytest.mark.parametrize("d, lam", [(2, F(1, 2)), (3, F(1)), (3, F(3, 2)), (4, F(6)), (5, F(1, 2))])
    def test_against_full_tree_walk(self, d, lam):
        t = pn_return_dp(make_params(d, lam), 6)
        assert list(t.values) == tree_return_probabilities(d, lam, 6)

    @pytest.mark.parametrize("d, lam", [(3, F(1)), (4, F(5, 2))])
    def test_against_path_enumeration(self, d, lam):
        t = pn_return_dp(make_params(d, lam), 12)
        for n in range(0, 13, 2):
            assert t[n] == radial_path_sum(d, lam, n)

    @pytest.mark.parametrize("params", oracle_grid(), ids=str)
    def test_table_invariants(self, params):
        t = pn_return_dp(params, 40)
        assert t.kind is TableKind.STEP_RETURN and t.max_step == 40
        assert t[0] == 1
        assert all(t[n] == 0 for n in range(1, 41, 2))
        assert all(0 <= v <= 1 for v in t.values)

    def test_capacity(self, simple3):
        with pytest.raises(CapacityExceeded):
            pn_return_dp(simple3, 2001)
        with pytest.raises(CapacityExceeded):
            pn_return_dp(simple3, 30, rational_cap=20)

    def test_rational_needs_rational_lambda(self):
        with pytest.raises(InexactParameter):
            pn_return_dp(make_params(3, 1.0), 4)

    def test_zero_steps(self, simple3):
        assert pn_return_dp(simple3, 0).values == (1,)


class TestFirstReturnDp:
    def test_spec_values(self, simple3):
        t = first_return_dp(simple3, 6)
        assert (t[2], t[4], t[6], t[3]) == (F(1, 3), F(2, 27), F(8, 243), 0)
        assert t[0] == 0

    @pytest.mark.parametrize("d, lam", [(2, F(1, 2)), (3, F(2)), (5, F(3, 2))])
    def test_against_full_tree_walk(self, d, lam):
        t = first_return_dp(make_params(d, lam), 6)
        assert list(t.values) == tree_first_return_probabilities(d, lam, 6)

    def test_against_path_enumeration(self):
        t = first_return_dp(make_params(4, F(1, 2)), 12)
        for n in range(2, 13, 2):
            assert t[n] == radial_path_sum(4, F(1, 2), n, first=True)

    @pytest.mark.parametrize("params", oracle_grid(), ids=str)
    def test_partial_sums_bounded(self, params):
        t = first_return_dp(params, 200, "scaled_float")
        bound = float(return_probability(params)) + 1e-12
        total = 0.0
        for n in range(201):
            total += t.value(n)
            assert total <= bound

    def test_needs_two_steps(self, simple3):
        with pytest.raises(ValueError):
            first_return_dp(simple3, 1)


class TestCatalan:
    @pytest.mark.parametrize("k, c", [(0, 1), (3, 5), (10, 16796)])
    def test_values(self, k, c):
        assert catalan_number(k) == c

    @pytest.mark.parametrize("k", range(0, 9))
    def test_dyck_enumeration(self, k):
        assert catalan_number(k) == dyck_count(k)

    def test_recurrence(self):
        assert [catalan_number(k) for k in range(40)] == [catalan_recurrence(k) for k in range(40)]

    def test_first_return_values(self, simple3, critical3):
        assert first_return_catalan(simple3, 1) == F(1, 3)
        assert first_return_catalan(simple3, 3) == F(8, 243)
        assert first_return_catalan(critical3, 2) == F(1, 8)

    @pytest.mark.parametrize("params", oracle_grid(), ids=str)
    def test_float_matches_rational(self, params):
        for n in (1, 2, 5, 17, 30):
            exact = first_return_catalan(params, n)
            assert first_return_catalan(params, n, "scaled_float") == pytest.approx(float(exact), rel=1e-13)
            assert log_first_return_catalan(params, n) == pytest.approx(math.log(exact), rel=1e-14)


class TestConvolution:
    def test_spec_value(self, simple3):
        p = convolve_first_return(first_return_dp(simple3, 4))
        assert p[4] == F(1, 3) * F(1, 3) + F(2, 27) == F(5, 27)
        assert p[1] == 0

    def test_critical_central_binomial(self, critical3):
        p = convolve_first_return(first_return_dp(critical3, 6))
        assert p[6] == F(5, 16) == F(math.comb(6, 3), 2**6)

    def test_rejects_step_table(self, simple3):
        with pytest.raises(ValueError):
            convolve_first_return(pn_return_dp(simple3, 4))

    @pytest.mark.parametrize("d, lam", [(3, 1), (5, F(1, 3)), (4, 9)])
    def test_scaled_float(self, d, lam):
        params = make_params(d, lam)
        f = first_return_dp(params, 400, "scaled_float")
        p = pn_return_dp(params, 400, "scaled_float")
        c = convolve_first_return(f)
        for n in range(0, 401, 2):
            assert c.log(n) == pytest.approx(p.log(n), rel=1e-11, abs=1e-11)


class TestScaledFloat:
    @pytest.mark.parametrize("params", oracle_grid(), ids=str)
    def test_fidelity_against_rational(self, params):
        fparams = make_params(params.d, float(params.lam))
        for func in (pn_return_dp, first_return_dp):
            exact = func(params, 60)
            approx = func(fparams, 60, "scaled_float")
            for n in range(61):
                if exact[n] == 0:
                    assert approx[n] == 0
                else:
                    assert approx.value(n) == pytest.approx(float(exact[n]), rel=1e-12)

    def test_no_underflow_far_below_double_range(self):
        params = make_params(10, F(1, 100))
        t = pn_return_dp(params, 4000, "scaled_float")
        rho = spectral_radius(params)
        # log p^(n) is about n log rho; far below log(min double) ~ -708
        assert t.log(4000) < -10000
        assert t.log(4000) / 4000 == pytest.approx(math.log(rho), rel=1e-2)
        assert t.values[4000] != 0

    def test_root_convergence_to_rho(self, simple3):
        t = pn_return_dp(make_params(3, 1.0), 4000, "scaled_float")
        rho = spectral_radius(simple3)
        assert abs(math.exp(t.log(4000) / 4000) - rho) < 1e-2

    def test_accepts_float_alias(self, simple3):
        assert pn_return_dp(simple3, 4, "float").arithmetic.value == "scaled_float"


class TestCentralBinomial:
    def test_matches_dp(self, critical3):
        t = pn_return_dp(critical3, 40)
        for n in range(21):
            assert t[2 * n] == central_binomial_return(n)
            if n:
                assert log_central_binomial_return(n) == pytest.approx(math.log(t[2 * n]), rel=1e-14)


def test_partial_sum_matches_catalan_terms(simple3):
    direct = sum(float(first_return_catalan(simple3, k)) for k in range(1, 51))
    assert first_return_partial_sum(simple3, 100) == pytest.approx(direct, rel=1e-14)
    assert first_return_partial_sum(simple3, 10**4) == pytest.approx(0.5, abs=1e-14)
