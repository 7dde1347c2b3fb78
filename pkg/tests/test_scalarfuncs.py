"""Tests for the conformal profile F and the weight f.

Frozen expected values were produced by independent oracles: bisection on the
cubic in exp(-F), scipy.integrate.quad on the substituted integrand, and
central finite differences; see the inline notes.
"""

import numpy as np
import pytest

from aklab import scalarfuncs as sf

P1 = sf.ConformalProfile(c=-1.0)
P2 = sf.ConformalProfile(c=-2.0)
PHALF = sf.ConformalProfile(c=-0.5)

# bisection of 2y^3 + y - 1 = 0 on [0,1], F = -ln y
F_AT_1 = 0.5280489095130113
# central FD (h=1e-6) of the bisection-F
FPRIME_AT_1 = 0.2253488171066742
# scipy.integrate.quad of 3 F'(sigma^3) sigma on [0,1], tol 1e-12
F_LOWER_AT_1 = -1.043431154339793
# central FD (h=1e-6) of the quadrature-f
FPRIME_LOWER_AT_1 = -0.5731592018776155


def t_sweep(lo=1e-8, hi=1e4, num=1000):
    return np.concatenate([[0.0], np.geomspace(lo, hi, num - 1)])


class TestProfileValidation:
    def test_c_must_be_negative(self):
        with pytest.raises(sf.DomainError):
            sf.ConformalProfile(c=0.0)
        with pytest.raises(sf.DomainError):
            sf.ConformalProfile(c=1.0)

    def test_quad_order_floor(self):
        with pytest.raises(sf.DomainError):
            sf.ConformalProfile(c=-1.0, quad_order=4)

    def test_negative_t_rejected(self):
        for fn in (sf.eval_F, sf.eval_F_prime, sf.eval_f, sf.eval_f_prime):
            with pytest.raises(sf.DomainError):
                fn(P1, -0.5)


class TestEvalF:
    def test_value_at_zero_is_log_abs_c(self):
        assert sf.eval_F(P1, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert sf.eval_F(P2, 0.0) == pytest.approx(np.log(2.0), abs=1e-12)
        assert sf.eval_F(PHALF, 0.0) == pytest.approx(np.log(0.5), abs=1e-12)

    def test_bisection_oracle_at_one(self):
        assert sf.eval_F(P1, 1.0) == pytest.approx(F_AT_1, abs=1e-12)

    def test_functional_residual_on_sweep(self):
        for prof in (P1, P2, PHALF):
            t = t_sweep()
            res = sf.functional_residual(prof, t, sf.eval_F(prof, t))
            assert np.max(np.abs(res)) <= 1e-10

    def test_matches_closed_form(self):
        for prof in (P1, P2, PHALF):
            t = np.geomspace(1e-6, 1e4, 400)
            diff = sf.eval_F(prof, t) - sf.closed_form_F(prof, t)
            assert np.max(np.abs(diff)) <= 1e-9

    def test_monotone_increasing(self):
        t = t_sweep(num=200)
        F = sf.eval_F(P1, t)
        assert np.all(np.diff(F) > 0)


class TestEvalFPrime:
    def test_value_at_zero(self):
        # F'(0) = 2/|c|^3 by substituting F(0) = ln|c|
        assert sf.eval_F_prime(P1, 0.0) == pytest.approx(2.0, abs=1e-12)
        assert sf.eval_F_prime(P2, 0.0) == pytest.approx(0.25, abs=1e-12)

    def test_finite_difference_oracle(self):
        assert sf.eval_F_prime(P1, 1.0) == pytest.approx(FPRIME_AT_1, rel=1e-6)
        # fresh FD match at other points, h = 1e-6
        for t0 in (0.3, 2.0, 17.0):
            h = 1e-6 * max(1.0, t0)
            fd = (sf.eval_F(P1, t0 + h) - sf.eval_F(P1, t0 - h)) / (2 * h)
            assert sf.eval_F_prime(P1, t0) == pytest.approx(fd, rel=1e-6)

    def test_strictly_positive(self):
        for prof in (P1, P2, PHALF):
            assert np.all(sf.eval_F_prime(prof, t_sweep()) > 0)


class TestEvalf:
    def test_zero_at_zero(self):
        for prof in (P1, P2, PHALF):
            assert sf.eval_f(prof, 0.0) == 0.0

    def test_quadrature_oracle_at_one(self):
        assert sf.eval_f(P1, 1.0) == pytest.approx(F_LOWER_AT_1, abs=1e-10)

    def test_nonpositive_and_decreasing(self):
        t = t_sweep(num=300)
        f = sf.eval_f(P1, t)
        assert np.all(f <= 0)
        assert sf.eval_f(P1, 2.0) < sf.eval_f(P1, 1.0) < 0


class TestEvalfPrime:
    def test_limit_at_zero(self):
        assert sf.eval_f_prime(P1, 0.0) == pytest.approx(-3.0, abs=1e-12)
        assert sf.f_prime_at_zero(P2) == pytest.approx(-1.5 * 0.25, abs=1e-12)

    def test_small_t_expansion_oracle(self):
        # f(t) ~ -(3/2) F'(0) t from the expansion of the integral
        for t0 in (1e-5, 1e-6):
            assert sf.eval_f(P1, t0) / t0 == pytest.approx(-3.0, rel=2e-4)

    def test_finite_difference_oracle(self):
        assert sf.eval_f_prime(P1, 1.0) == pytest.approx(FPRIME_LOWER_AT_1, rel=1e-6)
        for t0 in (0.5, 4.0):
            h = 1e-6
            fd = (sf.eval_f(P1, t0 + h) - sf.eval_f(P1, t0 - h)) / (2 * h)
            assert sf.eval_f_prime(P1, t0) == pytest.approx(fd, rel=1e-6)

    def test_negative_and_monotone_increasing(self):
        t = np.geomspace(1e-6, 1e4, 500)
        fp = sf.eval_f_prime(P1, t)
        assert np.all(fp < 0)
        assert np.all(np.diff(fp) > 0)


class TestLemmaIdentities:
    def test_positivity_combination(self):
        for prof in (P1, P2, PHALF):
            comb = sf.positivity_combination(prof, t_sweep())
            assert np.all(comb > 0)

    def test_combination_equals_cube_root_form(self):
        # 1 - f + 3t f' = 3t g'/g with the explicit cube-root auxiliary
        for prof in (P1, P2, PHALF):
            t = np.geomspace(1e-4, 1e4, 300)
            lhs = sf.positivity_combination(prof, t)
            rhs = 3.0 * t * sf.g_aux_prime(prof, t) / sf.g_aux(prof, t)
            assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) <= 1e-6

    def test_G_nonnegative(self):
        # G(t) = f'(t) t^(2/3) - f(t) t^(-1/3) >= 0 (vanishes only at t = 0)
        t = np.geomspace(1e-6, 1e4, 300)
        G = sf.eval_f_prime(P1, t) * t ** (2 / 3) - sf.eval_f(P1, t) * t ** (-1 / 3)
        assert np.all(G >= 0)


def test_array_shapes_roundtrip():
    t = np.linspace(0.0, 3.0, 7).reshape(7, 1)
    assert sf.eval_F(P1, t).shape == (7, 1)
    assert sf.eval_f(P1, t).shape == (7, 1)
    assert sf.eval_f_prime(P1, t).shape == (7, 1)
