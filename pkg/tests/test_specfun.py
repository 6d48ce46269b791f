import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from unbcount.errors import DomainError, NonConvergenceError
from unbcount.specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    ThetaArgs,
    confluent_1f1,
    confluent_1f1_eval,
    digamma,
    gauss_2f1,
    gauss_2f1_db,
    gauss_2f1_eval,
    kampe_theta1,
    kampe_theta1_eval,
    lerch_phi,
    lerch_phi_eval,
    log_gamma,
    log_pochhammer,
    series_2f1_euler,
    series_2f1_raw,
    trigamma,
)

LN2 = math.log(2.0)


class TestLogGamma:
    def test_at_one(self):
        assert log_gamma(1.0) == 0.0

    def test_at_five(self):
        assert log_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)

    def test_at_half_vs_quadrature(self):
        # independent oracle: the defining integral of the gamma function
        val, _ = quad(lambda t: t ** (-0.5) * math.exp(-t), 0.0, 60.0)
        assert log_gamma(0.5) == pytest.approx(math.log(val), abs=1e-9)
        assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-13)

    @pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            log_gamma(bad)


class TestDigamma:
    @pytest.mark.parametrize("x", [0.5, 1.0, 3.7])
    def test_recurrence(self, x):
        assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, abs=1e-12)

    def test_at_one_vs_finite_difference(self):
        h = 1e-5
        fd = (log_gamma(1.0 + h) - log_gamma(1.0 - h)) / (2.0 * h)
        assert digamma(1.0) == pytest.approx(fd, abs=1e-8)
        assert digamma(1.0) == pytest.approx(-0.5772156649015329, abs=1e-12)

    def test_at_ten_vs_finite_difference(self):
        h = 1e-5
        fd = (log_gamma(10.0 + h) - log_gamma(10.0 - h)) / (2.0 * h)
        assert digamma(10.0) == pytest.approx(fd, abs=1e-8)

    def test_domain(self):
        with pytest.raises(DomainError):
            digamma(-2.0)


class TestTrigamma:
    def test_recurrence(self):
        x = 2.0
        assert trigamma(x + 1.0) - trigamma(x) == pytest.approx(-1.0 / x ** 2,
                                                                abs=1e-12)

    def test_at_one_vs_finite_difference(self):
        h = 1e-4
        fd = (digamma(1.0 + h) - digamma(1.0 - h)) / (2.0 * h)
        assert trigamma(1.0) == pytest.approx(fd, abs=1e-6)
        assert trigamma(1.0) == pytest.approx(1.6449340668482264, abs=1e-12)

    @pytest.mark.parametrize("x", [0.1, 0.9, 2.5, 17.0, 300.0])
    def test_positive(self, x):
        assert trigamma(x) > 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            trigamma(0.0)


class TestGauss2F1:
    def test_at_zero(self):
        assert gauss_2f1(1.2, 3.4, 5.6, 0.0) == 1.0

    def test_geometric_collapse(self):
        # 2F1(1, a; a; q) = 1/(1-q)
        assert gauss_2f1(1.0, 3.5, 3.5, 0.5) == pytest.approx(2.0, rel=1e-13)

    def test_log_closed_form(self):
        # 2F1(1, 1; 2; z) = -log(1-z)/z
        assert gauss_2f1(1.0, 1.0, 2.0, 0.5) == pytest.approx(2.0 * LN2, rel=1e-13)

    @pytest.mark.parametrize("z", [1.0, -1.0, 1.5])
    def test_domain_z(self, z):
        with pytest.raises(DomainError):
            gauss_2f1(1.0, 2.0, 3.0, z)

    def test_domain_c(self):
        with pytest.raises(DomainError):
            gauss_2f1(1.0, 2.0, -3.0, 0.5)

    def test_non_convergence(self):
        with pytest.raises(NonConvergenceError):
            gauss_2f1(1.0, 8.0, 2.0, 0.7, SeriesControl(max_terms=5))

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(a=st.floats(0.1, 5.0), b=st.floats(0.1, 5.0),
           c=st.floats(0.4, 6.0), z=st.floats(-0.9, 0.9))
    def test_symmetry_in_a_b(self, a, b, c, z):
        f_ab = gauss_2f1(a, b, c, z)
        f_ba = gauss_2f1(b, a, c, z)
        assert abs(f_ab - f_ba) <= 1e-12 * abs(f_ab)

    def test_dz_identity(self, rng):
        # d/dz 2F1(a,b;c;z) = (ab/c) 2F1(a+1,b+1;c+1;z)
        for _ in range(20):
            a = rng.uniform(0.3, 2.5)
            b = rng.uniform(0.3, 2.5)
            c = rng.uniform(1.0, 4.0)
            z = rng.uniform(0.02, 0.9)
            h = 1e-5 * (1.0 - z)
            fd = (gauss_2f1(a, b, c, z + h) - gauss_2f1(a, b, c, z - h)) / (2.0 * h)
            analytic = (a * b / c) * gauss_2f1(a + 1, b + 1, c + 1, z)
            assert abs(fd - analytic) <= 1e-6 * max(1.0, abs(analytic))

    @pytest.mark.parametrize("a,b,c,z", [
        (1.0, 5.3, 4.1, 0.9),
        (2.0, 3.0, 4.0, 0.8),
        (0.7, 2.2, 3.0, 0.85),
        (1.0, 3.5, 4.5, 0.95),
    ])
    def test_euler_vs_direct(self, a, b, c, z):
        direct = series_2f1_raw(a, b, c, z).value
        euler = series_2f1_euler(a, b, c, z).value
        assert abs(direct - euler) <= 1e-10 * abs(direct)

    def test_term_counts_reported(self):
        ev = gauss_2f1_eval(1.0, 2.0, 3.0, 0.5)
        assert 0 < ev.terms <= DEFAULT_CONTROL.max_terms
        ev = confluent_1f1_eval(1.0, 2.0, 1.0)
        assert 0 < ev.terms <= DEFAULT_CONTROL.max_terms
        ev = lerch_phi_eval(0.5, 1.0)
        assert 0 < ev.terms <= DEFAULT_CONTROL.max_terms


class TestConfluent1F1:
    def test_at_zero(self):
        assert confluent_1f1(2.3, 4.5, 0.0) == 1.0

    def test_exponential_collapse(self):
        assert confluent_1f1(2.0, 2.0, 1.0) == pytest.approx(math.e, rel=1e-13)

    def test_expm1_closed_form(self):
        # 1F1(1; 2; z) = (e^z - 1)/z
        assert confluent_1f1(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-13)

    def test_domain_c(self):
        with pytest.raises(DomainError):
            confluent_1f1(1.0, 0.0, 0.5)

    def test_non_convergence(self):
        with pytest.raises(NonConvergenceError):
            confluent_1f1(1.0, 2.0, 30.0, SeriesControl(max_terms=4))


class TestLerchPhi:
    def test_at_zero(self):
        assert lerch_phi(0.0, 4.0) == 0.25

    def test_log_closed_form(self):
        # sum z^k/(k+1) = -log(1-z)/z
        assert lerch_phi(0.5, 1.0) == pytest.approx(2.0 * LN2, rel=1e-13)

    def test_unb_r1_connection(self):
        # p q^x Phi(q, x+1) equals the r=1 pmf; at (p=0.5, x=0) it is log 2
        p, x = 0.5, 0
        q = 1.0 - p
        val = p * q ** x * lerch_phi(q, x + 1.0)
        assert val == pytest.approx(LN2, rel=1e-12)

    @pytest.mark.parametrize("z,a", [(1.0, 1.0), (-1.2, 1.0), (0.5, 0.0)])
    def test_domain(self, z, a):
        with pytest.raises(DomainError):
            lerch_phi(z, a)


def _db_pattern(a, b, c, z):
    return ThetaArgs(a1=1.0, a2=1.0, b1=b, b2=b + 1.0, b3=a + 1.0,
                     c1=b + 1.0, d1=2.0, d2=c + 1.0, x1=z, x2=z)


class TestKampeTheta1:
    def test_at_zero_arguments(self):
        args = ThetaArgs(1.0, 1.0, 2.3, 3.3, 2.0, 3.3, 2.0, 5.0, 0.0, 0.0)
        assert kampe_theta1(args) == 1.0

    @pytest.mark.parametrize("a,b,c,z", [
        (1.0, 2.3, 4.0, 0.3),
        (1.0, 2.884, 4.0, 0.5),
    ])
    def test_b_derivative_vs_finite_difference(self, a, b, c, z):
        h = 1e-5
        fd = (gauss_2f1(a, b + h, c, z) - gauss_2f1(a, b - h, c, z)) / (2.0 * h)
        analytic = (z * a / c) * kampe_theta1(_db_pattern(a, b, c, z))
        assert abs(fd - analytic) <= 1e-6
        assert gauss_2f1_db(a, b, c, z) == pytest.approx(analytic, rel=1e-12)

    def test_invalid_args(self):
        with pytest.raises(DomainError):
            ThetaArgs(1.0, 1.0, 2.0, 3.0, 2.0, -1.0, 2.0, 5.0, 0.3, 0.3)
        with pytest.raises(DomainError):
            ThetaArgs(1.0, 1.0, 2.0, 3.0, 2.0, 3.0, 2.0, 5.0, 1.0, 0.3)

    def test_terms_reported(self):
        ev = kampe_theta1_eval(_db_pattern(1.0, 2.3, 4.0, 0.3))
        assert 0 < ev.terms <= DEFAULT_CONTROL.max_terms


class TestSeriesControl:
    def test_defaults(self):
        c = SeriesControl()
        assert c.rel_tol == 1e-14 and c.abs_tol == 1e-300 and c.max_terms == 100_000

    @given(st.floats(max_value=0.0, allow_nan=False))
    @settings(max_examples=20, deadline=None, derandomize=True)
    def test_rel_tol_must_be_positive(self, bad):
        with pytest.raises(DomainError):
            SeriesControl(rel_tol=bad)

    def test_max_terms_must_be_positive(self):
        with pytest.raises(DomainError):
            SeriesControl(max_terms=0)


class TestLogPochhammer:
    def test_base_cases(self):
        assert log_pochhammer(3.7, 0) == (0.0, 1)
        lm, s = log_pochhammer(2.0, 3)
        assert s == 1 and lm == pytest.approx(math.log(24.0), rel=1e-13)

    def test_negative_base_sign(self):
        lm, s = log_pochhammer(-2.5, 2)  # (-2.5)(-1.5) = 3.75
        assert s == 1 and lm == pytest.approx(math.log(3.75), rel=1e-13)
        lm, s = log_pochhammer(-2.5, 3)  # * (-0.5) -> negative
        assert s == -1

    def test_vanishing(self):
        lm, s = log_pochhammer(-2.0, 4)  # hits zero at k=2
        assert s == 0
