import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from kernhalf.errors import ApproximationError, InvalidArgumentError
from kernhalf.polyspace import (
    LogBudget,
    approx_sigmoid_chebyshev,
    b_bound_sigmoid,
    chebyshev_to_monomial,
    erf_taylor_coeffs,
    horner,
    pb_norm,
)
from kernhalf.transfer import TransferKind, Variant, eval_transfer

# natural log of 2 L^4 + exp(7 L ln(2L/eps) + 3), evaluated with mpmath at
# 60 digits on the exact binary values of the float inputs
LOG_B_REFERENCE = {
    (3.0, 0.1): 88.98123580666412,
    (3.0, 0.05): 103.53732659842296,
    (5.0, 0.1): 164.18095650958318,
    (3.0, 0.01): 137.33552275953906,
    (4.0, 0.2): 106.28862471519021,
}


def mp_sigmoid(L, a):
    return 1 / (1 + mpmath.exp(-4 * mpmath.mpf(L) * mpmath.mpf(a)))


class TestPbNorm:
    def test_examples(self):
        assert pb_norm([1.0]) == 1.0
        assert pb_norm([0.0, 1.0]) == 2.0
        assert pb_norm([0.5, 0.5, 0.5]) == 1.75
        assert pb_norm([]) == 0.0

    @given(st.lists(st.floats(min_value=-1e3, max_value=1e3), max_size=30), st.integers(0, 10))
    def test_zero_padding_invariant(self, beta, pad):
        assert pb_norm(beta + [0.0] * pad) == pb_norm(beta)


class TestSigmoidBudget:
    @pytest.mark.parametrize("key", sorted(LOG_B_REFERENCE))
    def test_reference_values(self, key):
        ref = LOG_B_REFERENCE[key]
        assert abs(b_bound_sigmoid(*key).log_b - ref) <= math.ulp(ref) / 2

    def test_eps_to_one_limit(self):
        limit = float(mpmath.log(162 + mpmath.exp(21 * mpmath.log(6) + 3)))
        assert b_bound_sigmoid(3.0, 1 - 1e-12).log_b == pytest.approx(limit, rel=1e-12)

    def test_decreasing_in_eps(self):
        assert b_bound_sigmoid(3, 0.01).log_b > b_bound_sigmoid(3, 0.1).log_b

    def test_below_regime_warns(self):
        with pytest.warns(UserWarning):
            budget = b_bound_sigmoid(2.0, 0.1)
        assert budget.below_regime

    def test_log_budget_value(self):
        assert LogBudget(2.0).value == pytest.approx(math.e**2)
        assert LogBudget(1000.0).value == math.inf
        assert LogBudget(88.98).admits(1e38)

    @pytest.mark.parametrize("L,eps", [(0, 0.1), (3, 0.0), (3, 1.0)])
    def test_invalid(self, L, eps):
        with pytest.raises(InvalidArgumentError):
            b_bound_sigmoid(L, eps)


def test_chebyshev_to_monomial_matches_numpy():
    c = np.random.default_rng(3).standard_normal(12)
    assert chebyshev_to_monomial(c) == pytest.approx(np.polynomial.chebyshev.cheb2poly(c), abs=1e-12)


class TestSigmoidApproximation:
    @pytest.mark.parametrize("L,eps", [(3, 0.05), (5, 0.1), (3, 0.01), (8, 0.05)])
    def test_error_and_budget(self, L, eps):
        p = approx_sigmoid_chebyshev(L, eps)
        assert p.sup_error <= eps
        assert p.log_pb_norm <= b_bound_sigmoid(L, eps).log_b

    def test_against_extended_precision_oracle(self):
        mpmath.mp.dps = 30
        p = approx_sigmoid_chebyshev(3, 0.05)
        grid = np.linspace(-1, 1, 2001)
        ref = np.array([float(mp_sigmoid(3, a)) for a in grid])
        assert np.max(np.abs(p(grid) - ref)) <= 0.05

    def test_lowest_degree(self):
        p = approx_sigmoid_chebyshev(3, 0.05)
        lower = approx_sigmoid_chebyshev(3, 0.05, max_degree=p.degree)
        assert lower.degree == p.degree
        with pytest.raises(ApproximationError):
            approx_sigmoid_chebyshev(3, 0.05, max_degree=p.degree - 2)

    def test_flat_target(self):
        p = approx_sigmoid_chebyshev(0, 0.05)
        assert p.beta == (0.5,) and p.sup_error == 0.0

    def test_odd_symmetry(self):
        p = approx_sigmoid_chebyshev(5, 0.01)
        assert all(abs(b) <= 1e-9 for b in p.beta[2::2])
        assert p.beta[0] == pytest.approx(0.5, abs=1e-9)

    def test_sup_error_is_measured_max(self):
        p = approx_sigmoid_chebyshev(4, 0.03, grid_size=5001)
        grid = np.linspace(-1, 1, 5001)
        kind = TransferKind(Variant.SIGMOID, 4)
        diff = np.abs(p(grid) - eval_transfer(kind, grid))
        assert np.max(diff) == p.sup_error

    def test_pb_norm_recomputes(self):
        p = approx_sigmoid_chebyshev(3, 0.05)
        assert p.pb_norm == pytest.approx(pb_norm(p.beta), rel=1e-9)

    def test_unreachable_accuracy(self):
        with pytest.raises(ApproximationError) as info:
            approx_sigmoid_chebyshev(12, 1e-6)
        assert info.value.best_error is not None

    def test_argument_checks(self):
        with pytest.raises(InvalidArgumentError):
            approx_sigmoid_chebyshev(3, 0.05, grid_size=100)
        with pytest.raises(InvalidArgumentError):
            approx_sigmoid_chebyshev(3, 1.5)


class TestErfTaylor:
    def test_linear_coefficient_at_unit_L(self):
        # erf(z) = 2/sqrt(pi) (z - z^3/3 + ...) with z = sqrt(pi) a: the a^1 term of
        # (1 + erf)/2 is (1/2)(2/sqrt(pi)) sqrt(pi) = 1
        p = erf_taylor_coeffs(1.0, 61)
        assert p.beta[1] == pytest.approx(1.0, rel=1e-15)
        assert p.beta[3] == pytest.approx(-math.pi / 3, rel=1e-15)

    def test_constant_term(self):
        for L in (0.5, 1, 3):
            assert erf_taylor_coeffs(L, 11).beta[0] == 0.5

    def test_coefficients_against_mpmath_series(self):
        mpmath.mp.dps = 40
        L = 1.7
        p = erf_taylor_coeffs(L, 21)
        z = mpmath.sqrt(mpmath.pi) * mpmath.mpf(L)
        for n in range(11):
            k = 2 * n + 1
            ref = (-1) ** n * z**k / (mpmath.sqrt(mpmath.pi) * mpmath.factorial(n) * k)
            assert p.beta[k] == pytest.approx(float(ref), rel=1e-13)
        assert not any(p.beta[2::2][1:])

    def test_norm_grows_with_L(self):
        assert erf_taylor_coeffs(3, 61).pb_norm > 1e6 * erf_taylor_coeffs(1, 61).pb_norm

    def test_small_L_converges(self):
        assert erf_taylor_coeffs(1, 39).sup_error < 1e-9

    def test_monotone_past_dominance(self):
        # terms shrink once n exceeds (sqrt(pi) L)^2, about 28.3 at L = 3
        errs = [erf_taylor_coeffs(3, d).sup_error for d in range(57, 81, 2)]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        errs = [erf_taylor_coeffs(1, d).sup_error for d in range(7, 41, 2)]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    def test_even_degree_rejected(self):
        with pytest.raises(InvalidArgumentError):
            erf_taylor_coeffs(1, 10)
        with pytest.raises(InvalidArgumentError):
            erf_taylor_coeffs(1, 81)


def test_horner():
    assert horner([1.0, 2.0, 3.0], 2.0) == 17.0
