from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracac import cq


def falling_factorial_weight(mu: float, j: int) -> float:
    """(-1)^j binom(mu, j) from the product formula, as an independent oracle."""
    value = 1.0
    for i in range(j):
        value *= (mu - i) / (i + 1)
    return (-1) ** j * value


def brute_force_derivative(u, alpha, tau, n):
    total = 0.0
    for j in range(1, n + 1):
        total += falling_factorial_weight(alpha, n - j) * (u[j] - u[0])
    return total * tau ** (-alpha)


# {{{ weights


def test_weights_first_entries():
    w = cq.cq_weights(0.5, 0, 4)
    assert w.weights[0] == 1.0
    assert w.weights[1] == -0.5
    assert w.weights[2] == pytest.approx(-0.125, abs=1e-16)
    assert w.n_max == 4 and len(w) == 5


@pytest.mark.parametrize("alpha", [0.1, 0.37, 0.5, 0.9])
@pytest.mark.parametrize("shift", [0, -1])
def test_weights_match_binomial_product(alpha, shift):
    w = cq.cq_weights(alpha, shift, 50).weights
    for j in range(51):
        ref = falling_factorial_weight(alpha + shift, j)
        assert w[j] == pytest.approx(ref, rel=1e-14, abs=0.0)


def test_weights_alpha_minus_one_bound():
    w = cq.cq_weights(0.6, -1, 1000).weights
    n = np.arange(w.size)
    assert np.all(w > 0)
    # the bound is attained at n = 0 and strict afterwards
    assert w[0] == 1.0
    assert np.all(w[1:] < (n[1:] + 1.0) ** -0.6)


def test_weights_readonly():
    w = cq.cq_weights(0.5, 0, 3)
    with pytest.raises(ValueError):
        w.weights[0] = 2.0


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_weight_signs_and_partial_sums(alpha):
    w = cq.cq_weights(alpha, 0, 10_000)
    assert w.weights[0] == 1.0
    assert np.all(w.weights[1:] < 0)

    s = w.partial_sums()
    assert np.all(s > 0)
    assert np.all(np.diff(s) < 0)

    n = np.arange(100, 10_001)
    slope = np.polyfit(np.log(n), np.log(s[n]), 1)[0]
    assert abs(slope + alpha) < 0.05


def test_partial_sums_equal_shifted_weights():
    # sum_{j<=n} w^(alpha)_j = w^(alpha-1)_n, a generating-function identity
    alpha = 0.3
    s = cq.cq_weights(alpha, 0, 200).partial_sums()
    w1 = cq.cq_weights(alpha, -1, 200).weights
    np.testing.assert_allclose(s, w1, rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, -0.2, 1.5, math.nan])
def test_weights_reject_alpha(alpha):
    with pytest.raises(ValueError):
        cq.cq_weights(alpha, 0, 3)


def test_weights_reject_bad_arguments():
    with pytest.raises(ValueError):
        cq.cq_weights(0.5, 0, 0)
    with pytest.raises(ValueError):
        cq.cq_weights(0.5, 1, 3)


# }}}


# {{{ derivative and extrapolation


def test_derivative_of_constant_is_zero():
    w = cq.cq_weights(0.4, 0, 10)
    assert cq.frac_derivative([3.0] * 11, w, 0.1, 10) == 0.0


def test_derivative_single_step():
    w = cq.cq_weights(0.5, 0, 1)
    delta = 0.3
    value = cq.frac_derivative([0.0, delta], w, 0.5, 1)
    assert value == pytest.approx(delta * 0.5**-0.5, rel=1e-15)
    assert value / delta == pytest.approx(1.41421356, rel=1e-8)


def test_derivative_matches_brute_force():
    rng = np.random.default_rng(7)
    u = rng.standard_normal(16)
    alpha, tau = 0.65, 0.05
    w = cq.cq_weights(alpha, 0, 15)
    for n in range(1, 16):
        ref = brute_force_derivative(u, alpha, tau, n)
        assert cq.frac_derivative(u, w, tau, n) == pytest.approx(ref, rel=1e-13)


def test_derivative_on_fields():
    rng = np.random.default_rng(1)
    hist = rng.standard_normal((6, 4, 3))
    w = cq.cq_weights(0.3, 0, 5)
    d = cq.frac_derivative(hist, w, 0.2, 5)
    assert d.shape == (4, 3)
    ref = brute_force_derivative(hist[:, 2, 1], 0.3, 0.2, 5)
    assert d[2, 1] == pytest.approx(ref, rel=1e-13)


def test_derivative_near_integer_order():
    # alpha -> 1 reduces to the backward difference quotient
    alpha = 1.0 - 1e-12
    tau = 0.01
    t = tau * np.arange(51)
    u = np.sin(t) + t**2
    w = cq.cq_weights(alpha, 0, 50)
    for n in range(5, 51, 5):
        ref = (u[n] - u[n - 1]) / tau
        assert cq.frac_derivative(u, w, tau, n) == pytest.approx(ref, rel=1e-6)


def test_derivative_errors():
    w = cq.cq_weights(0.5, 0, 4)
    with pytest.raises(ValueError):
        cq.frac_derivative([0.0, 1.0], w, 0.1, 0)
    with pytest.raises(ValueError):
        cq.frac_derivative([0.0] * 10, w, 0.1, 7)
    with pytest.raises(ValueError):
        cq.frac_derivative([0.0, 1.0], w, 0.1, 2)
    with pytest.raises(ValueError):
        cq.frac_derivative([np.zeros(2), np.zeros(3)], w, 0.1, 1)
    with pytest.raises(ValueError):
        cq.frac_derivative([0.0, 1.0], w, -0.1, 1)
    with pytest.raises(ValueError):
        cq.frac_derivative([0.0, 1.0], cq.cq_weights(0.5, -1, 4), 0.1, 1)


def test_extrapolation_coefficients_small_n():
    w = cq.cq_weights(0.5, 0, 4)
    np.testing.assert_array_equal(cq.extrapolation_coefficients(w, 1), [1.0])
    np.testing.assert_array_equal(cq.extrapolation_coefficients(w, 2), [0.5, 0.5])
    with pytest.raises(ValueError):
        cq.extrapolation_coefficients(w, 0)


def test_extrapolation_coefficients_convex():
    w = cq.cq_weights(0.8, 0, 100)
    c = cq.extrapolation_coefficients(w, 100)
    assert np.all(c >= 0)
    assert abs(math.fsum(c) - 1.0) <= 1e-14


def test_extrapolation_values():
    w = cq.cq_weights(0.5, 0, 4)
    assert cq.frac_extrapolation([0.0, 1.0], w, 2) == 0.5
    assert cq.frac_extrapolation([2.5, 2.5, 2.5], w, 3) == pytest.approx(2.5, rel=1e-15)
    with pytest.raises(ValueError):
        cq.frac_extrapolation([0.0], w, 2)


def test_extrapolation_bounded_by_history():
    rng = np.random.default_rng(11)
    for _ in range(50):
        alpha = rng.uniform(0.05, 0.95)
        n = int(rng.integers(1, 257))
        u = rng.uniform(-1, 1, size=n)
        w = cq.cq_weights(alpha, 0, n)
        assert abs(cq.frac_extrapolation(u, w, n)) <= 1.0


@settings(max_examples=200, deadline=None)
@given(
    alpha=st.floats(0.01, 0.99),
    tau=st.floats(1e-4, 1.0),
    u=st.lists(st.floats(-10, 10), min_size=2, max_size=40),
)
def test_extrapolation_identity(alpha, tau, u):
    n = len(u) - 1
    w = cq.cq_weights(alpha, 0, n)
    lhs = u[n] - cq.frac_extrapolation(u, w, n)
    rhs = tau**alpha * cq.frac_derivative(u, w, tau, n)
    assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13 * (1 + max(map(abs, u))))


def test_weighted_sum_is_serial():
    rng = np.random.default_rng(3)
    c = rng.standard_normal(40)
    rows = rng.standard_normal((40, 5, 7))
    out = cq.weighted_sum(c, rows)

    ref = c[0] * rows[0]
    for j in range(1, 40):
        ref = ref + c[j] * rows[j]
    np.testing.assert_array_equal(out, ref)


# }}}


# {{{ positivity


def test_positivity_constant_sequence():
    w, w1 = cq.cq_weights(0.5, 0, 10), cq.cq_weights(0.5, -1, 10)
    assert cq.cq_positivity_functional([1.0] * 11, w, w1, 0.1) == 0.0


def test_positivity_matches_definition():
    rng = np.random.default_rng(5)
    alpha, tau, N = 0.45, 0.1, 12
    u = rng.standard_normal(N + 1)
    w, w1 = cq.cq_weights(alpha, 0, N), cq.cq_weights(alpha, -1, N)

    ref = sum(
        cq.frac_derivative(u, w, tau, n) * (u[n] - u[n - 1]) / tau
        for n in range(1, N + 1)
    )
    assert cq.cq_positivity_functional(u, w, w1, tau) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
def test_positivity_linear_ramp(alpha):
    tau, N = 0.05, 20
    u = tau * np.arange(N + 1)
    w, w1 = cq.cq_weights(alpha, 0, N), cq.cq_weights(alpha, -1, N)
    assert cq.cq_positivity_functional(u, w, w1, tau) > 0


def test_positivity_fields_use_cell_volume():
    rng = np.random.default_rng(2)
    seq = rng.standard_normal((5, 3, 3))
    w, w1 = cq.cq_weights(0.5, 0, 4), cq.cq_weights(0.5, -1, 4)
    a = cq.cq_positivity_functional(seq, w, w1, 0.1, cell_volume=1.0)
    b = cq.cq_positivity_functional(seq, w, w1, 0.1, cell_volume=0.25)
    assert b == pytest.approx(0.25 * a, rel=1e-14)


@settings(max_examples=300, deadline=None)
@given(
    alpha=st.floats(0.05, 0.95),
    tau=st.floats(1e-3, 1.0),
    u=st.lists(st.floats(-1, 1), min_size=2, max_size=64),
)
def test_positivity_nonnegative(alpha, tau, u):
    N = len(u) - 1
    w, w1 = cq.cq_weights(alpha, 0, N), cq.cq_weights(alpha, -1, N)
    value = cq.cq_positivity_functional(u, w, w1, tau)
    assert value >= -1e-12 * max(1.0, max(abs(x) for x in u)) ** 2


def test_positivity_errors():
    w, w1 = cq.cq_weights(0.5, 0, 4), cq.cq_weights(0.5, -1, 4)
    with pytest.raises(ValueError):
        cq.cq_positivity_functional([1.0], w, w1, 0.1)
    with pytest.raises(ValueError):
        cq.cq_positivity_functional([0.0, 1.0], w, w, 0.1)
    with pytest.raises(ValueError):
        cq.cq_positivity_functional([0.0, 1.0], w, cq.cq_weights(0.6, -1, 4), 0.1)


# }}}
