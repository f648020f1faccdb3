import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from watsonlattice.odecheck import (
    J3_OPERATOR,
    PowerSeries,
    StencilUnstable,
    central_weights,
    default_step,
    i_residual_scale,
    i_series,
    j3_fd_residual,
    j_general_fd_residual,
    j_operator_coefficients,
    ode_residual_I,
    ode_residual_J3,
    ode_residual_J_general,
    operator_on_inverse,
    theta_apply,
    theta_power_via_stirling,
)


def test_theta_examples():
    const = PowerSeries.from_coefficients([3.0, 0.0, 0.0])
    assert theta_apply(const).coefficients == (0.0, 0.0, 0.0)
    w = PowerSeries.from_coefficients([0.0, 1.0])
    assert theta_apply(w).coefficients == (0.0, -2.0)
    ones = PowerSeries.from_coefficients([1, 1, 1])
    assert theta_apply(ones, 3).coefficients[2] == -64


@given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=12), st.integers(1, 5))
def test_theta_composition(coeffs, k):
    series = PowerSeries.from_coefficients(coeffs)
    step = series
    for _ in range(k):
        step = theta_apply(step)
    assert step == theta_apply(series, k)
    assert step.coefficients == tuple(c * (-2 * m) ** k for m, c in enumerate(coeffs))


def test_theta_rejects_zero_times():
    with pytest.raises(ValueError):
        theta_apply(PowerSeries.from_coefficients([1.0]), 0)


def test_times_w_tracks_validity():
    s = PowerSeries.from_coefficients([1.0, 2.0]).times_w()
    assert s.coefficients == (0.0, 1.0, 2.0)
    assert s.valid_order == 3


@pytest.mark.parametrize("d", range(1, 5))
@pytest.mark.parametrize("m", range(0, 6))
def test_stirling_form_of_theta(d, m):
    assert theta_power_via_stirling(d, -2 * m) == (-2 * m) ** d


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_i_equation_exact(d):
    assert ode_residual_I(d, 50, exact=True) == 0


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_i_equation_float(d):
    assert ode_residual_I(d, 50) < 1e-12 * i_residual_scale(d, 50)


def test_i_equation_zero_series_and_wrong_series():
    zero = PowerSeries.from_coefficients([0.0] * 20)
    from watsonlattice.odecheck import i_operator
    assert max(abs(c) for c in i_operator(zero, 2).coefficients) == 0
    # the d = 2 coefficients do not solve the d = 3 equation
    assert max(abs(c) for c in i_operator(i_series(2, 20, exact=True), 3).coefficients) > 0
    with pytest.raises(ValueError):
        ode_residual_I(2, 5)


def test_i_series_coefficients():
    s = i_series(1, 4, exact=True)
    assert s.coefficients == (1, Fraction(1, 4), Fraction(9, 64), Fraction(25, 256))


def test_central_weights():
    assert central_weights(1) == (Fraction(1, 12), Fraction(-2, 3), 0,
                                  Fraction(2, 3), Fraction(-1, 12))
    assert len(central_weights(2)) == 5
    assert len(central_weights(3)) == 7
    assert len(central_weights(5)) == len(central_weights(6)) == 9
    for k in range(1, 7):
        w = central_weights(k)
        half = len(w) // 2
        # exact on x**k, blind to lower powers
        assert sum(wj * (j - half) ** k for j, wj in enumerate(w)) == math.factorial(k)
        assert sum(wj * (j - half) ** (k - 1) for j, wj in enumerate(w)) == 0


def test_general_operator_reduces_to_d3():
    assert j_operator_coefficients(3) == J3_OPERATOR


def test_j3_examples():
    assert ode_residual_J3(2.0, 1e-3) < 1e-5
    assert ode_residual_J3(1.2, 1e-3) < 1e-4


def test_j3_fourth_order_scaling():
    # near eta = 1 truncation dominates rounding at both steps
    coarse = ode_residual_J3(1.1, 1e-2)
    fine = ode_residual_J3(1.1, 1e-3)
    assert 1e4 / 3 < coarse / fine < 3e4


@pytest.mark.parametrize("eta", [1.2, 2.0])
def test_general_matches_specialized_d3(eta):
    special = j3_fd_residual(eta, 1e-3)
    general = j_general_fd_residual(3, eta, 1e-3)
    assert abs(general.residual - special.residual) <= special.noise


def test_general_d2_below_noise():
    r = j_general_fd_residual(2, 2.0)
    assert r.residual < r.noise
    assert ode_residual_J_general(2, 2.0) == r.residual


@pytest.mark.parametrize("d", [4, 5, 6])
def test_general_higher_d_small_relative_residual(d):
    r = j_general_fd_residual(d, 2.0)
    assert r.residual < 1e-4 * r.scale


def test_stencil_unstable_is_reported():
    with pytest.raises(StencilUnstable):
        ode_residual_J_general(6, 2.0, 1e-3)


def test_fd_domain_checks():
    with pytest.raises(ValueError):
        ode_residual_J3(1.04, 1e-3)
    with pytest.raises(ValueError):
        ode_residual_J3(1.06, 2e-2)  # stencil would reach eta = 1
    with pytest.raises(ValueError):
        ode_residual_J_general(7, 2.0)
    assert default_step(6, 1.06) < 0.06 / 4


@pytest.mark.parametrize("d", range(1, 7))
def test_operator_on_inverse_eta(d):
    got, want = operator_on_inverse(d, 1.7)
    assert got == pytest.approx(want, rel=1e-12)
