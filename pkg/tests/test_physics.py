from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from watsonlattice.hyperseries import DivergentSeries
from watsonlattice.lattice import bcc_i
from watsonlattice.physics import (
    SpinSystem,
    curie_temperature,
    fluctuation_P,
    ground_state,
    magnetization,
    neel_temperature,
    reduced_critical_temperature,
)

SPINS = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]
# k_B T_N / J for S = 5/2, d = 3, isotropic
NEEL_3D_S52 = 16.74796692440947


def exact_magnetization(S, P):
    S, P = Fraction(S), Fraction(P)
    n = int(2 * S) + 1
    a, b = (1 + P) ** n, P**n
    return ((S - P) * a + (S + 1 + P) * b) / (a - b)


half_spins = st.integers(1, 9).map(lambda k: k / 2)


def test_classical_limits():
    for S in SPINS:
        assert magnetization(S, 0.0) == S


@given(st.floats(0.0, 1e3))
def test_spin_half_closed_form(P):
    assert magnetization(0.5, P) == pytest.approx(0.5 / (1 + 2 * P), rel=1e-13)


@given(half_spins, st.floats(1e-6, 50.0))
def test_matches_exact_rational(S, P):
    assert magnetization(S, P) == pytest.approx(float(exact_magnetization(S, P)),
                                                rel=1e-12, abs=1e-15)


@given(half_spins, st.floats(0.0, 20.0), st.floats(1e-3, 5.0))
def test_bounded_and_decreasing(S, P, step):
    lo, hi = magnetization(S, P + step), magnetization(S, P)
    assert 0 < lo < hi <= S


@pytest.mark.parametrize("S", SPINS)
def test_large_deviation_law(S):
    # leading behaviour is S(S+1)/(3P)
    P = 1e4
    assert P * magnetization(S, P) == pytest.approx(S * (S + 1) / 3, rel=1e-3)


def test_magnetization_domain():
    with pytest.raises(ValueError):
        magnetization(0.7, 0.1)
    with pytest.raises(ValueError):
        magnetization(1.0, -0.1)


def test_spin_system_validation():
    for bad in ({"spin": 0.0, "dimension": 3}, {"spin": 1.0, "dimension": 0.5},
                {"spin": 1.0, "dimension": 3, "anisotropy": 0.9},
                {"spin": 1.0, "dimension": 3, "exchange": 0.0}):
        with pytest.raises(ValueError):
            SpinSystem(**bad)
    assert SpinSystem(1.5, 4).coordination == 16


def test_ground_state_3d():
    r = ground_state(SpinSystem(2.5, 3))
    assert r.p_s == pytest.approx((bcc_i(3, 1.0) - 1) / 2, rel=1e-12)
    assert r.relative == pytest.approx(r.magnetization / 2.5)
    assert 0.9 < r.relative < 1


def test_ground_state_approaches_classical():
    low = ground_state(SpinSystem(0.5, 4)).relative
    high = ground_state(SpinSystem(0.5, 12)).relative
    assert low < high < 1
    assert 1 - ground_state(SpinSystem(2.5, 30)).relative < 1e-9


def test_disordered_chain():
    with pytest.raises(DivergentSeries):
        fluctuation_P(SpinSystem(0.5, 1))


def test_neel_examples():
    t = neel_temperature(SpinSystem(2.5, 3))
    assert t.value == pytest.approx(NEEL_3D_S52, rel=1e-12)
    assert not t.zero
    assert neel_temperature(SpinSystem(2.5, 3, exchange=2.0)).energy == pytest.approx(
        2 * t.value)


@pytest.mark.parametrize("d", [2, 1.5, 1])
def test_no_order_at_or_below_two_dimensions(d):
    t = neel_temperature(SpinSystem(1.0, d))
    assert t.zero and t.value == 0.0
    assert reduced_critical_temperature(d, 1.0) == 0.0


def test_anisotropy_restores_order_in_two_dimensions():
    assert neel_temperature(SpinSystem(1.0, 2, anisotropy=1.01)).value > 0


def test_reduced_temperature_independent_of_spin():
    r = {neel_temperature(SpinSystem(S, 3.5)).reduced for S in SPINS}
    assert max(r) - min(r) < 1e-12


def test_vanishes_toward_two_dimensions():
    values = [reduced_critical_temperature(d, 1.0) for d in (2.1, 2.01, 2.001)]
    assert values[0] > values[1] > values[2] > 0
    assert values[2] < 0.01


def test_monotone_in_dimension():
    ds = [2.05 + 0.25 * k for k in range(32)]
    vals = [reduced_critical_temperature(d, 1.0) for d in ds]
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("d", [3, 4, 3.5])
def test_curie_equals_neel(d):
    system = SpinSystem(1.5, d, anisotropy=1.1)
    assert curie_temperature(system).value == pytest.approx(
        neel_temperature(system).value, rel=1e-12)


def test_high_dimension_doubling():
    ratio = reduced_critical_temperature(15, 1.0) / reduced_critical_temperature(14, 1.0)
    assert ratio == pytest.approx(2.0, rel=1e-4)
