import math

import pytest

from watsonlattice.lattice import Family, LatticeQuery, bcc_i, bcc_j, evaluate
from watsonlattice.oracle import (
    OracleResult,
    QuadratureConfig,
    QuadratureNotConverged,
    SingularInput,
    integrate_direct,
    integrate_mc,
    integrate_singular_I2,
)

I2_AT_ONE = math.gamma(0.25) ** 4 / (4 * math.pi**3)
SMALL_MC = QuadratureConfig(mc_samples=200_000, rng_seed=7)


def test_direct_closed_forms():
    r = integrate_direct(LatticeQuery("I", 1, 2.0))
    assert r.value == pytest.approx(1.07318200714936437505, abs=1e-9)
    assert r.method == "nested_adaptive" and r.seed is None
    r = integrate_direct(LatticeQuery("J", 1, 2.0))
    assert r.value == pytest.approx(1 / math.sqrt(3), abs=1e-9)
    assert abs(integrate_direct(LatticeQuery("I", 2, 1e6)).value - 1) < 1e-10


@pytest.mark.parametrize("family", ["I", "J", "Itilde"])
def test_direct_error_estimate_is_honest_at_d1(family):
    q = LatticeQuery(family, 1, 1.3)
    r = integrate_direct(q)
    assert r.error_estimate >= 0
    assert abs(r.value - evaluate(q).value) <= max(r.error_estimate, 1e-12)


def test_direct_rejects_singular_and_large_d():
    with pytest.raises(SingularInput):
        integrate_direct(LatticeQuery("I", 2, 1.0))
    with pytest.raises(ValueError):
        integrate_direct(LatticeQuery("I", 4, 2.0))
    with pytest.raises(ValueError):
        integrate_direct(LatticeQuery("I", 2.5, 2.0))


def test_direct_reports_exhausted_subdivisions():
    with pytest.raises(QuadratureNotConverged):
        integrate_direct(LatticeQuery("J", 1, 1.0001),
                         QuadratureConfig(abs_tolerance=1e-14, max_subdivisions=2))


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("eta", [1.2, 2.0])
def test_ferromagnet_and_antiferromagnet_integrands_agree(d, eta):
    ferro = integrate_direct(LatticeQuery("Gferro", d, eta))
    anti = integrate_direct(LatticeQuery("J", d, eta))
    assert abs(ferro.value - anti.value) <= ferro.error_estimate + anti.error_estimate + 1e-12


def test_singular_routine():
    r = integrate_singular_I2()
    assert abs(r.value - 1.3932) < 5e-5
    assert r.value == pytest.approx(I2_AT_ONE, abs=1e-10)
    assert abs(r.value - bcc_j(3, 1.0)) < 5e-5
    assert r.error_estimate < 1e-9


def test_mc_is_deterministic_across_workers():
    q = LatticeQuery("I", 3, 1.5)
    a = integrate_mc(q, SMALL_MC)
    b = integrate_mc(q, SMALL_MC, workers=3)
    assert (a.value, a.error_estimate) == (b.value, b.error_estimate)
    assert a.method == "monte_carlo" and a.seed == 7
    assert a.samples_or_evals == 200_000


def test_mc_seed_matters():
    q = LatticeQuery("I", 3, 1.5)
    other = QuadratureConfig(mc_samples=200_000, rng_seed=8)
    assert integrate_mc(q, SMALL_MC).value != integrate_mc(q, other).value


def test_mc_large_eta_is_one():
    r = integrate_mc(LatticeQuery("I", 6, 1e6), SMALL_MC)
    assert abs(r.value - 1) <= 4 * r.error_estimate + 1e-12


@pytest.mark.parametrize("family", [f.value for f in Family
                                    if f not in (Family.G_SC2,)])
def test_mc_and_nested_agree_at_d2(family):
    q = LatticeQuery(family, 2, 1.5)
    nested = integrate_direct(q)
    mc = integrate_mc(q, QuadratureConfig(mc_samples=1_000_000, rng_seed=3))
    assert abs(nested.value - mc.value) < 4 * mc.error_estimate


def test_mc_and_nested_agree_square_lattice():
    q = LatticeQuery("Gsc2", 2, 1.5)
    mc = integrate_mc(q, QuadratureConfig(mc_samples=1_000_000, rng_seed=3))
    assert abs(integrate_direct(q).value - mc.value) < 4 * mc.error_estimate


def test_mc_preconditions():
    with pytest.raises(ValueError):
        integrate_mc(LatticeQuery("I", 1, 2.0), SMALL_MC)
    with pytest.raises(SingularInput):
        integrate_mc(LatticeQuery("I", 3, 1.0), SMALL_MC)


@pytest.mark.parametrize("kwargs", [
    {"abs_tolerance": 0.0}, {"max_subdivisions": 0},
    {"mc_samples": 9_999}, {"rng_seed": -1}, {"rng_seed": 2**64},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        QuadratureConfig(**kwargs)


def test_result_shape():
    r = OracleResult(1.0, 0.0, "nested_adaptive", 10)
    assert r.seed is None
    assert bcc_i(2, 2.0) == pytest.approx(integrate_direct(LatticeQuery("I", 2, 2.0)).value,
                                          abs=1e-10)
