"""Invariant suites run by ``watsonlattice verify``.

Each check yields a :class:`Check` carrying the measured residual and the
tolerance it is judged against.  Reports contain no timings, so a given
seed always produces the same text.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

from scipy import integrate

from . import odecheck
from .hyperseries import SeriesControl
from .lattice import (
    Family,
    LatticeQuery,
    bcc_i,
    bcc_i_tilde,
    bcc_j,
    bcc_j_continuous,
    bcc_j_tilde,
    bcc_i_continuous,
    cosine_power_average,
    evaluate,
    maradudin_sc,
    sc_summation_check,
)
from .oracle import QuadratureConfig, integrate_direct, integrate_mc, integrate_singular_I2
from .special import elliptic_E, elliptic_K

SUITES = ("identities", "oracle", "ode", "appendix")
I2_AT_ONE = math.gamma(0.25) ** 4 / (4 * math.pi**3)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} [{self.suite}] {self.name}: "
                f"residual={self.residual:.3e} tol={self.tolerance:.1e}")


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def identities() -> Iterator[Check]:
    s = "identities"
    for d in (1, 2, 3, 4):
        for eta in (1.005, 1.1, 2.0, 10.0):
            yield Check(s, f"connection I_d = eta*J_(d+1) d={d} eta={eta}",
                        _rel(bcc_i(d, eta), eta * bcc_j(d + 1, eta)), 1e-12)
    for d in (2, 3, 4):
        yield Check(s, f"connection I_d = J_(d+1) d={d} eta=1",
                    _rel(bcc_i(d, 1.0), bcc_j(d + 1, 1.0)), 1e-12)
    for d in (1, 2, 3):
        for eta in (1.1, 1.5, 2.0):
            diff = abs(bcc_j_tilde(d, eta, "difference") - bcc_j_tilde(d, eta, "shifted"))
            yield Check(s, f"Jtilde difference vs shifted form d={d} eta={eta}", diff, 1e-10)
    h = 1e-5
    for d in (1, 2, 3):
        for eta in (1.2, 2.0):
            slope = (bcc_i_tilde(d, eta + h) - bcc_i_tilde(d, eta - h)) / (2 * h)
            yield Check(s, f"dItilde/deta = I d={d} eta={eta}",
                        abs(slope - bcc_i(d, eta)), 1e-8)
    for eta in (1.1, 2.0, 5.0):
        k = 1 / eta
        yield Check(s, f"I_1 = (2/pi) K(1/eta) eta={eta}",
                    _rel(bcc_i(1, eta), 2 / math.pi * elliptic_K(k)), 1e-12)
        yield Check(s, f"Itilde_1 = (2 eta/pi) E(1/eta) eta={eta}",
                    _rel(bcc_i_tilde(1, eta), 2 * eta / math.pi * elliptic_E(k)), 1e-12)
        yield Check(s, f"J_1 = 1/(eta sqrt(1 - 1/eta^2)) eta={eta}",
                    _rel(bcc_j(1, eta), 1 / (eta * math.sqrt(1 - k * k))), 1e-12)
    yield Check(s, "I_2(1) = Gamma(1/4)^4/(4 pi^3)", _rel(bcc_i(2, 1.0), I2_AT_ONE), 1e-12)
    yield Check(s, "I(25,1) - 1 < 1e-7", bcc_i_continuous(25, 1.0).value - 1, 1e-7)
    yield Check(s, "continuous J(3,1.5) = J_3(1.5)",
                _rel(bcc_j_continuous(3.0, 1.5).value, bcc_j(3, 1.5)), 1e-12)


ORACLE_FAMILIES = (Family.I_BCC, Family.ITILDE_BCC, Family.JTILDE_BCC, Family.J_BCC,
                   Family.G_BCC_FERRO, Family.MARADUDIN_SQRT, Family.MARADUDIN_SQ)


def oracle(seed: int = 42, mc_samples: int = 10_000_000,
           workers: int = 1) -> Iterator[Check]:
    s = "oracle"
    config = QuadratureConfig()
    for fam in ORACLE_FAMILIES:
        for d in (1, 2, 3):
            for eta in (1.1, 2.0):
                q = LatticeQuery(fam, d, eta)
                ref = integrate_direct(q, config)
                yield Check(s, f"{fam.value} d={d} eta={eta} vs nested quadrature",
                            abs(evaluate(q).value - ref.value), 1e-6)
    for eta in (1.1, 2.0):
        q = LatticeQuery(Family.G_SC2, 2, eta)
        yield Check(s, f"Gsc2 eta={eta} vs nested quadrature",
                    abs(evaluate(q).value - integrate_direct(q, config).value), 1e-6)
    mc = QuadratureConfig(mc_samples=mc_samples, rng_seed=seed)
    for fam in ORACLE_FAMILIES:
        for d in (4, 5):
            q = LatticeQuery(fam, d, 2.0)
            ref = integrate_mc(q, mc, workers)
            sigmas = abs(evaluate(q).value - ref.value) / ref.error_estimate
            yield Check(s, f"{fam.value} d={d} eta=2 vs Monte Carlo (sigmas)", sigmas, 4.0)
    singular = integrate_singular_I2()
    yield Check(s, "singular quadrature I_2(1) vs series",
                abs(singular.value - bcc_i(2, 1.0)), 5e-5)
    yield Check(s, "singular quadrature I_2(1) vs Gamma(1/4)^4/(4 pi^3)",
                abs(singular.value - I2_AT_ONE), 5e-5)


def ode() -> Iterator[Check]:
    s = "ode"
    for d in (1, 2, 3, 4):
        yield Check(s, f"I_d coefficient residual exact d={d}",
                    float(odecheck.ode_residual_I(d, 50, exact=True)), 0.0)
        scale = odecheck.i_residual_scale(d, 50)
        yield Check(s, f"I_d coefficient residual float d={d} (relative)",
                    odecheck.ode_residual_I(d, 50) / scale, 1e-12)
    for eta in (1.2, 2.0):
        yield Check(s, f"J_3 equation eta={eta} h=1e-3",
                    odecheck.ode_residual_J3(eta, 1e-3), 1e-4)
    for eta in (1.2, 2.0):
        special = odecheck.j3_fd_residual(eta, 1e-3)
        general = odecheck.j_general_fd_residual(3, eta, 1e-3)
        yield Check(s, f"general operator d=3 vs J_3 equation eta={eta}",
                    abs(general.residual - special.residual), max(special.noise, 1e-12))
    coeffs = odecheck.j_operator_coefficients(3)
    yield Check(s, "general operator d=3 coefficients equal J_3 operator",
                float(coeffs != odecheck.J3_OPERATOR), 0.0)
    general = odecheck.j_general_fd_residual(2, 2.0)
    yield Check(s, "general operator d=2 eta=2 below stencil noise",
                general.residual, general.noise)
    for d in (2, 3, 4, 5, 6):
        got, want = odecheck.operator_on_inverse(d, 1.7)
        yield Check(s, f"general operator on 1/eta d={d}", abs(got - want), 1e-12)


def _a4_quadrature(k: int, eta: float) -> float:
    value, _ = integrate.quad(lambda x: (1 - math.cos(x) / eta) ** (-k), 0, math.pi,
                              epsabs=1e-13, epsrel=1e-13)
    return value / math.pi


def appendix() -> Iterator[Check]:
    s = "appendix"
    for eta, tol in ((2.0, 1e-10), (1.1, 1e-8)):
        _, _, diff = sc_summation_check(eta)
        yield Check(s, f"summation formula eta={eta}", diff, tol)
    for k in (1, 2, 3):
        for eta in (1.5, 2.0):
            yield Check(s, f"cosine power average k={k} eta={eta} vs quadrature",
                        abs(cosine_power_average(k, eta) - _a4_quadrature(k, eta)), 1e-8)
    for form, fam in (("sqrt", Family.MARADUDIN_SQRT), ("sq", Family.MARADUDIN_SQ)):
        for d in (1, 2):
            for eta in (1.5, 2.0):
                ref = integrate_direct(LatticeQuery(fam, d, eta)).value
                yield Check(s, f"damped double integral {form} d={d} eta={eta}",
                            abs(maradudin_sc(d, eta, form) - ref), 1e-5)


def run(suite: str, seed: int = 42, mc_samples: int = 10_000_000,
        workers: int = 1) -> list[Check]:
    runners: dict[str, Callable[[], Iterator[Check]]] = {
        "identities": identities,
        "oracle": lambda: oracle(seed, mc_samples, workers),
        "ode": ode,
        "appendix": appendix,
    }
    names = SUITES if suite == "all" else (suite,)
    if any(n not in runners for n in names):
        raise ValueError(f"unknown suite {suite!r}")
    return [check for n in names for check in runners[n]()]
