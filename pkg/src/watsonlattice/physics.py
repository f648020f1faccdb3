"""Ground-state magnetization and ordering temperatures of the hyper-bcc
Heisenberg antiferromagnet in the random phase approximation.

Temperatures are reported in units of the exchange ``J`` with ``k_B = 1``.
Dimension may be any real ``d >= 1``; non-integer values go through the
continuous-dimension series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .hyperseries import DivergentSeries, SeriesControl
from .lattice import bcc_ferro_green, bcc_i_continuous, bcc_j, bcc_j_continuous


@dataclass(frozen=True)
class SpinSystem:
    spin: float
    dimension: float
    anisotropy: float = 1.0
    exchange: float = 1.0

    def __post_init__(self):
        if not float(2 * self.spin).is_integer() or self.spin < 0.5:
            raise ValueError(f"spin must be a positive half-integer, got {self.spin}")
        if not self.dimension >= 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if not self.anisotropy >= 1:
            raise ValueError(f"anisotropy must be >= 1, got {self.anisotropy}")
        if not self.exchange > 0:
            raise ValueError("exchange must be positive")

    @property
    def coordination(self) -> float:
        """Nearest neighbours on the hyper-bcc lattice, ``2**d``."""
        return 2.0 ** self.dimension


@dataclass(frozen=True)
class MagnetizationResult:
    p_s: float
    magnetization: float
    relative: float


@dataclass(frozen=True)
class CriticalTemperature:
    """Ordering temperature, or a zero when long-range order is absent.

    ``zero`` marks the isotropic ``d <= 2`` case where the Green-function
    integral diverges; ``value`` is then exactly 0.
    """

    value: float
    reduced: float
    zero: bool
    energy: float


def fluctuation_P(system: SpinSystem, control: SeriesControl | None = None) -> float:
    """Zero-point spin deviation ``(I(d, eta) - 1) / 2``.

    Raises
    ------
    DivergentSeries
        For ``d <= 1`` at ``eta = 1``, the disordered isotropic chain.
    """
    value = bcc_i_continuous(system.dimension, system.anisotropy, control).value
    return max(0.0, 0.5 * (value - 1.0))


def magnetization(S: float, P: float) -> float:
    """Sublattice magnetization for spin ``S`` and spin deviation ``P``.

    ``[(S-P)(1+P)**n + (S+1+P) P**n] / [(1+P)**n - P**n]`` with
    ``n = 2S + 1``.  For ``P > 1`` both brackets nearly cancel, so the ratio
    is rewritten as polynomials in ``x = 1/(1+P)`` whose leading terms
    cancel analytically.
    """
    if not float(2 * S).is_integer() or S < 0.5:
        raise ValueError(f"S must be a positive half-integer, got {S}")
    if not P >= 0:
        raise ValueError(f"P must be nonnegative, got {P}")
    n = int(round(2 * S)) + 1
    if P == 0:
        return float(S)
    if P <= 1:
        a, b = (1 + P) ** n, P ** n
        return ((S - P) * a + (S + 1 + P) * b) / (a - b)
    x = 1.0 / (1.0 + P)
    num = math.fsum((-1) ** j * (math.comb(n, j + 2) - S * math.comb(n, j + 1)) * x ** j
                    for j in range(1, n))
    den = math.fsum(math.comb(n, k) * (-1) ** (k + 1) * x ** (k - 1)
                    for k in range(1, n + 1))
    return num / den


def ground_state(system: SpinSystem,
                 control: SeriesControl | None = None) -> MagnetizationResult:
    p = fluctuation_P(system, control)
    m = magnetization(system.spin, p)
    return MagnetizationResult(p, m, m / system.spin)


def j_integral(d: float, eta: float, control: SeriesControl | None = None) -> float:
    """``J(d, eta)``; integer ``d`` uses the integer-dimension series."""
    if float(d).is_integer():
        return bcc_j(int(d), eta, control)
    return bcc_j_continuous(d, eta, control).value


def reduced_critical_temperature(d: float, eta: float,
                                 control: SeriesControl | None = None) -> float:
    """``3 T_N / (J S (S+1)) = 2**d / J(d, eta)``; 0 where ``J`` diverges."""
    try:
        return 2.0 ** d / j_integral(d, eta, control)
    except DivergentSeries:
        return 0.0


def _critical(system: SpinSystem, green: float | None) -> CriticalTemperature:
    s = system.spin
    if green is None:
        return CriticalTemperature(0.0, 0.0, True, 0.0)
    reduced = system.coordination / green
    value = s * (s + 1) / 3 * reduced
    return CriticalTemperature(value, reduced, False, value * system.exchange)


def neel_temperature(system: SpinSystem,
                     control: SeriesControl | None = None) -> CriticalTemperature:
    """``k_B T_N / J = S(S+1)/3 * 2**d / J(d, eta)``.

    A divergent ``J`` (isotropic ``d <= 2``) gives a zero temperature
    flagged by ``zero=True``, not an exception.
    """
    try:
        green = j_integral(system.dimension, system.anisotropy, control)
    except DivergentSeries:
        green = None
    return _critical(system, green)


def curie_temperature(system: SpinSystem,
                      control: SeriesControl | None = None) -> CriticalTemperature:
    """Ferromagnetic ordering temperature through the ferromagnet Green function.

    Integer ``d`` evaluates ``G(d, eta)`` on its own entry point; real
    ``d`` falls back to the continuous ``J(d, eta)``, which it equals.
    """
    d, eta = system.dimension, system.anisotropy
    try:
        if float(d).is_integer():
            green = bcc_ferro_green(int(d), eta, control)
        else:
            green = bcc_j_continuous(d, eta, control).value
    except DivergentSeries:
        green = None
    return _critical(system, green)
