"""Checks that the lattice integrals satisfy their differential equations.

The ``I_d`` equation is checked exactly on power-series coefficients in
``w = 1/eta**2``, where the Euler operator ``theta = eta d/deta`` is
diagonal.  The ``J_d`` equations mix powers of ``eta`` with ordinary
derivatives, so they are checked numerically with central finite
differences of the series values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import sys

from .hyperseries import SeriesControl
from .lattice import bcc_j
from .special import binomial, stirling2

# J_d series summed to rounding so the stencil only sees float noise
_FD_CONTROL = SeriesControl(tol=1e-16)
_FD_ACCURACY = 4


class StencilUnstable(ArithmeticError):
    """Finite-difference noise swamps the quantity being checked."""


@dataclass(frozen=True)
class PowerSeries:
    """Truncated series ``sum_m c_m w**m`` with ``w = 1/eta**2``.

    ``valid_order`` is the number of leading coefficients that are exact
    after the operations applied so far; multiplying by ``w`` shifts the
    coefficients up and keeps the same number of valid ones.
    """

    coefficients: tuple
    valid_order: int

    @classmethod
    def from_coefficients(cls, coefficients: Sequence) -> "PowerSeries":
        return cls(tuple(coefficients), len(coefficients))

    def __len__(self) -> int:
        return len(self.coefficients)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = max(len(self), len(other))
        a = self.coefficients + (0,) * (n - len(self))
        b = other.coefficients + (0,) * (n - len(other))
        return PowerSeries(tuple(x - y for x, y in zip(a, b)),
                           min(self.valid_order, other.valid_order))

    def times_w(self) -> "PowerSeries":
        zero = self.coefficients[0] * 0 if self.coefficients else 0
        return PowerSeries((zero,) + self.coefficients, self.valid_order + 1)

    def shifted_theta(self, shift: int, times: int = 1) -> "PowerSeries":
        """Apply ``(theta - shift)**times``; ``w**m`` picks up ``(-2m - shift)**times``."""
        return PowerSeries(tuple(c * (-2 * m - shift) ** times
                                 for m, c in enumerate(self.coefficients)),
                           self.valid_order)


def theta_apply(series: PowerSeries, times: int = 1) -> PowerSeries:
    """Apply ``theta = eta d/deta`` ``times`` times; exact coefficient-wise."""
    if times < 1:
        raise ValueError("times must be at least 1")
    return series.shifted_theta(0, times)


def theta_power_via_stirling(d: int, exponent: int) -> int:
    """Multiplier of ``eta**exponent`` under ``sum_a S(d,a) eta**a (d/deta)**a``.

    Equals ``exponent**d`` when the Stirling expansion of ``theta**d`` holds.
    """
    total = 0
    for alpha in range(d + 1):
        falling = math.prod(exponent - j for j in range(alpha))
        total += stirling2(d, alpha) * falling
    return total


def i_series(d: int, M: int, exact: bool = False) -> PowerSeries:
    """First ``M`` coefficients ``((1/2)_m / m!)**(d+1)`` of ``I_d``."""
    one = Fraction(1) if exact else 1.0
    base, coeffs = one, []
    for m in range(M):
        if m:
            base = base * (m - one / 2) / m
        coeffs.append(base ** (d + 1))
    return PowerSeries.from_coefficients(coeffs)


def i_operator(series: PowerSeries, d: int) -> PowerSeries:
    """``[theta**(d+1) - w (theta - 1)**(d+1)]`` applied coefficient-wise."""
    head = theta_apply(series, d + 1)
    tail = series.shifted_theta(1, d + 1).times_w()
    diff = head - tail
    return PowerSeries(diff.coefficients[:len(series)], len(series))


def ode_residual_I(d: int, M: int, exact: bool = False):
    """Largest residual coefficient of the ``I_d`` equation over orders ``< M``.

    Float coefficients give a residual at rounding level; ``exact=True``
    uses rationals and returns an exact zero when the equation holds.
    """
    if d < 1:
        raise ValueError("d must be positive")
    if M < 10:
        raise ValueError("M must be at least 10")
    residual = i_operator(i_series(d, M, exact), d)
    return max(abs(c) for c in residual.coefficients)


def i_residual_scale(d: int, M: int) -> float:
    """Size of the individual operator terms, ``max_m |c_m (2m)**(d+1)|``."""
    return max(abs(c) * (2 * m) ** (d + 1)
               for m, c in enumerate(i_series(d, M).coefficients))


# ---------------------------------------------------------------------------
# J_d equations: operators sum_k p_k(eta) (d/deta)**k with Laurent p_k


@lru_cache(maxsize=None)
def j_operator_coefficients(d: int) -> tuple[dict[int, int], ...]:
    """Derivative coefficients of the general ``J_d`` operator.

    Entry ``k`` maps powers of ``eta`` to integer coefficients of
    ``(d/deta)**k``.  Assembled from the Stirling expansion of
    ``theta**d`` and the binomial expansion of ``(theta - 1)**d``, with
    the product rule applied to ``eta J_d``.
    """
    if not 1 <= d <= 6:
        raise ValueError("operator assembly supports 1 <= d <= 6")
    coeffs: list[dict[int, int]] = [dict() for _ in range(d + 1)]

    def add(order: int, power: int, value: int) -> None:
        if value:
            slot = coeffs[order]
            slot[power] = slot.get(power, 0) + value
            if slot[power] == 0:
                del slot[power]

    for alpha in range(d + 1):
        s = stirling2(d, alpha)
        add(alpha, alpha + 1, s)                    # eta theta**d
        if alpha:
            add(alpha - 1, alpha, s * alpha)        # product-rule remainder
    for k in range(d + 1):
        sign_binom = binomial(d, k) * (-1) ** (d - k)
        for alpha in range(k + 1):
            s = sign_binom * stirling2(k, alpha)
            add(alpha, alpha - 1, -s)               # -(1/eta)(theta - 1)**d
            if alpha:
                add(alpha - 1, alpha - 2, -s * alpha)
    return tuple(coeffs)


# eta**2 (eta**2 - 1) D3 + 3 eta (2 eta**2 - 1) D2 + (7 eta**2 - 1) D + eta
J3_OPERATOR = ({1: 1}, {2: 7, 0: -1}, {3: 6, 1: -3}, {4: 1, 2: -1})


def _laurent(poly: dict[int, int], eta: float) -> float:
    return math.fsum(c * eta ** p for p, c in poly.items())


@lru_cache(maxsize=None)
def central_weights(order: int, accuracy: int = _FD_ACCURACY) -> tuple[Fraction, ...]:
    """Central-difference weights for ``(d/dx)**order`` on an integer grid.

    Exact rationals from the moment conditions; the stencil has
    ``2 floor((order+1)/2) - 1 + accuracy`` points.
    """
    if order < 1:
        raise ValueError("order must be positive")
    n = 2 * ((order + 1) // 2) - 1 + accuracy
    half = n // 2
    offsets = list(range(-half, half + 1))
    # solve sum_j w_j x_j**i = i! [i == order] exactly
    size = len(offsets)
    rows = [[Fraction(x) ** i for x in offsets] + [Fraction(math.factorial(order) if i == order else 0)]
            for i in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return tuple(rows[i][-1] / rows[i][i] for i in range(size))


@dataclass(frozen=True)
class FDResidual:
    """Finite-difference residual of an operator applied to ``J_d``.

    ``scale`` is the largest single operator term and ``noise`` the
    rounding error propagated through the stencils.
    """

    residual: float
    scale: float
    noise: float


def _apply_fd(operator: Sequence[dict[int, int]], d: int, eta: float, h: float,
              relative_noise: float = 4 * sys.float_info.epsilon) -> FDResidual:
    if not eta > 1.05:
        raise ValueError("finite-difference checks need eta > 1.05")
    max_order = len(operator) - 1
    half = max((len(central_weights(k)) // 2 for k in range(1, max_order + 1)), default=0)
    if eta - half * h <= 1.0:
        raise ValueError("stencil reaches the singular point eta = 1; reduce h")
    values = {j: bcc_j(d, eta + j * h, _FD_CONTROL) for j in range(-half, half + 1)}
    terms, noise = [], 0.0
    for k, poly in enumerate(operator):
        p = _laurent(poly, eta)
        if k == 0:
            deriv, spread = values[0], 1.0
        else:
            w = central_weights(k)
            c = len(w) // 2
            deriv = math.fsum(float(wj) * values[j - c] for j, wj in enumerate(w)) / h ** k
            spread = math.fsum(abs(float(wj)) for wj in w) / h ** k
        terms.append(p * deriv)
        noise += abs(p) * spread * relative_noise * abs(values[0])
    return FDResidual(abs(math.fsum(terms)), max(abs(t) for t in terms), noise)


def j3_fd_residual(eta: float, h: float) -> FDResidual:
    return _apply_fd(J3_OPERATOR, 3, eta, h)


def ode_residual_J3(eta: float, h: float = 1e-3) -> float:
    """``|residual|`` of the specialized ``J_3`` equation by finite differences."""
    return j3_fd_residual(eta, h).residual


def default_step(d: int, eta: float) -> float:
    """Step balancing truncation against rounding for a ``d``-th order stencil.

    Shrunk when needed so the widest stencil stays above ``eta = 1``.
    """
    h = 1e-3 if d <= 3 else 1e-2
    half = len(central_weights(d)) // 2
    return min(h, (eta - 1.0) / (half + 1))


def j_general_fd_residual(d: int, eta: float, h: float | None = None) -> FDResidual:
    if not 2 <= d <= 6:
        raise ValueError("the general check covers 2 <= d <= 6")
    if h is None:
        h = default_step(d, eta)
    result = _apply_fd(j_operator_coefficients(d), d, eta, h)
    if result.noise > result.scale:
        raise StencilUnstable(
            f"stencil noise {result.noise:.3g} exceeds term scale {result.scale:.3g} "
            f"at d={d}, eta={eta}, h={h}")
    return result


def ode_residual_J_general(d: int, eta: float, h: float | None = None) -> float:
    """``|residual|`` of the general ``J_d`` equation by finite differences.

    ``h`` defaults to :func:`default_step`.

    Raises
    ------
    StencilUnstable
        If the propagated rounding noise exceeds the operator's term scale.
    """
    return j_general_fd_residual(d, eta, h).residual


def operator_on_inverse(d: int, eta: float) -> tuple[float, float]:
    """Apply the general operator to ``1/eta`` with exact derivatives.

    Returns ``(computed, expected)``; ``(theta + 1)`` annihilates
    ``1/eta``, so only ``-(1/eta) theta**d`` survives, giving
    ``-(-1)**d / eta**2``.
    """
    total = []
    for k, poly in enumerate(j_operator_coefficients(d)):
        deriv = (-1) ** k * math.factorial(k) * eta ** (-k - 1)
        total.append(_laurent(poly, eta) * deriv)
    return math.fsum(total), -((-1) ** d) / eta ** 2
