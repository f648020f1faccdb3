"""Elliptic integrals, the modified Bessel function I0, the generalized
exponential integral and Stirling numbers."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as _sp

_AGM_TOL = 1e-16
_BESSEL_CROSSOVER = 15.0


class ModulusOutOfRange(ValueError):
    """Elliptic modulus outside the admitted range."""


class IndexOutOfRange(IndexError):
    """Stirling-number index outside ``0 <= alpha <= d``."""


def _agm_sequence(k: float):
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    c = k
    yield a, b, c
    for _ in range(64):
        if abs(c) <= _AGM_TOL * a:
            return
        a, b, c = (a + b) / 2, math.sqrt(a * b), (a - b) / 2
        yield a, b, c


def elliptic_K(k: float) -> float:
    """Complete elliptic integral of the first kind, modulus ``k``.

    ``K(k) = pi / (2 AGM(1, sqrt(1 - k**2)))``.
    """
    if not 0.0 <= k < 1.0:
        raise ModulusOutOfRange(f"K(k) requires 0 <= k < 1, got {k}")
    for a, _, _ in _agm_sequence(k):
        pass
    return math.pi / (2 * a)


def elliptic_E(k: float) -> float:
    """Complete elliptic integral of the second kind, modulus ``k``.

    Uses ``E = K (1 - sum_n 2**(n-1) c_n**2)`` over the AGM sequence.
    """
    if not 0.0 <= k <= 1.0:
        raise ModulusOutOfRange(f"E(k) requires 0 <= k <= 1, got {k}")
    if k == 1.0:
        return 1.0
    terms = []
    for n, (a, _, c) in enumerate(_agm_sequence(k)):
        terms.append(2.0 ** (n - 1) * c * c)
    return math.pi / (2 * a) * (1.0 - math.fsum(terms))


def _i0_series(x: float) -> float:
    q = x * x / 4
    term, total, m = 1.0, [1.0], 0
    while term > 1e-17 * total[0] or m < 2:
        m += 1
        term *= q / (m * m)
        total.append(term)
    return math.fsum(total)


def _i0_asymptotic_scaled(x: float) -> float:
    # e**-x I0(x) ~ (2 pi x)**-1/2 sum_k [(2k-1)!!]**2 / (k! (8x)**k)
    term, terms, k = 1.0, [1.0], 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) ** 2 / (k * 8 * x)
        if nxt >= term or nxt < 1e-17:
            break
        term = nxt
        terms.append(term)
    return math.fsum(terms) / math.sqrt(2 * math.pi * x)


def bessel_I0(x: float) -> float:
    """Modified Bessel function of the first kind, order zero."""
    x = abs(x)
    if x <= _BESSEL_CROSSOVER:
        return _i0_series(x)
    return _i0_asymptotic_scaled(x) * math.exp(x)


def bessel_I0e(x: float) -> float:
    """Exponentially scaled ``exp(-|x|) I0(x)``; finite for any finite ``x``."""
    x = abs(x)
    if x <= _BESSEL_CROSSOVER:
        return _i0_series(x) * math.exp(-x)
    return _i0_asymptotic_scaled(x)


def bessel_I0e_array(x: np.ndarray) -> np.ndarray:
    """Vectorized :func:`bessel_I0e` with the same series/asymptotic split."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x <= _BESSEL_CROSSOVER
    xs = x[small]
    q = xs * xs / 4
    term = np.ones_like(xs)
    total = np.ones_like(xs)
    # q**m/(m!)**2 < 1e-26 by m = 48 for q <= 56.25
    for m in range(1, 48):
        term = term * q / (m * m)
        total += term
    out[small] = total * np.exp(-xs)
    xl = x[~small]
    if xl.size:
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        # terms still decrease through k = 25 for x > 15
        for k in range(1, 26):
            term = term * (2 * k - 1) ** 2 / (k * 8 * xl)
            total += term
        out[~small] = total / np.sqrt(2 * np.pi * xl)
    return out


def expint_scaled(order: float, x: float) -> float:
    """``exp(x) * E_order(x)`` with ``E_p(x) = int_1^inf exp(-x t) t**-p dt``.

    Real ``order > 0`` and ``x >= 0``.  Uses the continued fraction for
    ``x >= 1``; below that, scipy's regularized incomplete gamma gives the
    fractional order and the recurrence
    ``E_(p+1) = (exp(-x) - x E_p) / p`` climbs to ``order``, which is
    stable there since each step damps errors by ``x / p``.

    Raises
    ------
    ValueError
        For ``order <= 0`` or ``x < 0``, and at ``x = 0`` when ``order <= 1``
        (the integral diverges).
    """
    if not order > 0:
        raise ValueError(f"order must be positive, got {order}")
    if not x >= 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if x == 0:
        if order <= 1:
            raise ValueError("E_p(0) diverges for p <= 1")
        return 1.0 / (order - 1)
    if x >= 1:
        tiny = 1e-300
        b = x + order
        c, d = 1 / tiny, 1 / b
        h = d
        for i in range(1, 10_000):
            an = -i * (order - 1 + i)
            b += 2
            d = 1 / (an * d + b)
            c = b + an / c
            delta = c * d
            h *= delta
            if abs(delta - 1) < 1e-16:
                return h
        raise ArithmeticError(f"continued fraction for E_{order}({x}) did not converge")
    base = order - math.floor(order)
    if base == 0:
        base, value = 1.0, float(_sp.exp1(x))
    else:
        a = 1 - base
        value = x ** (base - 1) * math.gamma(a) * float(_sp.gammaincc(a, x))
    decay = math.exp(-x)
    while base < order - 0.5:
        value = (decay - x * value) / base
        base += 1
    return value / decay


class StirlingTable:
    """Exact triangular table of Stirling numbers of the second kind."""

    def __init__(self, max_d: int = 20):
        if max_d < 1:
            raise ValueError("max_d must be positive")
        rows = [(1,)]
        for n in range(1, max_d + 1):
            prev = rows[-1]
            row = [0] * (n + 1)
            for k in range(1, n + 1):
                row[k] = k * (prev[k] if k < n else 0) + prev[k - 1]
            rows.append(tuple(row))
        self.max_d = max_d
        self.entries = tuple(rows)

    def __call__(self, d: int, alpha: int) -> int:
        if not 0 <= alpha <= d:
            raise IndexOutOfRange(f"need 0 <= alpha <= d, got d={d}, alpha={alpha}")
        if d > self.max_d:
            raise IndexOutOfRange(f"table holds d <= {self.max_d}, got {d}")
        return self.entries[d][alpha]


@lru_cache(maxsize=None)
def _table(max_d: int) -> StirlingTable:
    return StirlingTable(max_d)


def stirling2(d: int, alpha: int) -> int:
    """Stirling number of the second kind ``S(d, alpha)``."""
    if d < 0:
        raise IndexOutOfRange(f"d must be nonnegative, got {d}")
    return _table(max(20, d))(d, alpha)


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)
