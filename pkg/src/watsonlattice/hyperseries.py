"""Balanced generalized hypergeometric series, p = q + 1, in w = 1/eta**2.

Terms are generated block-wise from the term-ratio recurrence, carried in
log space so that 10**7 terms neither overflow nor lose digits, and summed
with exactly rounded block sums (``math.fsum``) accumulated across blocks.

Numerator and denominator parameters are paired, with the ``m!`` of the
series acting as an extra denominator ``1``, so that each step multiplies
the running term by ``w * prod(((m + a) / (m + b)) ** mult)``.  A real
multiplicity is what lets the coefficient family of the continuous-dimension
integral share the engine with ordinary pFq series.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

import numpy as np

from .special import expint_scaled

DEFAULT_TOL = 1e-13
DEFAULT_MAX_TERMS = 10_000_000
DEFAULT_FIXED_M = 10_000

_FIRST_BLOCK = 255
_MAX_BLOCK = 1 << 18
# bound on |ln(1 - 1/(2(j+1)))| for j >= 0, used by the d-derivative tail bound
_LOG_STEP_MAX = math.log(2.0)


class SeriesError(ArithmeticError):
    """Base class for series evaluation failures."""


class DivergentSeries(SeriesError):
    """The requested series does not converge at the given argument."""


class NotConverged(SeriesError):
    """The term budget ran out before the tolerance was met.

    The best available estimate is attached as ``partial``.
    """

    def __init__(self, message: str, partial: "SeriesEvaluation"):
        super().__init__(message)
        self.partial = partial


class InvalidDenominatorParam(ValueError):
    """A denominator parameter is zero or a negative integer."""


class ConvergenceClass(enum.Enum):
    ABSOLUTE = "converges_absolutely"
    UNIT_ARGUMENT = "converges_at_unit_argument"
    DIVERGENT = "divergent"


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


@dataclass(frozen=True)
class HypergeometricSpec:
    """Parameters and argument of ``pFq(a; b; w)``.

    ``log_argument`` optionally carries ``log(w)`` computed more accurately
    than ``log`` of the rounded ``w``.  Just below ``w = 1`` the sum is
    ill-conditioned in ``w`` (a relative change ``eps`` moves ``2F1`` by
    about ``eps / (1 - w)``), so callers holding ``w = 1/eta**2`` should
    pass ``-2 log1p(eta - 1)``.
    """

    numerator_params: tuple[float, ...]
    denominator_params: tuple[float, ...]
    argument: float
    log_argument: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "numerator_params",
                           tuple(float(a) for a in self.numerator_params))
        object.__setattr__(self, "denominator_params",
                           tuple(float(b) for b in self.denominator_params))
        object.__setattr__(self, "argument", float(self.argument))
        if self.log_argument is not None:
            if not self.argument > 0:
                raise ValueError("log_argument needs a positive argument")
            if abs(math.exp(self.log_argument) - self.argument) > 1e-14 * self.argument:
                raise ValueError(
                    f"log_argument {self.log_argument} does not match {self.argument}")
        for b in self.denominator_params:
            if _is_nonpositive_integer(b):
                raise InvalidDenominatorParam(
                    f"denominator parameter {b} is zero or a negative integer")

    @property
    def p(self) -> int:
        return len(self.numerator_params)

    @property
    def q(self) -> int:
        return len(self.denominator_params)

    @property
    def terminates(self) -> bool:
        return any(_is_nonpositive_integer(a) for a in self.numerator_params)

    @property
    def parameter_excess(self) -> float:
        """``sum(b) - sum(a)``; positive excess gives convergence at w = 1."""
        return math.fsum(self.denominator_params) - math.fsum(self.numerator_params)


@dataclass(frozen=True)
class SeriesEvaluation:
    """Result of summing a series.

    ``tail_bound`` is the magnitude of what was left out: a rigorous
    geometric bound for |w| < 1, and at w = 1 either the estimated tail
    (fixed truncation, uncorrected) or the residual uncertainty after the
    tail correction ``tail_correction`` has been added to ``value``.
    """

    value: float
    terms_used: int
    last_term: float
    tail_bound: float
    convergence: ConvergenceClass
    tail_correction: float = 0.0

    def scaled(self, factor: float) -> "SeriesEvaluation":
        return replace(self, value=self.value * factor,
                       last_term=self.last_term * factor,
                       tail_bound=self.tail_bound * abs(factor),
                       tail_correction=self.tail_correction * factor)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy.

    With ``fixed_M`` set, exactly the terms ``m = 0..fixed_M`` are summed;
    ``tail_correction`` then decides whether the unit-argument tail estimate
    is added to the value.  Otherwise terms are added until the relative
    tail bound drops below ``tol`` (the tail estimate is always added at
    unit argument in this mode).
    """

    tol: float = DEFAULT_TOL
    max_terms: int = DEFAULT_MAX_TERMS
    fixed_M: int | None = None
    tail_correction: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")
        if self.fixed_M is not None and self.fixed_M < 0:
            raise ValueError("fixed_M must be nonnegative")


def pochhammer(a: float, m: int) -> float:
    """Rising factorial ``(a)_m`` by the product recurrence."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    result = 1.0
    for k in range(m):
        result *= a + k
    return result


class _PairedSeries:
    """Series whose term ratio is ``w * prod(((m+a)/(m+b))**mult)``."""

    def __init__(self, pairs: Sequence[tuple[float, float, float]], w: float,
                 log_w: float | None = None):
        self.pairs = tuple(pairs)
        self.w = float(w)
        if log_w is None and self.w != 0:
            log_w = math.log(abs(self.w))
        self.log_w = log_w

    @classmethod
    def from_spec(cls, spec: HypergeometricSpec) -> "_PairedSeries":
        if spec.p != spec.q + 1:
            raise ValueError(
                f"only balanced series with p = q + 1 are supported, got "
                f"p={spec.p}, q={spec.q}")
        a = sorted(spec.numerator_params)
        b = sorted(spec.denominator_params + (1.0,))
        counts = Counter(zip(a, b))
        return cls([(ai, bi, float(n)) for (ai, bi), n in sorted(counts.items())],
                   spec.argument, spec.log_argument)

    @classmethod
    def half_over_one(cls, power: float, w: float,
                      log_w: float | None = None) -> "_PairedSeries":
        # coefficients [(1/2)_m / m!] ** power
        return cls([(0.5, 1.0, float(power))], w, log_w)

    @property
    def exponent(self) -> float:
        """Terms at w = 1 decay like ``m ** -exponent``."""
        return math.fsum(n * (b - a) for a, b, n in self.pairs)

    @property
    def subleading(self) -> float:
        """``c`` in ``t_m ~ C m**-e (1 + c/m)`` at w = 1."""
        e = self.exponent
        return e / 2 + math.fsum(n * (a * a - b * b) for a, b, n in self.pairs) / 2

    @property
    def scale(self) -> float:
        return max([1.0] + [max(abs(a), abs(b)) for a, b, _ in self.pairs]
                   + [abs(self.subleading)])

    @property
    def terminates(self) -> bool:
        return any(_is_nonpositive_integer(a) for a, _, _ in self.pairs)

    def convergence(self) -> ConvergenceClass:
        if self.terminates or abs(self.w) < 1:
            return ConvergenceClass.ABSOLUTE
        if self.w == 1 and self.exponent > 1:
            return ConvergenceClass.UNIT_ARGUMENT
        return ConvergenceClass.DIVERGENT

    def log_step(self, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``log|prod(...)|`` and its sign for the step ``m -> m + 1``."""
        logr = np.zeros(m.shape)
        sign = np.ones(m.shape)
        for a, b, n in self.pairs:
            ma = m + a
            mb = m + b
            regular = (ma > 0) & (mb > 0)
            with np.errstate(divide="ignore", invalid="ignore"):
                lr = np.where(regular, np.log1p((a - b) / np.where(regular, mb, 1.0)),
                              np.log(np.abs(ma)) - np.log(np.abs(mb)))
            logr += n * lr
            sign *= np.sign(ma) * np.sign(mb)
        return logr, sign

    def sup_ratio(self, m: np.ndarray) -> np.ndarray:
        """Upper bound on ``|ratio_j|`` for all ``j >= m``.

        Each factor ``(j+a)/(j+b)`` is monotone for ``j > -min(a, b)`` and
        tends to 1, so its supremum is ``max(1, (m+a)/(m+b))``.
        """
        logsup = np.zeros(m.shape)
        valid = np.ones(m.shape, dtype=bool)
        for a, b, n in self.pairs:
            ma = m + a
            mb = m + b
            ok = (ma > 0) & (mb > 0)
            valid &= ok
            with np.errstate(divide="ignore", invalid="ignore"):
                lr = np.log1p((a - b) / np.where(ok, mb, 1.0))
            logsup += n * np.maximum(lr, 0.0)
        rho = abs(self.w) * np.exp(logsup)
        return np.where(valid, rho, np.inf)

    def blocks(self, limit: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """Yield ``(m, logpair, sign)`` blocks covering ``m = 0..limit-1``.

        ``logpair`` is the log of the parameter part of the coefficient; the
        power of ``w`` is applied by the caller.
        """
        yield np.zeros(1, dtype=np.int64), np.zeros(1), np.ones(1)
        start, size = 1, _FIRST_BLOCK
        log_prev, sign_prev = 0.0, 1.0
        while start < limit:
            n = min(size, limit - start)
            m = np.arange(start, start + n, dtype=np.int64)
            step, sg = self.log_step((m - 1).astype(float))
            # within-block sums stay small, so the offset costs one rounding
            logpair = log_prev + np.cumsum(step)
            sign = sign_prev * np.cumprod(sg)
            yield m, logpair, sign
            log_prev, sign_prev = float(logpair[-1]), float(sign[-1])
            start += n
            size = min(2 * size, _MAX_BLOCK)

    def terms(self, m: np.ndarray, logpair: np.ndarray, sign: np.ndarray) -> np.ndarray:
        if self.w == 0:
            return np.where(m == 0, 1.0, 0.0)
        with np.errstate(invalid="ignore", over="ignore"):
            t = sign * np.exp(logpair + m * self.log_w)
        if self.w < 0:
            t = np.where(m % 2 == 1, -t, t)
        return np.where(np.isnan(t), 0.0, t)


def _unit_tail(t_M: float, M: int, e: float, c: float) -> float:
    """Sum of terms beyond ``M`` at w = 1 for ``t_m ~ C m**-e (1 + c/m)``.

    The power law is matched to the last term and summed by the integral
    plus the first Euler-Maclaurin endpoint corrections.
    """
    integral = t_M / (1 + c / M) * (M / (e - 1) + c / e)
    return integral - t_M / 2 + e * t_M / (12 * M)


def _near_unit_tail(t_M: float, M: int, e: float, c: float, s: float) -> float:
    """As ``_unit_tail`` for ``t_m ~ C m**-e (1 + c/m) exp(-s m)`` with small ``s``.

    The integral of the model is ``M**(1-e) E_e(M s)`` and its ``1/m``
    companion, which reduce to the unit-argument tail as ``s -> 0``.
    """
    z = M * s
    integral = t_M / (1 + c / M) * (M * expint_scaled(e, z) + c * expint_scaled(e + 1, z))
    return integral - t_M / 2 + (e / M + s) * t_M / 12


def _unit_tail_log(t_M: float, L_M: float, M: int, e: float, c: float,
                   lam: float, mu: float) -> float:
    """As ``_unit_tail`` for terms ``t_m * L_m`` with ``L ~ const + lam ln m + mu/m``."""
    C = t_M / (1 + c / M)
    L0 = L_M - mu / M
    integral = C * (L0 * (M / (e - 1) + c / e)
                    + lam * (M / (e - 1) ** 2 + c / e ** 2)
                    + mu * (1 / e + c / ((e + 1) * M)))
    f = t_M * L_M
    return integral - f / 2 + e * f / (12 * M)


def _sum_blocks(blocks: Sequence[np.ndarray]) -> float:
    return math.fsum(math.fsum(b.tolist()) for b in blocks)


def _evaluate(series: _PairedSeries, control: SeriesControl,
              log_weight: float | None = None) -> SeriesEvaluation:
    """Sum ``series`` (optionally with terms weighted by ``logpair/log_weight``).

    ``log_weight`` selects the d-derivative series of the single-pair
    family: each term is multiplied by its own log-coefficient per unit of
    multiplicity.
    """
    conv = series.convergence()
    if conv is ConvergenceClass.DIVERGENT:
        raise DivergentSeries(
            f"series with argument {series.w} and parameter pairs "
            f"{series.pairs} diverges")
    derivative = log_weight is not None
    unit = conv is ConvergenceClass.UNIT_ARGUMENT
    e, c = series.exponent, series.subleading
    m_min = int(max(64, 20 * series.scale))

    def tail_estimate(t_M: float, logpair_M: float, M: int) -> float:
        if M == 0:
            return math.inf
        if derivative:
            a, b, _ = series.pairs[0]
            return _unit_tail_log(t_M, logpair_M / log_weight, M, e, c,
                                  lam=a - b, mu=(a * a - b * b - (a - b)) / 2)
        return _unit_tail(t_M, M, e, c)

    def geometric_bound(m: np.ndarray, t: np.ndarray, logpair: np.ndarray) -> np.ndarray:
        rho = series.sup_ratio(m.astype(float))
        if derivative:
            L = np.abs(logpair / log_weight)
            with np.errstate(divide="ignore"):
                rho = rho * (1 + _LOG_STEP_MAX / ((m + 1) * L))
        with np.errstate(invalid="ignore", divide="ignore"):
            bound = np.abs(t) * rho / (1 - rho)
        bound = np.where(rho < 1, bound, np.inf)
        if not derivative:
            bound = np.where(t == 0, 0.0, bound)
        return bound

    def weighted(t, logpair):
        return t * (logpair / log_weight) if derivative else t

    def bare(t_weighted: float, logpair_M: float) -> float:
        # the tail models take the unweighted coefficient
        if derivative and logpair_M != 0:
            return t_weighted / (logpair_M / log_weight)
        return t_weighted

    fixed = control.fixed_M
    limit = fixed + 1 if fixed is not None else control.max_terms
    # just below unit argument the geometric bound needs ~log(1/(tol s))/s
    # terms; past the term budget, sum with the power-law-times-exponential
    # tail model instead
    s = -series.log_w if 0 < series.w < 1 else 0.0
    near_unit = (fixed is None and not derivative and not series.terminates
                 and s > 0 and e > 0
                 and math.log(1 / (control.tol * s)) / s > control.max_terms / 2)
    sums: list[float] = []
    history: list[tuple[int, float]] = []
    half_sum = None
    for m, logpair, sign in series.blocks(limit):
        t = weighted(series.terms(m, logpair, sign), logpair)
        M = int(m[-1])
        if fixed is not None:
            if half_sum is None and M >= fixed // 2:
                k = fixed // 2 - int(m[0])
                half_sum = math.fsum(sums + [math.fsum(t[:k + 1].tolist())])
                half_ref = (fixed // 2, bare(float(t[k]), float(logpair[k])),
                            float(logpair[k]))
            sums.append(math.fsum(t.tolist()))
            if M < fixed:
                continue
            raw = math.fsum(sums)
            last = float(t[-1])
            if unit:
                tail = tail_estimate(bare(last, float(logpair[-1])),
                                     float(logpair[-1]), M)
                if control.tail_correction:
                    Mh, th, lh = half_ref
                    ref = half_sum + tail_estimate(th, lh, Mh)
                    return SeriesEvaluation(raw + tail, M + 1, last,
                                            abs(raw + tail - ref), conv, tail)
                return SeriesEvaluation(raw, M + 1, last, abs(tail), conv)
            bound = float(geometric_bound(m[-1:], t[-1:], logpair[-1:])[0])
            return SeriesEvaluation(raw, M + 1, last, bound, conv)

        if unit or near_unit:
            sums.append(math.fsum(t.tolist()))
            raw = math.fsum(sums)
            last = float(t[-1])
            if near_unit:
                tail = _near_unit_tail(last, M, e, c, s) if M else math.inf
            else:
                tail = tail_estimate(bare(last, float(logpair[-1])),
                                     float(logpair[-1]), M)
            corrected = raw + tail
            ref = [v for Mk, v in history if Mk <= M // 2]
            history.append((M, corrected))
            err = abs(corrected - ref[-1]) if ref else math.inf
            result = SeriesEvaluation(corrected, M + 1, last, err, conv, tail)
            if M >= m_min and err <= control.tol * abs(corrected):
                return result
            continue

        base = math.fsum(sums)
        bound = geometric_bound(m, t, logpair)
        prefix = base + np.cumsum(t)
        ok = np.nonzero(bound <= control.tol * np.abs(prefix))[0]
        if ok.size:
            k = int(ok[0])
            value = math.fsum(sums + [math.fsum(t[:k + 1].tolist())])
            return SeriesEvaluation(value, int(m[k]) + 1, float(t[k]),
                                    float(bound[k]), conv)
        sums.append(math.fsum(t.tolist()))
        result = SeriesEvaluation(math.fsum(sums), M + 1, float(t[-1]),
                                  float(bound[-1]), conv)
    raise NotConverged(
        f"tolerance {control.tol:g} not reached within {control.max_terms} terms",
        result)


def classify_convergence(spec: HypergeometricSpec) -> ConvergenceClass:
    """Convergence class of a balanced ``pFq`` series at its argument.

    |w| < 1 converges absolutely; at w = 1 the series converges when
    ``sum(b) > sum(a)``.  Terminating series always converge.
    """
    for b in spec.denominator_params:
        if _is_nonpositive_integer(b):
            raise InvalidDenominatorParam(
                f"denominator parameter {b} is zero or a negative integer")
    if spec.terminates:
        return ConvergenceClass.ABSOLUTE
    if spec.p < spec.q + 1:
        return ConvergenceClass.ABSOLUTE
    if spec.p > spec.q + 1:
        return (ConvergenceClass.ABSOLUTE if spec.argument == 0
                else ConvergenceClass.DIVERGENT)
    w = spec.argument
    if abs(w) < 1:
        return ConvergenceClass.ABSOLUTE
    if w == 1 and spec.parameter_excess > 0:
        return ConvergenceClass.UNIT_ARGUMENT
    return ConvergenceClass.DIVERGENT


def raabe_index(d: float) -> float:
    """Limit of ``n (beta_n / beta_{n+1} - 1)`` for the continuous-d coefficients."""
    return (d + 1) / 2


def classify_continuous(d: float, eta: float) -> ConvergenceClass:
    """Convergence class of the continuous-dimension series at ``(d, eta)``."""
    if d < 0 or eta < 1:
        return ConvergenceClass.DIVERGENT
    if eta > 1:
        return ConvergenceClass.ABSOLUTE
    return (ConvergenceClass.UNIT_ARGUMENT if raabe_index(d) > 1
            else ConvergenceClass.DIVERGENT)


def ghgf_eval(spec: HypergeometricSpec, tolerance: float = DEFAULT_TOL,
              max_terms: int = DEFAULT_MAX_TERMS, *,
              fixed_terms: int | None = None,
              tail_correction: bool = False) -> SeriesEvaluation:
    """Evaluate ``pFq(a; b; w)`` with p = q + 1.

    Raises
    ------
    DivergentSeries
        If the series does not converge at its argument.
    NotConverged
        If ``max_terms`` is exhausted first; ``exc.partial`` holds the
        running estimate.
    """
    if classify_convergence(spec) is ConvergenceClass.DIVERGENT:
        raise DivergentSeries(f"{spec.p}F{spec.q} diverges at argument {spec.argument}")
    control = SeriesControl(tolerance, max_terms, fixed_terms, tail_correction)
    return _evaluate(_PairedSeries.from_spec(spec), control)


def beta_coefficient(d: float, m: int) -> float:
    """Coefficient ``[(1/2)_m / m!] ** (d + 1)`` of the continuous-d series."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return 1.0
    steps = np.log1p(-0.5 / np.arange(1, m + 1, dtype=float))
    return math.exp((d + 1) * math.fsum(steps.tolist()))


def _continuous_series(d: float, eta: float) -> _PairedSeries:
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if classify_continuous(d, eta) is ConvergenceClass.DIVERGENT:
        raise DivergentSeries(
            f"continuous-dimension series diverges at d={d}, eta={eta}")
    return _PairedSeries.half_over_one(d + 1, 1.0 / (eta * eta), -2 * math.log1p(eta - 1))


def continuous_i(d: float, eta: float,
                 control: SeriesControl | None = None) -> SeriesEvaluation:
    """``sum_m [(1/2)_m / m!]**(d+1) eta**(-2m)`` for real ``d``.

    Converges for ``d > 1`` at ``eta = 1`` and for every ``d >= 0`` when
    ``eta > 1``; the default control sums to a relative tolerance.  Pass
    ``SeriesControl(fixed_M=...)`` for a plain truncated sum.
    """
    series = _continuous_series(d, eta)
    return _evaluate(series, control or SeriesControl())


def continuous_i_ddim(d: float, eta: float,
                      control: SeriesControl | None = None) -> SeriesEvaluation:
    """Derivative of :func:`continuous_i` with respect to ``d``.

    Summed term-wise: each coefficient picks up the factor
    ``ln[(1/2)_m / m!]``, which is nonpositive, so the derivative is
    negative wherever the series has a nonconstant term.
    """
    series = _continuous_series(d, eta)
    return _evaluate(series, control or SeriesControl(), log_weight=d + 1)
