"""Watson-like lattice integrals through hypergeometric series.

All quantities are averages over ``[0, pi]**d`` (the ``1/pi**d`` prefactor
is built in), so every function here is dimensionless.  Integer-dimension
entry points take ``d`` as an int; the continuous-dimension extension of the
bcc integrals lives in :func:`bcc_i_continuous` and :func:`bcc_j_continuous`.
"""
from __future__ import annotations

import enum
import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .hyperseries import (
    DivergentSeries,
    HypergeometricSpec,
    NotConverged,
    SeriesControl,
    SeriesEvaluation,
    _evaluate,
    _PairedSeries,
    classify_convergence,
    ConvergenceClass,
    continuous_i,
    ghgf_eval,
)
from .special import bessel_I0e_array

# coefficients (1/2)_m / m! for m = 0..7
LARGE_D_BASES = (Fraction(1), Fraction(1, 2), Fraction(3, 8), Fraction(5, 16),
                 Fraction(35, 128), Fraction(63, 256), Fraction(231, 1024),
                 Fraction(429, 2048))


class Family(str, enum.Enum):
    I_BCC = "I"
    ITILDE_BCC = "Itilde"
    JTILDE_BCC = "Jtilde"
    J_BCC = "J"
    G_BCC_FERRO = "Gferro"
    G_SC2 = "Gsc2"
    MARADUDIN_SQRT = "maradudin_sqrt"
    MARADUDIN_SQ = "maradudin_sq"


CONTINUOUS_FAMILIES = frozenset({Family.I_BCC, Family.J_BCC})


@dataclass(frozen=True)
class LatticeQuery:
    family: Family
    dimension: float
    anisotropy: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.anisotropy >= 1:
            raise ValueError(f"anisotropy must be >= 1, got {self.anisotropy}")
        if not self.dimension >= 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if (self.family not in CONTINUOUS_FAMILIES
                and not float(self.dimension).is_integer()):
            raise ValueError(f"family {self.family.value} needs an integer dimension")
        if self.family is Family.G_SC2 and self.dimension != 2:
            raise ValueError("the square-lattice Green function is two-dimensional")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _integer_dimension(d) -> int:
    if isinstance(d, bool) or not float(d).is_integer() or d < 1:
        raise ValueError(
            f"dimension must be a positive integer, got {d}; "
            "use the continuous-dimension functions for real d")
    return int(d)


def _w(eta: float) -> float:
    if not eta >= 1:
        raise ValueError(f"eta must be >= 1, got {eta}")
    return 1.0 / (eta * eta)


def _bcc_spec(numerator, denominator, eta: float) -> HypergeometricSpec:
    # eta - 1 is exact near eta = 1, so log1p keeps log(w) accurate there
    return HypergeometricSpec(numerator, denominator, _w(eta), -2 * math.log1p(eta - 1))


def _run(spec: HypergeometricSpec, control: SeriesControl | None) -> SeriesEvaluation:
    if classify_convergence(spec) is ConvergenceClass.DIVERGENT:
        raise DivergentSeries(
            f"{spec.p}F{spec.q}{spec.numerator_params};{spec.denominator_params} "
            f"diverges at argument {spec.argument}")
    return _evaluate(_PairedSeries.from_spec(spec), control or SeriesControl())


def i_spec(d: int, eta: float) -> HypergeometricSpec:
    return _bcc_spec((0.5,) * (d + 1), (1.0,) * d, eta)


def i_tilde_spec(d: int, eta: float) -> HypergeometricSpec:
    return _bcc_spec((-0.5,) + (0.5,) * d, (1.0,) * d, eta)


def j_tilde_shifted_spec(d: int, eta: float) -> HypergeometricSpec:
    return _bcc_spec((0.5,) + (1.5,) * d, (2.0,) * d, eta)


def j_spec(d: int, eta: float) -> HypergeometricSpec:
    return _bcc_spec((0.5,) * d, (1.0,) * (d - 1), eta)


def bcc_i_eval(d, eta, control=None) -> SeriesEvaluation:
    return _run(i_spec(_integer_dimension(d), eta), control)


def bcc_i(d: int, eta: float, control: SeriesControl | None = None) -> float:
    """Average of ``eta / sqrt(eta**2 - prod cos**2(x_j/2))`` over the cube.

    Equal to ``(d+1)F(d)(1/2, ..., 1/2; 1, ..., 1; 1/eta**2)``.  Finite at
    ``eta = 1`` only for ``d > 1``.
    """
    return bcc_i_eval(d, eta, control).value


def bcc_i_tilde_eval(d, eta, control=None) -> SeriesEvaluation:
    return _run(i_tilde_spec(_integer_dimension(d), eta), control).scaled(eta)


def bcc_i_tilde(d: int, eta: float, control: SeriesControl | None = None) -> float:
    """Average of ``sqrt(eta**2 - prod cos**2(x_j/2))``; its eta-derivative is :func:`bcc_i`."""
    return bcc_i_tilde_eval(d, eta, control).value


def bcc_j_tilde_eval(d, eta, form="shifted", control=None) -> SeriesEvaluation:
    d = _integer_dimension(d)
    if form == "shifted":
        return _run(j_tilde_shifted_spec(d, eta), control).scaled(0.5 ** d / eta)
    if form == "difference":
        first = _run(i_spec(d, eta), control).scaled(eta)
        second = _run(i_tilde_spec(d, eta), control).scaled(eta)
        return SeriesEvaluation(
            first.value - second.value,
            max(first.terms_used, second.terms_used),
            first.last_term - second.last_term,
            first.tail_bound + second.tail_bound,
            first.convergence if first.tail_bound >= second.tail_bound
            else second.convergence,
            first.tail_correction - second.tail_correction)
    raise ValueError(f"form must be 'shifted' or 'difference', got {form!r}")


def bcc_j_tilde(d: int, eta: float, form: str = "shifted",
                control: SeriesControl | None = None) -> float:
    """Average of ``P / sqrt(eta**2 - P)`` with ``P = prod cos**2(x_j/2)``.

    ``form="difference"`` subtracts the two integrals above;
    ``form="shifted"`` sums the single series with parameters shifted by one.
    """
    return bcc_j_tilde_eval(d, eta, form, control).value


def bcc_j_eval(d, eta, control=None) -> SeriesEvaluation:
    return _run(j_spec(_integer_dimension(d), eta), control).scaled(1.0 / eta)


def bcc_j(d: int, eta: float, control: SeriesControl | None = None) -> float:
    """Average of ``eta / (eta**2 - prod cos**2(x_j/2))``.

    Equal to ``(1/eta) dF(d-1)(1/2, ...; 1, ...; 1/eta**2)``; at ``eta = 1``
    it is finite only for ``d > 2``.
    """
    return bcc_j_eval(d, eta, control).value


def bcc_ferro_green_eval(d, eta, control=None) -> SeriesEvaluation:
    return bcc_j_eval(d, eta, control)


def bcc_ferro_green(d: int, eta: float, control: SeriesControl | None = None) -> float:
    """Lattice Green function ``avg 1/(eta - prod cos x_j)`` of the hyper-bcc ferromagnet.

    Shares its series with :func:`bcc_j`; the defining integrand differs,
    which is what the quadrature oracle checks.
    """
    return bcc_ferro_green_eval(d, eta, control).value


def bcc_i_continuous(d: float, eta: float,
                     control: SeriesControl | None = None) -> SeriesEvaluation:
    return continuous_i(d, eta, control)


def bcc_j_continuous(d: float, eta: float,
                     control: SeriesControl | None = None) -> SeriesEvaluation:
    """Continuous-dimension extension ``I(d - 1, eta) / eta``."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return continuous_i(d - 1, eta, control).scaled(1.0 / eta)


def bcc_i_large_d(d: float, eta: float, n_terms: int = 8) -> float:
    """Leading ``n_terms`` (at most 8) of the series in ``1/eta**2`` for large ``d``."""
    if not 1 <= n_terms <= len(LARGE_D_BASES):
        raise ValueError(f"n_terms must be in 1..{len(LARGE_D_BASES)}")
    w = _w(eta)
    return math.fsum(float(base) ** (d + 1) * w ** m
                     for m, base in enumerate(LARGE_D_BASES[:n_terms]))


def large_d_remainder_bounds(d: float, eta: float) -> tuple[float, float]:
    """Lower and upper bounds on ``I(d, eta)`` minus its 8-term truncation.

    All terms are positive, so the remainder is at least the first omitted
    term ``t_8``.  Since ``(k - 1/2)/k <= sqrt((2k - 1)/(2k + 1))`` the
    coefficient ratios telescope to ``beta_m/beta_8 <= (17/(2m+1))**p``
    with ``p = (d+1)/2``, which sums to at most ``t_8 (1 + 17/(d - 1))``;
    for ``eta > 1`` the geometric bound ``t_8 / (1 - w)`` also applies.
    """
    if not d > 1:
        raise ValueError("the remainder bound needs d > 1")
    w = _w(eta)
    first = (6435 / 32768) ** (d + 1) * w ** 8
    factor = 1 + 17 / (d - 1)
    if w < 1:
        factor = min(factor, 1 / (1 - w))
    return first, first * factor


def cosine_power_average(k: int, eta: float,
                         control: SeriesControl | None = None) -> float:
    """``(1/pi) int_0^pi dx (1 - cos(x)/eta)**-k`` as ``2F1((k+1)/2, k/2; 1; 1/eta**2)``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not eta > 1:
        raise DivergentSeries(f"the cosine-power average needs eta > 1, got {eta}")
    return _run(_bcc_spec(((k + 1) / 2, k / 2), (1.0,), eta), control).value


def _sc_outer_sum(eta: float, tol: float, max_terms: int) -> tuple[float, float, int]:
    """``sum_n (1/2)_n / (n! (4 eta**2)**n) 2F1(n + 1/2, n + 1; 1; 1/(4 eta**2))``."""
    if not eta > 1:
        raise DivergentSeries(f"the square-lattice series needs eta > 1, got {eta}")
    z = 1.0 / (4 * eta * eta)
    limit_ratio = z / (1 - z) ** 2
    terms: list[float] = []
    coeff = 1.0
    prev = None
    for n in range(max_terms):
        inner = ghgf_eval(HypergeometricSpec((n + 0.5, n + 1.0), (1.0,), z), tol * 1e-2)
        term = coeff * inner.value
        terms.append(term)
        if prev is not None and prev != 0:
            rho = max(term / prev, limit_ratio)
            bound = term * rho / (1 - rho) if rho < 1 else math.inf
            if bound <= tol * math.fsum(terms):
                return math.fsum(terms), bound, n + 1
        prev = term
        coeff *= (n + 0.5) / (n + 1) * z
    partial = SeriesEvaluation(math.fsum(terms), max_terms, terms[-1], math.inf,
                               ConvergenceClass.ABSOLUTE)
    raise NotConverged("square-lattice outer series did not converge", partial)


def sc_green_2d_eval(eta: float, tol: float = 1e-13,
                     max_terms: int = 10_000) -> SeriesEvaluation:
    total, bound, n = _sc_outer_sum(eta, tol, max_terms)
    return SeriesEvaluation(total / eta, n, math.nan, bound / eta,
                            ConvergenceClass.ABSOLUTE)


def sc_green_2d(eta: float, tol: float = 1e-13, max_terms: int = 10_000) -> float:
    """Square-lattice Green function ``avg 1/(eta - (cos x + cos y)/2)``.

    Summed as an outer series of Gauss functions in ``1/(4 eta**2)``.
    """
    return sc_green_2d_eval(eta, tol, max_terms).value


def sc_summation_check(eta: float, tol: float = 1e-12) -> tuple[float, float, float]:
    """Both sides of the square/bcc summation identity and their difference.

    The left side is the outer series of :func:`sc_green_2d` (times eta),
    the right side ``2F1(1/2, 1/2; 1; 1/eta**2)``.
    """
    lhs, _, _ = _sc_outer_sum(eta, tol, 10_000)
    rhs = ghgf_eval(_bcc_spec((0.5, 0.5), (1.0,), eta), tol).value
    return lhs, rhs, abs(lhs - rhs)


def _gauss_panels(a: float, b: float, panels: int, nodes: int):
    x, wts = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    w = (half[:, None] * wts[None, :]).ravel()
    return pts, w


def _maradudin_once(d: float, eta: float, form: str, panels: int,
                    nodes: int) -> tuple[float, int]:
    # t = u**2, s = v**2; the integrand is symmetric in u <-> v, so integrate
    # over v <= u and double.  With I0 scaled, the damping there is
    # exp(-d ((eta-1) u**2 + (eta+1) v**2)).
    cutoff = math.log(1e18)
    u_max = math.sqrt(cutoff / (d * (eta - 1)))
    v_max = math.sqrt(cutoff / (d * (eta + 1)))
    u, wu = _gauss_panels(0.0, u_max, panels, nodes)
    x, wx = np.polynomial.legendre.leggauss(nodes)
    total = []
    evals = 0
    for ui, wui in zip(u, wu):
        top = min(ui, v_max)
        sub = max(1, int(math.ceil(panels * top / u_max)))
        v, wv = _gauss_panels(0.0, top, sub, nodes)
        arg = ui * ui - v * v
        scaled = bessel_I0e_array(arg) ** d
        damp = np.exp(-d * ((eta - 1) * ui * ui + (eta + 1) * v * v))
        f = damp * scaled * (ui * v if form == "sq" else 1.0)
        total.append(wui * float(np.dot(wv, f)))
        evals += v.size
    inner = 2 * 4 * math.fsum(total)
    return inner * (d * d if form == "sq" else d / math.pi), evals


def maradudin_sc_eval(d: float, eta: float, form: str = "sq", *, panels: int = 12,
                      nodes: int = 16, tol: float = 1e-9) -> QuadratureResult:
    if form not in ("sq", "sqrt"):
        raise ValueError(f"form must be 'sq' or 'sqrt', got {form!r}")
    if not eta > 1:
        raise DivergentSeries(f"the damped double integral needs eta > 1, got {eta}")
    if not d >= 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    coarse, n_coarse = _maradudin_once(d, eta, form, panels, nodes)
    fine, n_fine = _maradudin_once(d, eta, form, 2 * panels, nodes)
    err = abs(fine - coarse)
    evals = n_coarse + n_fine
    result = QuadratureResult(fine, err, evals)
    if err > tol * max(1.0, abs(fine)):
        partial = SeriesEvaluation(fine, evals, math.nan, err, ConvergenceClass.ABSOLUTE)
        raise NotConverged(
            f"damped double integral error {err:.2e} above tolerance {tol:.1e}", partial)
    return result


def maradudin_sc(d: float, eta: float, form: str = "sq", *, panels: int = 12,
                 nodes: int = 16, tol: float = 1e-9) -> float:
    """Simple-cubic average via the damped double integral over Bessel ``I0``.

    ``form="sq"`` gives ``avg 1/(eta**2 - A**2)`` and ``form="sqrt"`` gives
    ``avg 1/sqrt(eta**2 - A**2)``, where ``A`` is the mean of ``cos x_j``.
    Because ``d`` appears only as a power and a prefactor, real ``d`` is
    allowed.
    """
    return maradudin_sc_eval(d, eta, form, panels=panels, nodes=nodes, tol=tol).value


@dataclass(frozen=True)
class DefiningIntegral:
    """Integrand over ``[0, pi]**d`` written as ``kernel(reduce(factor(x_j)))``.

    The factored shape lets nested quadrature carry the partial reduction
    of the outer variables inward.
    """

    factor: Callable
    combine: Callable
    identity: float
    kernel: Callable
    dimension: int

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at ``points`` of shape ``(n, d)``."""
        f = self.factor(points)
        acc = np.full(points.shape[0], self.identity)
        for j in range(self.dimension):
            acc = self.combine(acc, f[:, j])
        return self.kernel(acc)


def _half_cos_sq(x):
    c = np.cos(x / 2) if isinstance(x, np.ndarray) else math.cos(x / 2)
    return c * c


def _cos(x):
    return np.cos(x) if isinstance(x, np.ndarray) else math.cos(x)


def defining_integral(family: Family | str, d: int, eta: float) -> DefiningIntegral:
    """The integrand whose cube average each family's series reproduces."""
    family = Family(family)
    d = _integer_dimension(d)
    e2 = eta * eta
    mul, add = operator.mul, operator.add
    if family is Family.I_BCC:
        return DefiningIntegral(_half_cos_sq, mul, 1.0,
                                lambda p: eta / (e2 - p) ** 0.5, d)
    if family is Family.ITILDE_BCC:
        return DefiningIntegral(_half_cos_sq, mul, 1.0, lambda p: (e2 - p) ** 0.5, d)
    if family is Family.JTILDE_BCC:
        return DefiningIntegral(_half_cos_sq, mul, 1.0, lambda p: p / (e2 - p) ** 0.5, d)
    if family is Family.J_BCC:
        return DefiningIntegral(_half_cos_sq, mul, 1.0, lambda p: eta / (e2 - p), d)
    if family is Family.G_BCC_FERRO:
        return DefiningIntegral(_cos, mul, 1.0, lambda c: 1.0 / (eta - c), d)
    if family is Family.G_SC2:
        if d != 2:
            raise ValueError("the square-lattice Green function is two-dimensional")
        return DefiningIntegral(_cos, add, 0.0, lambda s: 1.0 / (eta - s / 2), d)
    if family is Family.MARADUDIN_SQRT:
        return DefiningIntegral(_cos, add, 0.0,
                                lambda s: 1.0 / (e2 - (s / d) ** 2) ** 0.5, d)
    if family is Family.MARADUDIN_SQ:
        return DefiningIntegral(_cos, add, 0.0, lambda s: 1.0 / (e2 - (s / d) ** 2), d)
    raise ValueError(f"unknown family {family}")


def evaluate(query: LatticeQuery, control: SeriesControl | None = None):
    """Evaluate a query by its closed form.

    Returns a :class:`SeriesEvaluation`, or a :class:`QuadratureResult` for
    the damped double-integral families.
    """
    fam, d, eta = query.family, query.dimension, query.anisotropy
    integer = float(d).is_integer()
    if fam is Family.I_BCC:
        return bcc_i_eval(int(d), eta, control) if integer else \
            bcc_i_continuous(d, eta, control)
    if fam is Family.J_BCC:
        return bcc_j_eval(int(d), eta, control) if integer else \
            bcc_j_continuous(d, eta, control)
    if fam is Family.ITILDE_BCC:
        return bcc_i_tilde_eval(int(d), eta, control)
    if fam is Family.JTILDE_BCC:
        return bcc_j_tilde_eval(int(d), eta, "shifted", control)
    if fam is Family.G_BCC_FERRO:
        return bcc_ferro_green_eval(int(d), eta, control)
    if fam is Family.G_SC2:
        return sc_green_2d_eval(eta, tol=(control or SeriesControl()).tol)
    form = "sqrt" if fam is Family.MARADUDIN_SQRT else "sq"
    return maradudin_sc_eval(d, eta, form)
