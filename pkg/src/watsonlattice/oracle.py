"""Brute-force evaluation of the defining cube averages.

Nothing here touches the series engine: the integrands come from
:func:`watsonlattice.lattice.defining_integral` and are integrated either by
nested adaptive Gauss-Kronrod quadrature (``scipy.integrate.quad`` per axis)
or by plain Monte Carlo.  The results exist to check the closed forms.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from .lattice import Family, LatticeQuery, defining_integral

MC_SHARD_SIZE = 1 << 18
MIN_MC_SAMPLES = 10_000


class SingularInput(ValueError):
    """The integrand is singular at eta = 1; see :func:`integrate_singular_I2`."""


class QuadratureNotConverged(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tolerance: float = 1e-10
    max_subdivisions: int = 200
    mc_samples: int = 10_000_000
    rng_seed: int = 42

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise ValueError("abs_tolerance must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")
        if self.mc_samples < MIN_MC_SAMPLES:
            raise ValueError(f"mc_samples must be at least {MIN_MC_SAMPLES}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class OracleResult:
    value: float
    error_estimate: float
    method: Literal["nested_adaptive", "monte_carlo"]
    samples_or_evals: int
    seed: int | None = None


def _quad(f, a, b, config: QuadratureConfig) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(f, a, b, epsabs=config.abs_tolerance, epsrel=1e-13,
                             limit=config.max_subdivisions, full_output=1)
    value, err = out[0], out[1]
    # a fourth element means quad flagged a problem; roundoff warnings are
    # accepted when the reported error still meets the tolerance
    if len(out) > 3 and (out[2]["last"] >= config.max_subdivisions
                         or err > config.abs_tolerance):
        raise QuadratureNotConverged(f"quadrature stopped with error {err:.3g}: {out[3]}")
    return value, err


def _check_query(query: LatticeQuery) -> int:
    if not float(query.dimension).is_integer():
        raise ValueError("the defining integrals exist only for integer dimension")
    if query.anisotropy == 1:
        raise SingularInput(
            "eta = 1 makes the integrand singular; use integrate_singular_I2")
    if not query.anisotropy > 1:
        raise ValueError("eta must exceed 1")
    return int(query.dimension)


def integrate_direct(query: LatticeQuery,
                     config: QuadratureConfig = QuadratureConfig()) -> OracleResult:
    """Nested adaptive quadrature of the family's cube average, ``d <= 3``.

    The error estimate adds the outermost reported error to the largest
    inner error, both divided by the cube volume.
    """
    d = _check_query(query)
    if not 1 <= d <= 3:
        raise ValueError("nested quadrature supports 1 <= d <= 3; use integrate_mc")
    integrand = defining_integral(query.family, d, query.anisotropy)
    inner_err = [0.0]
    evals = [0]

    def level(j: int, acc: float) -> float:
        if j == d:
            evals[0] += 1
            return integrand.kernel(acc)
        value, err = _quad(
            lambda x: level(j + 1, integrand.combine(acc, integrand.factor(x))),
            0.0, math.pi, config)
        if j > 0:
            inner_err[0] = max(inner_err[0], err)
        return value

    total, outer_err = _quad(
        lambda x: level(1, integrand.combine(integrand.identity, integrand.factor(x))),
        0.0, math.pi, config)
    volume = math.pi ** d
    error = outer_err / math.pi + inner_err[0] * math.pi ** (d - 1) / volume
    return OracleResult(total / volume, error, "nested_adaptive", evals[0])


def _shard_moments(integrand, d: int, n: int, seed: np.random.SeedSequence):
    rng = np.random.Generator(np.random.PCG64(seed))
    values = integrand(rng.random((n, d)) * math.pi)
    mean = math.fsum(values) / n
    dev = values - mean
    return n, mean, math.fsum(dev * dev)


def integrate_mc(query: LatticeQuery, config: QuadratureConfig = QuadratureConfig(),
                 workers: int = 1) -> OracleResult:
    """Plain Monte Carlo cube average with a reproducible shard layout.

    Samples are split into fixed-size shards, each drawing from its own
    child of ``SeedSequence(rng_seed)``.  Shard moments are merged in shard
    order, so the result is bit-identical for any ``workers``.
    """
    d = _check_query(query)
    if d < 2:
        raise ValueError("Monte Carlo is offered for d >= 2")
    integrand = defining_integral(query.family, d, query.anisotropy)
    n_total = config.mc_samples
    sizes = [MC_SHARD_SIZE] * (n_total // MC_SHARD_SIZE)
    if n_total % MC_SHARD_SIZE:
        sizes.append(n_total % MC_SHARD_SIZE)
    seeds = np.random.SeedSequence(config.rng_seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))

    def run(job):
        return _shard_moments(integrand, d, *job)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            moments = list(pool.map(run, jobs))
    else:
        moments = [run(job) for job in jobs]

    # Chan et al. pairwise update, in shard order
    n, mean, m2 = moments[0]
    for nb, mb, m2b in moments[1:]:
        delta = mb - mean
        tot = n + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    std_err = math.sqrt(m2 / (n - 1) / n)
    return OracleResult(mean, std_err, "monte_carlo", n, config.rng_seed)


def integrate_singular_I2(config: QuadratureConfig = QuadratureConfig(
        abs_tolerance=1e-12)) -> OracleResult:
    """``I_2(1)`` by quadrature despite the singularity at the origin.

    With half-angles ``a, b`` in ``[0, pi/2]`` the integrand is
    ``1/sqrt(sin(a)**2 + cos(a)**2 sin(b)**2)``.  Folding onto ``b <= a``
    and substituting ``b = a t`` cancels the ``1/a`` blow-up, leaving a
    smooth integrand on ``[0, pi/2] x [0, 1]``.
    """
    evals = [0]

    def g(t: float, a: float) -> float:
        evals[0] += 1
        if a == 0.0:
            return 1.0 / math.sqrt(1.0 + t * t)
        sa, sb = math.sin(a) / a, math.sin(a * t) / a
        ca = math.cos(a)
        return 1.0 / math.sqrt(sa * sa + ca * ca * sb * sb)

    inner_err = [0.0]

    def outer(a: float) -> float:
        value, err = _quad(lambda t: g(t, a), 0.0, 1.0, config)
        inner_err[0] = max(inner_err[0], err)
        return value

    total, err = _quad(outer, 0.0, math.pi / 2, config)
    scale = 8.0 / math.pi**2
    error = scale * (err + inner_err[0] * math.pi / 2)
    return OracleResult(scale * total, error, "nested_adaptive", evals[0])


__all__ = [
    "Family",
    "MC_SHARD_SIZE",
    "OracleResult",
    "QuadratureConfig",
    "QuadratureNotConverged",
    "SingularInput",
    "integrate_direct",
    "integrate_mc",
    "integrate_singular_I2",
]
