"""
Checking the series against brute-force integration
===================================================

The hypergeometric closed forms are only as trustworthy as the
derivations behind them.  Nested adaptive quadrature checks them in up
to three dimensions; seeded Monte Carlo covers higher ones.
"""
from watsonlattice.lattice import LatticeQuery, evaluate
from watsonlattice.oracle import QuadratureConfig, integrate_direct, integrate_mc

# %%
# Low dimensions: nested Gauss-Kronrod quadrature.
for family in ("I", "Itilde", "J", "Gferro"):
    q = LatticeQuery(family, 3, 1.1)
    ref = integrate_direct(q)
    print(f"{family:7s} series {evaluate(q).value:.12f}  quadrature {ref.value:.12f}")

# %%
# Five dimensions with a million samples.  The result does not depend on
# the worker count because each shard owns a spawned random stream.
config = QuadratureConfig(mc_samples=1_000_000, rng_seed=42)
q = LatticeQuery("J", 5, 2.0)
mc = integrate_mc(q, config, workers=2)
series = evaluate(q).value
print(f"J_5(2): series {series:.8f}  MC {mc.value:.8f} +- {mc.error_estimate:.1e}"
      f"  ({abs(series - mc.value) / mc.error_estimate:.2f} sigma)")
