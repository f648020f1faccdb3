"""
Dimension as a continuous parameter
===================================

Every coefficient of the bcc series is a power of ``(1/2)_m / m!`` with
exponent ``d + 1``, so ``d`` need not be an integer.  This script traces
``I(d, eta)`` between one and five dimensions, as in the figure-data
command, and looks at how fast a fixed truncation converges.
"""
import numpy as np

from watsonlattice.hyperseries import SeriesControl, beta_coefficient
from watsonlattice.lattice import bcc_i, bcc_i_continuous

# %%
# Integer points of the continuous curve agree with the pFq evaluation.
for d in (2, 3, 4):
    print(d, bcc_i_continuous(d, 1.0).value - bcc_i(d, 1.0))

# %%
# Ten thousand terms, no tail correction: the bound shrinks quickly as d
# moves away from the divergence at d = 1.
truncated = SeriesControl(fixed_M=10_000)
print(f"{'d':>5} {'I(d,1)':>10} {'tail bound':>11} {'I(d,1.005)':>11}")
for d in np.arange(1.25, 5.01, 0.5):
    iso = bcc_i_continuous(d, 1.0, truncated)
    aniso = bcc_i_continuous(d, 1.005, truncated)
    print(f"{d:5.2f} {iso.value:10.6f} {iso.tail_bound:11.1e} {aniso.value:11.6f}")

# %%
# Close to d = 1 the last included term is still sizable, while a gap of
# half a percent in eta crushes it by the factor eta**(-2M).
last = beta_coefficient(1.01, 10_000)
print(f"last term at d=1.01: {last:.3e} isotropic, "
      f"{last * 1.005 ** -20_000:.3e} at eta=1.005")
