"""
Spin-wave order in the hyper-bcc antiferromagnet
================================================

Zero-point fluctuations reduce the sublattice magnetization below ``S``;
the Green-function integral ``J(d, eta)`` sets the Neel temperature.  In
the isotropic model ``J`` diverges at two dimensions, so order survives
at zero temperature but melts at any finite one.
"""
from watsonlattice.physics import (
    SpinSystem,
    ground_state,
    neel_temperature,
    reduced_critical_temperature,
)

# %%
# Relative magnetization for S = 5/2 approaches one as d grows.
for d in (1.5, 2, 3, 5, 10, 20):
    print(f"d={d:>4}: <S>/S = {ground_state(SpinSystem(2.5, d)).relative:.8f}")

# %%
# The reduced critical temperature vanishes continuously as d -> 2 from
# above, and an easy-axis anisotropy keeps it finite at d = 2.
for d in (3, 2.5, 2.1, 2.01, 2.001, 2):
    print(f"d={d:<5}  isotropic {reduced_critical_temperature(d, 1.0):.5f}"
          f"  eta=1.005 {reduced_critical_temperature(d, 1.005):.5f}")

# %%
# In three dimensions with S = 5/2 (a MnF2-like spin) the Neel temperature
# in units of the exchange constant:
print(f"k_B T_N / J = {neel_temperature(SpinSystem(2.5, 3)).value:.4f}")

# %%
# Each extra dimension doubles the coordination number and, for large d,
# the ordering temperature.
ratio = neel_temperature(SpinSystem(2.5, 15)).value / neel_temperature(SpinSystem(2.5, 14)).value
print(f"T_N(15) / T_N(14) = {ratio:.6f}")
