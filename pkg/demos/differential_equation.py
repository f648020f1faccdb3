"""
The differential equation behind the series
===========================================

``J_3`` satisfies a fourth-order linear ODE in ``eta``.  Feeding it
finite differences of the series shows the residual falling as ``h**4``
until rounding takes over.
"""
from watsonlattice.odecheck import j_general_fd_residual, j_operator_coefficients

# %%
# The operator built from Stirling numbers, as polynomial coefficients of
# each derivative order.
for order, poly in enumerate(j_operator_coefficients(3)):
    print(order, dict(sorted(poly.items())))

# %%
# Near eta = 1 truncation error dominates, so a tenfold smaller step cuts
# the residual by about 10**4 until the rounding estimate catches up.
for h in (2e-2, 1e-2, 5e-3, 1e-3):
    r = j_general_fd_residual(3, 1.1, h)
    print(f"h={h:.0e}: residual {r.residual:.2e} (rounding estimate {r.noise:.1e})")
