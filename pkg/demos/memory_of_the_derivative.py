"""
The memory of a discrete Caputo derivative
==========================================

Backward-Euler convolution quadrature replaces the Caputo derivative by a
weighted sum over the whole history. This script looks at the weights, at the
convex "fractional extrapolation" hidden inside them, and at a scalar test
problem whose exact solution is a Mittag-Leffler function.

Run with ``python3 demos/memory_of_the_derivative.py``.
"""

from __future__ import annotations

import numpy as np

from fracac import cq, drivers
from fracac.mittag_leffler import mittag_leffler

# %%
# The weights are (-1)^j binom(alpha, j): one positive entry, then a long
# negative tail whose partial sums decay like n^-alpha.

for alpha in (0.3, 0.7):
    w = cq.cq_weights(alpha, 0, 1000)
    s = w.partial_sums()
    print(f"alpha={alpha}: w[:4] = {np.round(w.weights[:4], 5)}, "
          f"sum up to 1000 = {s[-1]:.4e}, 1000^-alpha = {1000.0 ** -alpha:.4e}")

# %%
# Moving the history to the right-hand side gives u_n = u_{n,alpha} + tau^alpha
# times the derivative. The coefficients of u_{n,alpha} are nonnegative and
# sum to one, which is what makes maximum principles possible.

w = cq.cq_weights(0.5, 0, 50)
c = cq.extrapolation_coefficients(w, 50)
print(f"\nextrapolation to n=50: min c_j = {c.min():.3e}, sum c_j = {c.sum():.15f}")
print("oldest and newest weights:", np.round(c[[0, 1, -2, -1]], 4))

# %%
# Scalar relaxation d^alpha y + y = 0, y(0) = 1. The scheme is first order at
# t = 1 even though the solution has a t^alpha singularity at the origin.

taus = [2.0**-k for k in range(4, 11)]
for alpha in (0.3, 0.8):
    rows = drivers.ml_check(alpha, 1.0, taus)
    ratios = drivers.error_ratios(rows)
    print(f"\nalpha={alpha}: E(-1) = {mittag_leffler(alpha, 1.0, -1.0):.12f}")
    for r in rows:
        print(f"  tau=2^{int(np.log2(r.tau)):d}  y_N={r.numeric:.12f}  error={r.abs_error:.3e}")
    print("  halving ratios:", " ".join(f"{x:.3f}" for x in ratios))
