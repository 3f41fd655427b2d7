"""
Observed temporal order on smooth data
======================================

Without an exact solution we compare runs at tau and tau/2 and take the
largest difference over the common time levels. The least-squares slope of
those errors against the refinement level is the observed order, which should
sit near alpha.

This runs a reduced version of the acceptance study (a 31 x 31 grid and four
step counts) so that it finishes in well under a minute. The full study is
``fracac converge smooth_convergence --alphas 0.4,0.6,0.8 --schemes CS,WCS,LWS``.
"""

from __future__ import annotations

from dataclasses import replace

from fracac import drivers
from fracac.cli import resolve_config

cfg = replace(resolve_config("smooth_convergence"), cells=(31, 31), N=64)
report = drivers.converge(cfg, levels=4, alphas=[0.4, 0.8], schemes=["CS", "WCS", "LWS"])

print(report.to_csv(), end="")
for case in report.cases:
    print(f"{case.scheme.value} alpha={case.alpha}: rate {case.rate:.3f}, "
          f"pairwise {' '.join(f'{r:.3f}' for r in case.pairwise)}")

# The linear problem has an exact answer; at t = T the error is first order.
lin = drivers.converge(resolve_config("ml_linear"), levels=4)
print(f"\nlinear eigenmode, error at T against Mittag-Leffler: rate {lin.cases[0].rate:.3f}")
