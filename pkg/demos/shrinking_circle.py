"""
A shrinking circle and the effect of alpha
==========================================

A disc of radius pi/2 shrinks under the Allen-Cahn flow. Counting nodes with
u > 0 gives the enclosed area. For every alpha the area is nonincreasing once
the initial profile has relaxed. The fractional runs start faster but slow
down later, so a small alpha reaches a given area at a later step than
alpha near 1.

Run with ``python3 demos/shrinking_circle.py`` (about two minutes).
"""

from __future__ import annotations

import numpy as np

from fracac.cli import resolve_config
from fracac.diagnostics import enclosed_area
from fracac.schemes import run

cfg = resolve_config("circle_2d")
grid = cfg.grid()
u0 = cfg.initial_field(grid)
a0 = enclosed_area(u0, grid)
print(f"initial area {a0:.4f} (pi R^2 = {np.pi * (np.pi / 2) ** 2:.4f})")

for alpha in (0.5, 0.7, 0.9, 1.0 - 1e-10):
    traj = run(cfg.scheme_config(alpha=alpha), grid, u0, cfg.n_steps)
    area = np.array([enclosed_area(u, grid) for u in traj.history])

    first = {f: int(np.argmax(area <= f * a0)) for f in (0.995, 0.985)}
    print(f"alpha={alpha:.10g}: area(T) = {area[-1]:.4f}, "
          f"reaches 0.995 A0 at n={first[0.995]}, 0.985 A0 at n={first[0.985]}, "
          f"increases after n=50: {int(np.sum(np.diff(area[50:]) > 0))}")
