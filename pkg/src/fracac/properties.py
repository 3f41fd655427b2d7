"""Randomized checks of the structural properties behind the schemes.

Each check returns a :class:`PropertyResult`; a check passes when it finds no
violation. ``trials`` sets the number of random instances drawn by each check
(the cubic inequality draws ``100 * trials`` sample pairs), and all draws come
from a :class:`numpy.random.Generator` seeded once per check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from fracac import cq
from fracac.spatial import (
    GridSpec,
    apply_laplacian,
    inner,
    max_norm,
    solve_helmholtz,
)

ALPHA_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)
N_WEIGHTS = 10_000


@dataclass(frozen=True)
class PropertyResult:
    name: str
    checked: int
    violations: int
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.name},{status},{self.checked},{self.violations},{self.detail}"


# {{{ weights


def check_weight_signs(rng: np.random.Generator, trials: int) -> PropertyResult:
    checked = violations = 0
    for alpha in ALPHA_GRID:
        w = cq.cq_weights(alpha, 0, N_WEIGHTS).weights
        violations += int(not w[0] == 1.0) + int(np.count_nonzero(w[1:] >= 0.0))
        checked += w.size
    return PropertyResult("weight_signs", checked, violations)


def check_partial_sums(rng: np.random.Generator, trials: int) -> PropertyResult:
    """Partial sums positive and strictly decreasing, decaying like n^-alpha."""
    checked = violations = 0
    slopes = []
    for alpha in ALPHA_GRID:
        s = cq.cq_weights(alpha, 0, N_WEIGHTS).partial_sums()
        violations += int(np.count_nonzero(s <= 0.0))
        violations += int(np.count_nonzero(np.diff(s) >= 0.0))
        checked += 2 * s.size - 1

        n = np.arange(100, N_WEIGHTS + 1)
        slope = np.polyfit(np.log(n), np.log(s[n]), 1)[0]
        slopes.append(slope)
        violations += int(abs(slope + alpha) > 0.05)
        checked += 1

    detail = "slopes " + " ".join(f"{x:.4f}" for x in slopes)
    return PropertyResult("partial_sums", checked, violations, detail)


def check_alpha_minus_one_bound(rng: np.random.Generator, trials: int) -> PropertyResult:
    """``0 < w_n < (n + 1)^-alpha``; at ``n = 0`` both sides equal 1."""
    checked = violations = 0
    for alpha in (*ALPHA_GRID, 0.6):
        w = cq.cq_weights(alpha, -1, N_WEIGHTS).weights
        bound = (np.arange(w.size) + 1.0) ** (-alpha)
        violations += int(w[0] != 1.0)
        violations += int(np.count_nonzero(~((w[1:] > 0.0) & (w[1:] < bound[1:]))))
        checked += w.size
    return PropertyResult("alpha_minus_one_bound", checked, violations)


def check_extrapolation_convexity(rng: np.random.Generator, trials: int) -> PropertyResult:
    """``c_j >= 0`` and ``sum c_j = 1`` within 1e-14 for n <= 10^4."""
    checked = violations = 0
    worst = 0.0
    for alpha in ALPHA_GRID:
        w = cq.cq_weights(alpha, 0, N_WEIGHTS)
        ns = np.unique(np.concatenate([
            np.arange(1, 257), [N_WEIGHTS + 1],
            rng.integers(1, N_WEIGHTS + 2, size=max(1, trials // 100)),
        ]))
        for n in ns:
            c = cq.extrapolation_coefficients(w, int(n))
            dev = abs(math.fsum(c) - 1.0)
            worst = max(worst, dev)
            violations += int(np.count_nonzero(c < 0.0)) + int(dev > 1.0e-14)
            checked += 1
    return PropertyResult("extrapolation_convexity", checked, violations,
                          f"max |sum - 1| = {worst:.2e}")


def check_extrapolation_identity(rng: np.random.Generator, trials: int) -> PropertyResult:
    """``u_n - u_{n,alpha} = tau^alpha dbar^alpha u_n``."""
    checked = violations = 0
    for _ in range(min(trials, 2000)):
        alpha = rng.uniform(0.05, 0.95)
        n = int(rng.integers(1, 65))
        tau = rng.uniform(1.0e-3, 1.0)
        u = rng.uniform(-1.0, 1.0, size=n + 1)

        w = cq.cq_weights(alpha, 0, n)
        lhs = u[n] - cq.frac_extrapolation(u, w, n)
        rhs = tau**alpha * cq.frac_derivative(u, w, tau, n)
        scale = max(1.0, float(np.max(np.abs(u))))
        violations += int(abs(lhs - rhs) > 1.0e-13 * scale * n)
        checked += 1
    return PropertyResult("extrapolation_identity", checked, violations)


def check_cq_positivity(rng: np.random.Generator, trials: int) -> PropertyResult:
    checked = violations = 0
    worst = math.inf
    for _ in range(trials):
        alpha = rng.uniform(0.05, 0.95)
        N = int(rng.integers(1, 65))
        tau = rng.uniform(1.0e-3, 1.0)
        u = rng.uniform(-1.0, 1.0, size=N + 1) * rng.uniform(0.1, 10.0)

        value = cq.cq_positivity_functional(
            u, cq.cq_weights(alpha, 0, N), cq.cq_weights(alpha, -1, N), tau
        )
        scale = float(np.max(np.abs(u))) ** 2
        worst = min(worst, value / scale)
        violations += int(value < -1.0e-12 * scale)
        checked += 1
    return PropertyResult("cq_positivity", checked, violations,
                          f"min value/max|u|^2 = {worst:.3e}")


# }}}


# {{{ nonlinearity and spatial operators


def cubic_inequality_violations(a: np.ndarray, b: np.ndarray) -> int:
    """``(a^3 - b)(a - b) >= (a^2 - 1)^2 / 4 - (b^2 - 1)^2 / 4``.

    Both sides vanish as ``a -> b``, so a relative slack of 1e-13 absorbs the
    rounding of the two products.
    """
    lhs = (a**3 - b) * (a - b)
    rhs = 0.25 * (a * a - 1.0) ** 2 - 0.25 * (b * b - 1.0) ** 2
    scale = 1.0 + a**4 + b**4
    return int(np.count_nonzero(lhs - rhs < -1.0e-13 * scale))


def check_cubic_inequality(rng: np.random.Generator, trials: int) -> PropertyResult:
    samples = 100 * trials
    violations = 0
    for start in range(0, samples, 100_000):
        m = min(100_000, samples - start)
        a = rng.uniform(-2.0, 2.0, size=m)
        b = rng.uniform(-2.0, 2.0, size=m)
        violations += cubic_inequality_violations(a, b)
    return PropertyResult("cubic_inequality", samples, violations)


def _grids() -> list[GridSpec]:
    return [
        GridSpec.uniform(1, 1.0, 31),
        GridSpec.uniform(1, 2.0 * math.pi, 127),
        GridSpec(2, (1.0, 2.0), (15, 23)),
        GridSpec.uniform(2, 2.0 * math.pi, 31),
    ]


def check_laplacian(rng: np.random.Generator, trials: int) -> PropertyResult:
    """Symmetry and strict negativity of the discrete Laplacian."""
    checked = violations = 0
    for grid in _grids():
        for _ in range(max(1, min(trials, 500) // 4)):
            u = rng.standard_normal(grid.shape)
            v = rng.standard_normal(grid.shape)
            kappa = rng.uniform(0.05, 2.0)
            Lu = apply_laplacian(u, grid, kappa)
            Lv = apply_laplacian(v, grid, kappa)

            uv, vu = inner(Lu, v, grid), inner(u, Lv, grid)
            # relative to the Cauchy-Schwarz bound, as <Lu, v> may cancel
            scale = math.sqrt(inner(Lu, Lu, grid) * inner(v, v, grid))
            violations += int(abs(uv - vu) > 1.0e-12 * scale)
            violations += int(not inner(Lu, u, grid) < 0.0)
            checked += 2
    return PropertyResult("laplacian_symmetry_negativity", checked, violations)


def check_helmholtz_max_bound(rng: np.random.Generator, trials: int) -> PropertyResult:
    """``|rhs| <= c`` implies ``|(cI - k^2 Lap)^-1 rhs| <= 1``."""
    checked = violations = 0
    worst = 0.0
    for grid in _grids():
        for _ in range(max(1, min(trials, 200) // 4)):
            c = rng.uniform(0.1, 5.0)
            kappa = rng.uniform(0.01, 1.0)
            rhs = c * rng.uniform(-1.0, 1.0, size=grid.shape)
            u = solve_helmholtz(c, kappa, rhs, grid, tol=1.0e-12)
            worst = max(worst, max_norm(u))
            violations += int(max_norm(u) > 1.0 + 1.0e-10)
            checked += 1
    return PropertyResult("helmholtz_max_bound", checked, violations,
                          f"max |u| = {worst:.6f}")


def check_scheme_max_principle(rng: np.random.Generator, trials: int) -> PropertyResult:
    """Short runs of every scheme from random data bounded by 1."""
    from fracac.schemes import SchemeConfig, run

    grid = GridSpec.uniform(1, 2.0 * math.pi, 31)
    checked = violations = 0
    for _ in range(max(1, min(trials, 3000) // 1000)):
        for scheme in ("CS", "WCS", "LWS"):
            alpha = float(rng.choice([0.4, 0.6, 0.8]))
            tau = float(rng.choice([1.0e-2, 1.0e-1]))
            u0 = rng.uniform(-1.0, 1.0, size=grid.shape)
            traj = run(SchemeConfig(scheme, alpha, 0.1, tau), grid, u0, 20)
            violations += int(not np.all(traj.diagnostics.max_principle_ok))
            violations += int(not np.all(traj.diagnostics.energy_ok))
            checked += 2
    return PropertyResult("scheme_invariants", checked, violations)


# }}}


CHECKS: dict[str, Callable[[np.random.Generator, int], PropertyResult]] = {
    "weight_signs": check_weight_signs,
    "partial_sums": check_partial_sums,
    "alpha_minus_one_bound": check_alpha_minus_one_bound,
    "extrapolation_convexity": check_extrapolation_convexity,
    "extrapolation_identity": check_extrapolation_identity,
    "cq_positivity": check_cq_positivity,
    "cubic_inequality": check_cubic_inequality,
    "laplacian_symmetry_negativity": check_laplacian,
    "helmholtz_max_bound": check_helmholtz_max_bound,
    "scheme_invariants": check_scheme_max_principle,
}


def run_properties(
    seed: int, trials: int, names: list[str] | None = None
) -> list[PropertyResult]:
    """Run the selected checks (default: all) in a fixed order."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")

    selected = list(CHECKS) if names is None else names
    results = []
    for name in selected:
        # one independent stream per check, so subsets reproduce
        rng = np.random.default_rng([seed, list(CHECKS).index(name)])
        results.append(CHECKS[name](rng, trials))
    return results
