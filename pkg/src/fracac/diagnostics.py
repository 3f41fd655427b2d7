"""Energy, fractional energy dissipation and convergence-rate estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from fracac import cq
from fracac.spatial import GridSpec, l2_norm

MAX_PRINCIPLE_TOL = 1.0e-12
ENERGY_TOL = 1.0e-10


# {{{ energy


def double_well(u: np.ndarray) -> np.ndarray:
    return 0.25 * (1.0 - u**2) ** 2


def gradient_energy(u: np.ndarray, grid: GridSpec, kappa: float) -> float:
    """``kappa^2 / 2 * sum_edges |D u|^2`` weighted by the cell volume.

    Differences run over every edge, including the edges to the zero boundary
    values, so that the result equals ``-(kappa^2 / 2) <Lap_h u, u>``.
    """
    total = 0.0
    for axis, h in enumerate(grid.h):
        pad = [(0, 0)] * grid.dim
        pad[axis] = (1, 1)
        d = np.diff(np.pad(u, pad), axis=axis) / h
        total += float(np.sum(d * d))

    return 0.5 * kappa**2 * grid.cell_volume * total


def energy(
    u: np.ndarray, grid: GridSpec, kappa: float, potential: bool = True
) -> float:
    """Discrete Ginzburg-Landau energy
    ``sum kappa^2/2 |grad_h u|^2 + (1 - u^2)^2 / 4``.

    With ``potential=False`` only the quadratic gradient part is returned,
    which is the natural energy of the linear problem.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {grid.shape}")

    e = gradient_energy(u, grid, kappa)
    if potential:
        e += grid.cell_volume * float(np.sum(double_well(u)))
    return e


def frac_energy_derivative(
    energy_series: Sequence[float] | np.ndarray, alpha: float, tau: float
) -> np.ndarray:
    """BE-CQ derivative of a scalar series, for ``n = 1, ..., N``.

    Agrees bit for bit with :func:`fracac.cq.frac_derivative` applied at each
    ``n``: every entry accumulates its terms in increasing ``j``.
    """
    e = np.asarray(energy_series, dtype=np.float64)
    N = e.size - 1
    if N < 1:
        raise ValueError("the energy series needs at least two entries")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")

    w = cq.cq_weights(alpha, 0, N).weights
    d = e - e[0]

    # out[n - 1] = sum_{j=1}^n w_{n-j} d_j; loop j outermost to keep the order
    out = w[: N] * d[1]
    for j in range(2, N + 1):
        out[j - 1 :] = out[j - 1 :] + w[: N - j + 1] * d[j]

    return tau ** (-alpha) * out


# }}}


# {{{ per-run series


@dataclass
class DiagnosticsSeries:
    """Per-step observables of a run; index ``n`` refers to ``u_n``.

    ``frac_energy_deriv[0]`` is undefined and stored as NaN, as is
    ``energy_extrapolated[0]``.
    """

    times: np.ndarray
    energy: np.ndarray
    energy_extrapolated: np.ndarray
    frac_energy_deriv: np.ndarray
    max_norm: np.ndarray
    newton_iters: np.ndarray
    constraint_ok: bool
    #: ``max_norm <= 1 + tol``
    max_principle_ok: np.ndarray = field(repr=False)
    #: CS: ``E(u_n) <= E(u_0) + tol``; WCS/LWS: ``E(u_n) <= E(u_{n,alpha}) + tol``
    energy_ok: np.ndarray = field(repr=False)

    @classmethod
    def from_lists(
        cls,
        config: Any,
        energies: list[float],
        energies_alpha: list[float],
        norms: list[float],
        iters: list[int],
        weighted: bool,
    ) -> DiagnosticsSeries:
        e = np.array(energies)
        ea = np.array(energies_alpha)
        n = e.size

        dE = np.full(n, np.nan)
        if n > 1:
            dE[1:] = frac_energy_derivative(e, config.alpha, config.tau)

        if weighted:
            energy_ok = np.concatenate([[True], e[1:] <= ea[1:] + ENERGY_TOL])
        else:
            energy_ok = e <= e[0] + ENERGY_TOL

        norms_arr = np.array(norms)
        return cls(
            times=config.tau * np.arange(n),
            energy=e,
            energy_extrapolated=ea,
            frac_energy_deriv=dE,
            max_norm=norms_arr,
            newton_iters=np.array(iters, dtype=int),
            constraint_ok=bool(config.constraint_ok),
            max_principle_ok=norms_arr <= 1.0 + MAX_PRINCIPLE_TOL,
            energy_ok=energy_ok,
        )

    def __len__(self) -> int:
        return self.energy.size

    def to_csv(self) -> str:
        """``n,t,energy,frac_deriv_energy,max_norm,newton_iters,constraint_ok``."""

        def fmt(x: float) -> str:
            return repr(float(x))

        lines = ["n,t,energy,frac_deriv_energy,max_norm,newton_iters,constraint_ok"]
        for n in range(len(self)):
            lines.append(",".join([
                str(n),
                fmt(self.times[n]),
                fmt(self.energy[n]),
                fmt(self.frac_energy_deriv[n]),
                fmt(self.max_norm[n]),
                str(int(self.newton_iters[n])),
                str(int(self.constraint_ok)),
            ]))
        return "\n".join(lines) + "\n"


# }}}


# {{{ convergence


def _stack(trajectory: Any) -> np.ndarray:
    return np.asarray(getattr(trajectory, "history", trajectory))


def self_convergence_error(traj_coarse: Any, traj_fine: Any, grid: GridSpec) -> float:
    """``max_{1 <= n <= N} || u_tau^n - u_{tau/2}^{2n} ||_{L^2}``."""
    coarse = _stack(traj_coarse)
    fine = _stack(traj_fine)
    if coarse.shape[1:] != grid.shape or fine.shape[1:] != grid.shape:
        raise ValueError("trajectories do not live on the given grid")

    N = coarse.shape[0] - 1
    if fine.shape[0] - 1 != 2 * N:
        raise ValueError(
            f"fine trajectory has {fine.shape[0] - 1} steps, expected {2 * N}"
        )
    if N < 1:
        raise ValueError("trajectories need at least one step")

    return max(l2_norm(coarse[n] - fine[2 * n], grid) for n in range(1, N + 1))


def pairwise_rates(errors: Sequence[float]) -> np.ndarray:
    e = np.asarray(errors, dtype=np.float64)
    return np.log2(e[:-1] / e[1:])


def observed_rate(errors: Sequence[float]) -> float:
    """Least-squares slope of ``-log2(e)`` against the refinement level."""
    e = np.asarray(errors, dtype=np.float64)
    if e.size < 3:
        raise ValueError(f"at least 3 errors are required, got {e.size}")
    if np.any(~(e > 0)) or not np.all(np.isfinite(e)):
        raise ValueError(f"errors must be positive and finite: {e}")

    levels = np.arange(e.size, dtype=np.float64)
    slope = np.polyfit(levels, np.log2(e), 1)[0]
    return float(-slope)


def max_principle_monitor(trajectory: Any, tol: float = MAX_PRINCIPLE_TOL) -> int | None:
    """Index of the first ``u_n`` with ``max |u_n| > 1 + tol``, else ``None``."""
    frames = _stack(trajectory)
    if frames.shape[0] == 0:
        raise ValueError("empty trajectory")

    for n, u in enumerate(frames):
        if np.max(np.abs(u)) > 1.0 + tol:
            return n
    return None


def enclosed_area(u: np.ndarray, grid: GridSpec) -> float:
    """Cell volume times the number of nodes with ``u > 0``."""
    return grid.cell_volume * int(np.count_nonzero(np.asarray(u) > 0.0))


# }}}
