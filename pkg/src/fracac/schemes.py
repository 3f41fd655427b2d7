"""Time stepping for the time-fractional Allen-Cahn equation

.. math::

    \\partial_t^\\alpha u - \\kappa^2 \\Delta u = u - u^3

with the Caputo derivative replaced by backward-Euler convolution quadrature.
With ``a = tau**alpha`` and the fractional extrapolation ``u_{n,alpha}`` every
step reduces to one elliptic problem:

========  ================================================================
``CS``    ``(I - a k^2 Lap) u + a u^3 = u_{n,alpha} + a u_{n-1}``
``WCS``   ``(I - a k^2 Lap) u + a u^3 = (1 + a) u_{n,alpha}``
``LWS``   ``((1 + a S) I - a k^2 Lap) u
          = (1 + (S + 1) a) u_{n,alpha} - a u_{n,alpha}^3``
========  ================================================================

The two nonlinear problems are strictly monotone and solved by Newton's
method; the Jacobian ``(1 + 3 a u^2) I - a k^2 Lap`` is SPD at every iterate.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from fracac import cq
from fracac.diagnostics import DiagnosticsSeries, energy
from fracac.spatial import (
    ConvergenceError,
    GridSpec,
    apply_laplacian,
    max_norm,
    solve_helmholtz,
)

log = logging.getLogger(__name__)


class Scheme(str, enum.Enum):
    CS = "CS"
    WCS = "WCS"
    LWS = "LWS"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str) and value.upper() in cls.__members__:
            return cls[value.upper()]
        return None


class StepFailure(RuntimeError):
    """A time step could not be completed; carries the partial trajectory."""

    def __init__(self, message: str, step: int, trajectory: "Trajectory | None" = None):
        super().__init__(message)
        self.step = step
        self.trajectory = trajectory


class ConstraintWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SchemeConfig:
    variant: Scheme
    alpha: float
    kappa: float
    tau: float
    #: stabilization constant (LWS only)
    S: float = 2.0
    newton_tol: float = 1.0e-11
    newton_max: int = 50
    cg_tol: float = 1.0e-12
    #: drop the reaction term, leaving the BE-CQ scheme for the linear problem
    linear_mode: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Scheme(self.variant))
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.kappa >= 0.0:
            raise ValueError(f"kappa must be non-negative, got {self.kappa}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.S >= 0.0:
            raise ValueError(f"S must be non-negative, got {self.S}")

        if self.variant == Scheme.LWS and not self.constraint_ok:
            warnings.warn(
                f"S + tau^-alpha = {self.S + self.tau ** -self.alpha:.4g} < 2: "
                "the LWS maximum principle and energy law are not guaranteed",
                ConstraintWarning,
                stacklevel=3,
            )

    @property
    def a(self) -> float:
        return self.tau**self.alpha

    @property
    def constraint_ok(self) -> bool:
        """``S + tau**-alpha >= 2``; always true for the implicit schemes."""
        if self.variant != Scheme.LWS or self.linear_mode:
            return True
        return self.S + self.tau ** (-self.alpha) >= 2.0


# {{{ nonlinear solver


@dataclass
class NewtonResult:
    u: np.ndarray
    iterations: int
    residuals: list[float]


def cubic_residual(
    u: np.ndarray, a: float, kappa: float, rhs: np.ndarray, grid: GridSpec
) -> np.ndarray:
    """``(I - a kappa^2 Lap_h) u + a u^3 - rhs``."""
    return u - a * apply_laplacian(u, grid, kappa) + a * u**3 - rhs


def newton_solve_cubic_helmholtz(
    a: float,
    kappa: float,
    rhs: np.ndarray,
    grid: GridSpec,
    guess: np.ndarray | None = None,
    tol: float = 1.0e-11,
    max_iter: int = 50,
    cg_tol: float = 1.0e-12,
) -> NewtonResult:
    """Solve ``(I - a kappa^2 Lap_h) u + a u^3 = rhs`` by Newton's method.

    Converged when the max-norm of the residual is at most ``tol``. Each
    Jacobian system is solved by conjugate gradients.
    """
    if not a > 0:
        raise ValueError(f"a must be positive, got {a}")

    u = np.zeros(grid.shape) if guess is None else np.array(guess, dtype=np.float64)
    scaled_kappa = math.sqrt(a) * kappa

    r = cubic_residual(u, a, kappa, rhs, grid)
    residuals = [max_norm(r)]
    for it in range(1, max_iter + 1):
        if residuals[-1] <= tol:
            return NewtonResult(u, it - 1, residuals)

        try:
            du = solve_helmholtz(1.0 + 3.0 * a * u**2, scaled_kappa, r, grid, tol=cg_tol)
        except ConvergenceError as exc:
            raise ConvergenceError(
                f"Newton iteration {it}: {exc}", u, residuals
            ) from exc

        u -= du
        r = cubic_residual(u, a, kappa, rhs, grid)
        residuals.append(max_norm(r))

    if residuals[-1] <= tol:
        return NewtonResult(u, max_iter, residuals)

    raise ConvergenceError(
        f"Newton did not converge in {max_iter} iterations: "
        f"residual {residuals[-1]:.3e} > {tol:.1e}",
        u,
        residuals,
    )


# }}}


# {{{ solver state


@dataclass
class SolverState:
    """Full time history ``u_0, ..., u_n`` of a run.

    The history is kept densely since every step needs all of it.
    """

    config: SchemeConfig
    grid: GridSpec
    history: np.ndarray = field(repr=False)
    weights: cq.CQWeights = field(repr=False)
    n: int = 0
    last_iterations: int = 0

    @classmethod
    def create(
        cls, config: SchemeConfig, grid: GridSpec, u0: np.ndarray, capacity: int
    ) -> SolverState:
        u0 = np.asarray(u0, dtype=np.float64)
        if u0.shape != grid.shape:
            raise ValueError(f"u0 has shape {u0.shape}, expected {grid.shape}")
        if not np.all(np.isfinite(u0)):
            raise ValueError("u0 must be finite")

        history = np.empty((capacity + 1, *grid.shape))
        history[0] = u0
        weights = cq.cq_weights(config.alpha, 0, max(capacity, 1))
        return cls(config=config, grid=grid, history=history, weights=weights)

    @property
    def current(self) -> np.ndarray:
        return self.history[self.n]

    @property
    def capacity(self) -> int:
        return self.history.shape[0] - 1

    def extrapolation(self, n: int | None = None) -> np.ndarray:
        """``u_{n,alpha}`` from the stored history (default: the next step)."""
        if n is None:
            n = self.n + 1
        if not 1 <= n <= self.n + 1:
            raise ValueError(f"extrapolation to step {n} needs u_0..u_{n - 1}")
        c = cq.extrapolation_coefficients(self.weights, n)
        return cq.weighted_sum(c, self.history[:n])

    def append(self, u: np.ndarray) -> None:
        if self.n >= self.capacity:
            grown = np.empty((2 * self.capacity + 1, *self.grid.shape))
            grown[: self.n + 1] = self.history[: self.n + 1]
            self.history = grown
            self.weights = cq.cq_weights(self.config.alpha, 0, self.capacity)

        self.n += 1
        self.history[self.n] = u


def scheme_rhs(state: SolverState, u_alpha: np.ndarray) -> np.ndarray:
    """Right-hand side of the elliptic problem for step ``n + 1``."""
    cfg = state.config
    a = cfg.a
    if cfg.linear_mode:
        return u_alpha
    if cfg.variant == Scheme.CS:
        return u_alpha + a * state.current
    if cfg.variant == Scheme.WCS:
        return (1.0 + a) * u_alpha
    return (1.0 + (cfg.S + 1.0) * a) * u_alpha - a * u_alpha**3


def _step_implicit(state: SolverState, u_alpha: np.ndarray) -> np.ndarray:
    cfg = state.config
    rhs = scheme_rhs(state, u_alpha)
    if cfg.linear_mode:
        u = solve_helmholtz(
            1.0, math.sqrt(cfg.a) * cfg.kappa, rhs, state.grid,
            tol=cfg.cg_tol, x0=state.current,
        )
        state.last_iterations = 0
        return u

    result = newton_solve_cubic_helmholtz(
        cfg.a, cfg.kappa, rhs, state.grid,
        guess=state.current,
        tol=cfg.newton_tol, max_iter=cfg.newton_max, cg_tol=cfg.cg_tol,
    )
    state.last_iterations = result.iterations
    return result.u


def _advance(state: SolverState, variant: Scheme, u_alpha: np.ndarray | None) -> np.ndarray:
    if state.config.variant != variant:
        raise ValueError(f"state is configured for {state.config.variant.value}")
    if u_alpha is None:
        u_alpha = state.extrapolation()

    if variant == Scheme.LWS and not state.config.linear_mode:
        cfg = state.config
        u = solve_helmholtz(
            1.0 + cfg.a * cfg.S, math.sqrt(cfg.a) * cfg.kappa,
            scheme_rhs(state, u_alpha), state.grid,
            tol=cfg.cg_tol, x0=state.current,
        )
        state.last_iterations = 0
    else:
        u = _step_implicit(state, u_alpha)

    state.append(u)
    return u


def step_cs(state: SolverState, u_alpha: np.ndarray | None = None) -> np.ndarray:
    """Convex splitting step: concave part lagged to ``u_n``."""
    return _advance(state, Scheme.CS, u_alpha)


def step_wcs(state: SolverState, u_alpha: np.ndarray | None = None) -> np.ndarray:
    """Weighted convex splitting step: concave part at ``u_{n+1,alpha}``."""
    return _advance(state, Scheme.WCS, u_alpha)


def step_lws(state: SolverState, u_alpha: np.ndarray | None = None) -> np.ndarray:
    """Linear weighted stabilized step (a single linear solve)."""
    return _advance(state, Scheme.LWS, u_alpha)


STEPPERS: dict[Scheme, Callable[..., np.ndarray]] = {
    Scheme.CS: step_cs,
    Scheme.WCS: step_wcs,
    Scheme.LWS: step_lws,
}


def scheme_residual(state: SolverState, n: int) -> float:
    """Max-norm residual of the scheme equation at an accepted step ``n``."""
    cfg = state.config
    u = state.history[n]
    u_alpha = state.extrapolation(n)
    saved, state.n = state.n, n - 1
    try:
        rhs = scheme_rhs(state, u_alpha)
    finally:
        state.n = saved

    a = cfg.a
    lhs = u - a * apply_laplacian(u, state.grid, cfg.kappa)
    if cfg.linear_mode:
        pass
    elif cfg.variant == Scheme.LWS:
        lhs = lhs + a * cfg.S * u
    else:
        lhs = lhs + a * u**3

    return max_norm(lhs - rhs)


# }}}


# {{{ driver


@dataclass
class Trajectory:
    config: SchemeConfig
    grid: GridSpec
    history: np.ndarray = field(repr=False)
    diagnostics: DiagnosticsSeries = field(repr=False)
    #: requested snapshot time -> step index
    snapshots: dict[float, int] = field(default_factory=dict)

    @property
    def n_steps(self) -> int:
        return self.history.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return self.config.tau * np.arange(self.n_steps + 1)

    def __getitem__(self, n: int) -> np.ndarray:
        return self.history[n]

    def __len__(self) -> int:
        return self.history.shape[0]


def run(
    config: SchemeConfig,
    grid: GridSpec,
    u0: np.ndarray,
    n_steps: int,
    snapshot_times: Sequence[float] = (),
    callback: Callable[[SolverState], None] | None = None,
) -> Trajectory:
    """Advance ``n_steps`` steps and record per-step diagnostics."""
    if n_steps < 0 or int(n_steps) != n_steps:
        raise ValueError(f"n_steps must be a non-negative integer, got {n_steps}")

    state = SolverState.create(config, grid, u0, n_steps)
    stepper = STEPPERS[config.variant]
    weighted = config.variant in (Scheme.WCS, Scheme.LWS)

    def E(u: np.ndarray) -> float:
        return energy(u, grid, config.kappa, potential=not config.linear_mode)

    energies = [E(state.current)]
    energies_alpha = [math.nan]
    norms = [max_norm(state.current)]
    iters = [0]

    def partial() -> Trajectory:
        n = state.n
        series = DiagnosticsSeries.from_lists(
            config, energies, energies_alpha, norms, iters, weighted
        )
        return Trajectory(config, grid, state.history[: n + 1], series)

    for n in range(1, n_steps + 1):
        u_alpha = state.extrapolation()
        try:
            u = stepper(state, u_alpha)
        except (ConvergenceError, FloatingPointError) as exc:
            raise StepFailure(f"step {n} failed: {exc}", n, partial()) from exc

        energies.append(E(u))
        energies_alpha.append(E(u_alpha))
        norms.append(max_norm(u))
        iters.append(state.last_iterations)
        if callback is not None:
            callback(state)

    series = DiagnosticsSeries.from_lists(
        config, energies, energies_alpha, norms, iters, weighted
    )
    traj = Trajectory(config, grid, state.history[: n_steps + 1], series)
    for t in snapshot_times:
        traj.snapshots[float(t)] = min(n_steps, max(0, int(round(t / config.tau))))

    log.debug(
        "%s alpha=%g tau=%g: %d steps, final energy %.6e",
        config.variant.value, config.alpha, config.tau, n_steps, energies[-1],
    )
    return traj


# }}}
