"""Experiment drivers behind the command-line interface.

Each driver returns plain data and writes files only into the directory it is
given, so that it can also be used from scripts and tests.
"""

from __future__ import annotations

import logging
import math
import os
import pathlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from fracac import cq, diagnostics
from fracac.config import RunConfig
from fracac.mittag_leffler import mittag_leffler
from fracac.schemes import Scheme, Trajectory, run
from fracac.spatial import (
    Field,
    GridSpec,
    l2_norm,
    laplacian_eigenvalue,
    write_snapshot,
)

log = logging.getLogger(__name__)

#: observed rates must lie within this distance of the expected order
RATE_TOL = 0.12

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4


def _fmt(x: float) -> str:
    # shortest text that round-trips to the same double
    return repr(float(x))


# {{{ run


@dataclass
class RunReport:
    trajectory: Trajectory
    #: invariant name -> "pass", "fail" or "not asserted (...)"
    verdicts: dict[str, str]
    output_dir: pathlib.Path | None = None

    @property
    def ok(self) -> bool:
        return all(v != "fail" for v in self.verdicts.values())

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.ok else EXIT_INVARIANT


def invariant_verdicts(traj: Trajectory) -> dict[str, str]:
    """Check the discrete invariants that the scheme guarantees.

    The maximum principle is asserted for ``|u_0| <= 1``, the energy law
    always; both are downgraded for LWS when ``S + tau^-alpha < 2``. The
    sign of the fractional energy derivative is reported but not asserted.
    """
    cfg = traj.config
    series = traj.diagnostics
    verdicts = {}

    def verdict(ok: bool) -> str:
        return "pass" if ok else "fail"

    downgrade = "not asserted (S + tau^-alpha < 2)"
    if not cfg.constraint_ok:
        verdicts["max_principle"] = downgrade
    elif series.max_norm[0] > 1.0:
        verdicts["max_principle"] = "not asserted (|u_0| > 1)"
    else:
        verdicts["max_principle"] = verdict(bool(np.all(series.max_principle_ok)))

    name = "energy_stability" if cfg.variant == Scheme.CS else "weighted_energy_stability"
    if not cfg.constraint_ok:
        verdicts[name] = downgrade
    else:
        verdicts[name] = verdict(bool(np.all(series.energy_ok)))

    dE = series.frac_energy_deriv[1:]
    if dE.size:
        observed = "nonpositive" if np.all(dE <= 1.0e-8) else "positive entries"
        verdicts["frac_dissipation"] = f"not asserted ({observed})"

    return verdicts


def write_run_outputs(
    traj: Trajectory, verdicts: dict[str, str], outdir: pathlib.Path,
    emit_pgm: bool = False,
) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "series.csv").write_text(traj.diagnostics.to_csv())

    for t, n in sorted(traj.snapshots.items()):
        path = outdir / f"field_n{n:06d}.csv"
        write_snapshot(path, Field(traj.grid, traj[n]), traj.times[n],
                       pgm=emit_pgm and traj.grid.dim == 2)

    cfg = traj.config
    series = traj.diagnostics
    lines = [
        f"scheme = {cfg.variant.value}",
        f"alpha = {_fmt(cfg.alpha)}",
        f"kappa = {_fmt(cfg.kappa)}",
        f"tau = {_fmt(cfg.tau)}",
        f"steps = {traj.n_steps}",
        f"constraint_ok = {str(series.constraint_ok).lower()}",
        f"initial_energy = {_fmt(series.energy[0])}",
        f"final_energy = {_fmt(series.energy[-1])}",
        f"max_norm = {_fmt(np.max(series.max_norm))}",
        f"max_newton_iters = {int(np.max(series.newton_iters))}",
    ]
    lines += [f"{k} = {v}" for k, v in verdicts.items()]
    lines.append(f"verdict = {'pass' if all(v != 'fail' for v in verdicts.values()) else 'fail'}")
    (outdir / "summary.txt").write_text("\n".join(lines) + "\n")


def run_experiment(cfg: RunConfig, output_dir: str | os.PathLike | None = None) -> RunReport:
    """Run a configured experiment and write ``series.csv``, snapshots and
    ``summary.txt`` to ``output_dir`` (default ``cfg.output_dir``)."""
    grid = cfg.grid()
    traj = run(
        cfg.scheme_config(), grid, cfg.initial_field(grid), cfg.n_steps,
        snapshot_times=cfg.snapshot_times,
    )
    verdicts = invariant_verdicts(traj)

    outdir = pathlib.Path(output_dir if output_dir is not None else cfg.output_dir)
    write_run_outputs(traj, verdicts, outdir, emit_pgm=cfg.emit_pgm)
    return RunReport(traj, verdicts, outdir)


# }}}


# {{{ converge


@dataclass
class CaseResult:
    scheme: Scheme
    alpha: float
    taus: list[float]
    errors: list[float]
    #: expected order of the errors
    target: float
    pairwise: list[float] = field(default_factory=list)
    rate: float = math.nan

    @property
    def ok(self) -> bool:
        return abs(self.rate - self.target) <= RATE_TOL


@dataclass
class ConvergenceReport:
    cases: list[CaseResult]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cases)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.ok else EXIT_INVARIANT

    def to_csv(self) -> str:
        lines = ["scheme,alpha,level,tau,e_t,pairwise_rate,ls_rate"]
        for c in self.cases:
            for level, (tau, e) in enumerate(zip(c.taus, c.errors)):
                pr = _fmt(c.pairwise[level - 1]) if level > 0 else ""
                lines.append(",".join([
                    c.scheme.value, _fmt(c.alpha), str(level), _fmt(tau), _fmt(e),
                    pr, _fmt(c.rate),
                ]))
        return "\n".join(lines) + "\n"


def eigenmode_of(cfg: RunConfig) -> tuple[int, ...] | None:
    """Mode numbers if the initial condition is a single discrete eigenmode."""
    if cfg.initial_condition != "sine":
        return None

    w = dict(cfg.ic_params).get("wavenumber", 1.0)
    modes = []
    for L in cfg.lengths:
        k = w * L / math.pi
        if abs(k - round(k)) > 1.0e-12 or round(k) < 1:
            return None
        modes.append(int(round(k)))
    return tuple(modes)


def _linear_exact(cfg: RunConfig, grid: GridSpec, alpha: float) -> np.ndarray:
    modes = eigenmode_of(cfg)
    mu = -laplacian_eigenvalue(grid, modes, cfg.kappa)
    factor = mittag_leffler(alpha, 1.0, -mu * cfg.final_time**alpha)
    return factor * cfg.initial_field(grid)


def convergence_case(
    cfg: RunConfig, scheme: Scheme, alpha: float, levels: int
) -> CaseResult:
    """Rates for one (scheme, alpha) pair at ``N_l = N_0 2^l``, ``l < levels``.

    Nonlinear runs use the self-convergence error between successive levels
    (``levels - 1`` values, expected order ``alpha``). In linear mode with an
    eigenmode initial condition the error at ``t = T`` against the exact
    Mittag-Leffler solution is used instead (``levels`` values, first order).
    """
    grid = cfg.grid()
    u0 = cfg.initial_field(grid)
    base = replace(cfg, scheme=scheme, alpha=alpha)
    exact_mode = cfg.linear_mode and eigenmode_of(cfg) is not None

    taus: list[float] = []
    errors: list[float] = []
    previous = None
    for level in range(levels):
        lcfg = base.with_steps(cfg.n_steps * 2**level)
        traj = run(lcfg.scheme_config(), grid, u0, lcfg.n_steps)
        log.info("%s alpha=%g N=%d done", scheme.value, alpha, lcfg.n_steps)

        if exact_mode:
            taus.append(lcfg.time_step)
            errors.append(l2_norm(traj[-1] - _linear_exact(lcfg, grid, alpha), grid))
        elif previous is not None:
            taus.append(previous.config.tau)
            errors.append(diagnostics.self_convergence_error(previous, traj, grid))
        previous = traj

    case = CaseResult(
        scheme=scheme, alpha=alpha, taus=taus, errors=errors,
        target=1.0 if exact_mode else alpha,
    )
    if len(errors) >= 2:
        case.pairwise = list(diagnostics.pairwise_rates(errors))
    if len(errors) >= 3:
        case.rate = diagnostics.observed_rate(errors)
    return case


def thread_count() -> int:
    value = os.environ.get("FRACAC_THREADS", "").strip()
    if not value:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"FRACAC_THREADS must be an integer, got {value!r}") from None
    return max(1, n)


def converge(
    cfg: RunConfig,
    levels: int,
    alphas: Sequence[float] | None = None,
    schemes: Sequence[Scheme | str] | None = None,
    output_dir: str | os.PathLike | None = None,
    threads: int | None = None,
) -> ConvergenceReport:
    """Observed rates for every (scheme, alpha) pair; writes ``rates.csv``."""
    if levels < 3:
        raise ValueError(f"levels must be at least 3, got {levels}")
    if not (cfg.linear_mode and eigenmode_of(cfg) is not None) and levels < 4:
        # self-convergence loses one level and the fit needs three errors
        raise ValueError("self-convergence studies need at least 4 levels")

    alphas = [cfg.alpha] if alphas is None else [float(a) for a in alphas]
    schemes = [cfg.scheme] if schemes is None else [Scheme(str(s).upper()) for s in schemes]
    for a in alphas:
        if not 0.0 < a <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {a}")

    cases = [(s, a) for s in schemes for a in alphas]
    threads = thread_count() if threads is None else threads
    if threads > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(convergence_case, cfg, s, a, levels) for s, a in cases]
            results = [f.result() for f in futures]
    else:
        results = [convergence_case(cfg, s, a, levels) for s, a in cases]

    report = ConvergenceReport(results)
    if output_dir is not None:
        outdir = pathlib.Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "rates.csv").write_text(report.to_csv())
    return report


# }}}


# {{{ scalar validation


@dataclass
class MLCheckRow:
    tau: float
    t: float
    exact: float
    numeric: float

    @property
    def abs_error(self) -> float:
        return abs(self.numeric - self.exact)


def scalar_linear_cq(alpha: float, lam: float, tau: float, n_steps: int, y0: float = 1.0) -> np.ndarray:
    """BE-CQ solution of ``d^alpha y + lam y = 0``:
    ``y_n = y_{n,alpha} / (1 + lam tau^alpha)``."""
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    w = cq.cq_weights(alpha, 0, max(n_steps, 1))
    y = np.empty(n_steps + 1)
    y[0] = y0
    scale = 1.0 / (1.0 + lam * tau**alpha)
    for n in range(1, n_steps + 1):
        c = cq.extrapolation_coefficients(w, n)
        y[n] = scale * cq.weighted_sum(c, y[:n])
    return y


def ml_check(
    alpha: float, lam: float, tau_list: Sequence[float], T: float = 1.0
) -> list[MLCheckRow]:
    """Error at ``t = T`` of the scalar scheme for each step size."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")

    exact = mittag_leffler(alpha, 1.0, -lam * T**alpha)
    rows = []
    for tau in tau_list:
        n = T / tau
        if not tau > 0 or abs(n - round(n)) > 1.0e-9 * n:
            raise ValueError(f"T = {T} is not a multiple of tau = {tau}")
        y = scalar_linear_cq(alpha, lam, tau, int(round(n)))
        rows.append(MLCheckRow(tau=tau, t=T, exact=exact, numeric=float(y[-1])))
    return rows


def error_ratios(rows: Sequence[MLCheckRow]) -> list[float]:
    return [a.abs_error / b.abs_error for a, b in zip(rows[:-1], rows[1:])]


def ml_check_csv(rows: Sequence[MLCheckRow]) -> str:
    lines = ["t,exact,numeric,abs_error"]
    for r in rows:
        lines.append(",".join(_fmt(x) for x in (r.t, r.exact, r.numeric, r.abs_error)))
    return "\n".join(lines) + "\n"


def weights_csv(alpha: float, n: int) -> str:
    """``j,omega_alpha,omega_alpha_minus_1,partial_sum`` for ``j = 0..n``."""
    w = cq.cq_weights(alpha, 0, n)
    w1 = cq.cq_weights(alpha, -1, n)
    partial = w.partial_sums()
    lines = ["j,omega_alpha,omega_alpha_minus_1,partial_sum"]
    for j in range(n + 1):
        lines.append(f"{j},{_fmt(w.weights[j])},{_fmt(w1.weights[j])},{_fmt(partial[j])}")
    return "\n".join(lines) + "\n"


# }}}

