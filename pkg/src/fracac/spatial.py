"""Uniform-grid finite differences with homogeneous Dirichlet boundaries.

Fields are stored as arrays over the interior nodes only, shaped like
``grid.shape``; the boundary values are implicitly zero. Axis ``k`` has
``cells[k]`` interior points at ``x_i = i * h[k]``, ``i = 1, ..., cells[k]``,
with ``h[k] = lengths[k] / (cells[k] + 1)``.
"""

from __future__ import annotations

import functools
import logging
import math
import pathlib
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

Coefficient = Union[float, np.ndarray]


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, iterate: np.ndarray, residuals: list[float]):
        super().__init__(message)
        self.iterate = iterate
        self.residuals = residuals


# {{{ grid and fields


@dataclass(frozen=True)
class GridSpec:
    dim: int
    lengths: tuple[float, ...]
    cells: tuple[int, ...]
    bc: str = "dirichlet"

    def __post_init__(self) -> None:
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))

        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.lengths) != self.dim or len(self.cells) != self.dim:
            raise ValueError(
                f"expected {self.dim} lengths and cells, got "
                f"{self.lengths} and {self.cells}"
            )
        if any(n < 3 for n in self.cells):
            raise ValueError(f"at least 3 interior points per axis: {self.cells}")
        if any(not (L > 0 and math.isfinite(L)) for L in self.lengths):
            raise ValueError(f"lengths must be positive: {self.lengths}")
        if self.bc != "dirichlet":
            raise ValueError(f"only homogeneous Dirichlet is supported, got {self.bc!r}")

    @classmethod
    def uniform(cls, dim: int, length: float, cells: int) -> GridSpec:
        return cls(dim=dim, lengths=(length,) * dim, cells=(cells,) * dim)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(L / (n + 1) for L, n in zip(self.lengths, self.cells))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def ndofs(self) -> int:
        return math.prod(self.cells)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.h)

    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Interior node coordinates, broadcastable against ``shape``."""
        axes = [
            h * np.arange(1, n + 1) for h, n in zip(self.h, self.cells)
        ]
        return tuple(np.meshgrid(*axes, indexing="ij"))


@dataclass(frozen=True)
class Field:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.size != self.grid.ndofs:
            raise ValueError(
                f"field has {values.size} values, grid has {self.grid.ndofs} nodes"
            )
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", values)


# }}}


# {{{ operators


def apply_laplacian(u: np.ndarray, grid: GridSpec, kappa: float = 1.0) -> np.ndarray:
    """Evaluate ``kappa**2 * Lap_h u`` with the 3-point / 5-point stencil."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {grid.shape}")

    out = np.zeros_like(u)
    for axis, h in enumerate(grid.h):
        w = kappa**2 / h**2
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)

        out -= (2.0 * w) * u
        out[hi] += w * u[lo]
        out[lo] += w * u[hi]

    return out


def laplacian_matrix(grid: GridSpec, kappa: float = 1.0) -> np.ndarray:
    """Dense matrix of :func:`apply_laplacian` (row-major ordering).

    Only meant for small grids, e.g. as a reference in tests.
    """
    mats = []
    for h, n in zip(grid.h, grid.cells):
        mats.append(
            (np.diag(np.full(n - 1, 1.0), -1)
             - 2.0 * np.eye(n)
             + np.diag(np.full(n - 1, 1.0), 1)) * (kappa**2 / h**2)
        )

    if grid.dim == 1:
        return mats[0]

    nx, ny = grid.cells
    return np.kron(mats[0], np.eye(ny)) + np.kron(np.eye(nx), mats[1])


@functools.lru_cache(maxsize=16)
def laplacian_sparse(grid: GridSpec) -> sp.csr_matrix:
    """Sparse matrix of the unscaled ``Lap_h`` (row-major ordering)."""
    mats = []
    for h, n in zip(grid.h, grid.cells):
        mats.append(sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / h**2)

    if grid.dim == 1:
        return sp.csr_matrix(mats[0])

    nx, ny = grid.cells
    L = sp.kron(mats[0], sp.identity(ny)) + sp.kron(sp.identity(nx), mats[1])
    return sp.csr_matrix(L)


def laplacian_eigenvalue(grid: GridSpec, modes: tuple[int, ...], kappa: float = 1.0) -> float:
    """Eigenvalue of ``kappa**2 Lap_h`` for the product of sines with the given
    (1-based) mode numbers."""
    lam = 0.0
    for h, L, k in zip(grid.h, grid.lengths, modes):
        lam -= (4.0 / h**2) * math.sin(k * math.pi * h / (2.0 * L)) ** 2
    return kappa**2 * lam


def sine_mode(grid: GridSpec, modes: tuple[int, ...]) -> np.ndarray:
    coords = grid.coordinates()
    u = np.ones(grid.shape)
    for x, L, k in zip(coords, grid.lengths, modes):
        u = u * np.sin(k * math.pi * x / L)
    return u


def conjugate_gradient(
    apply: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    x0: np.ndarray | None = None,
    tol: float = 1.0e-12,
    max_iter: int = 1000,
) -> tuple[np.ndarray, int]:
    """Unpreconditioned conjugate gradients for an SPD operator.

    Stops once ``||rhs - A x||_2 <= tol * ||rhs||_2``. Returns the iterate and
    the number of iterations.
    """
    b_norm = math.sqrt(float(np.vdot(rhs, rhs)))
    if b_norm == 0.0:
        return np.zeros_like(rhs), 0

    if x0 is None:
        x = np.zeros_like(rhs)
        r = rhs.copy()
    else:
        x = np.array(x0, dtype=np.float64)
        r = rhs - apply(x)

    target = tol * b_norm
    rr = float(np.vdot(r, r))
    residuals = [math.sqrt(rr)]
    if residuals[-1] <= target:
        return x, 0

    p = r.copy()
    for it in range(1, max_iter + 1):
        Ap = apply(p)
        step = rr / float(np.vdot(p, Ap))
        x += step * p
        r -= step * Ap

        rr_new = float(np.vdot(r, r))
        residuals.append(math.sqrt(rr_new))
        if residuals[-1] <= target:
            return x, it

        p *= rr_new / rr
        p += r
        rr = rr_new

    raise ConvergenceError(
        f"CG did not converge in {max_iter} iterations: "
        f"residual {residuals[-1] / b_norm:.3e} > {tol:.1e}",
        x,
        residuals,
    )


def default_cg_max_iter(grid: GridSpec) -> int:
    return int(10 * math.sqrt(grid.ndofs)) + 200


def helmholtz_operator(
    c: Coefficient, kappa: float, grid: GridSpec
) -> Callable[[np.ndarray], np.ndarray]:
    """The map ``u -> c u - kappa**2 Lap_h u``; ``c`` may be a nodal array.

    Assembled as a sparse matrix acting on flattened fields; inside CG this is
    cheaper than the sliced stencil of :func:`apply_laplacian`.
    """
    diag = np.broadcast_to(np.asarray(c, dtype=np.float64), grid.shape).ravel()
    A = (sp.diags(diag) - kappa**2 * laplacian_sparse(grid)).tocsr()
    shape = grid.shape

    def apply(u: np.ndarray) -> np.ndarray:
        return (A @ u.ravel()).reshape(shape)

    return apply


def solve_helmholtz(
    c: Coefficient,
    kappa: float,
    rhs: np.ndarray,
    grid: GridSpec,
    tol: float = 1.0e-12,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Solve ``(c I - kappa**2 Lap_h) u = rhs`` by conjugate gradients.

    ``c`` must be positive (pointwise if an array), which makes the operator
    symmetric positive definite.
    """
    if np.any(np.asarray(c) <= 0):
        raise ValueError("the reaction coefficient c must be positive")
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != grid.shape:
        raise ValueError(f"rhs shape {rhs.shape} does not match grid {grid.shape}")

    if kappa == 0.0:
        return rhs / c

    if max_iter is None:
        max_iter = default_cg_max_iter(grid)

    u, _ = conjugate_gradient(
        helmholtz_operator(c, kappa, grid), rhs, x0=x0, tol=tol, max_iter=max_iter
    )
    return u


# }}}


# {{{ norms


def inner(u: np.ndarray, v: np.ndarray, grid: GridSpec) -> float:
    """Discrete L2 inner product weighted by the cell volume."""
    return grid.cell_volume * float(np.sum(u * v))


def l2_norm(u: np.ndarray, grid: GridSpec) -> float:
    return math.sqrt(grid.cell_volume * float(np.sum(np.square(u))))


def max_norm(u: np.ndarray) -> float:
    return float(np.max(np.abs(u))) if np.size(u) else 0.0


# }}}


# {{{ snapshots

SNAPSHOT_MAGIC = "fracac-field v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_snapshot(
    path: str | pathlib.Path, u: Field, time: float, pgm: bool = False
) -> None:
    """Write a field to the plain-text snapshot format.

    The header is ``fracac-field v1 dim=<d> cells=<n1[,n2]> length=<L1[,L2]>
    time=<t>`` followed by one comma-separated row of 17-digit values per grid
    row (a single row in 1D).
    """
    path = pathlib.Path(path)
    grid = u.grid
    header = (
        f"{SNAPSHOT_MAGIC} dim={grid.dim} "
        f"cells={','.join(str(n) for n in grid.cells)} "
        f"length={','.join(_fmt(L) for L in grid.lengths)} "
        f"time={_fmt(time)}"
    )

    rows = np.atleast_2d(u.values)
    lines = [header] + [",".join(_fmt(x) for x in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")

    if pgm:
        write_pgm(path.with_suffix(".pgm"), u.values)


def read_snapshot(path: str | pathlib.Path) -> tuple[Field, float]:
    lines = pathlib.Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(SNAPSHOT_MAGIC):
        raise ValueError(f"{path}: not a {SNAPSHOT_MAGIC!r} file")

    meta = dict(
        item.split("=", 1) for item in lines[0][len(SNAPSHOT_MAGIC):].split()
    )
    grid = GridSpec(
        dim=int(meta["dim"]),
        cells=tuple(int(n) for n in meta["cells"].split(",")),
        lengths=tuple(float(x) for x in meta["length"].split(",")),
    )
    values = np.array(
        [[float(x) for x in line.split(",")] for line in lines[1:] if line.strip()]
    )
    return Field(grid, values.reshape(grid.shape)), float(meta["time"])


def write_pgm(path: str | pathlib.Path, values: np.ndarray) -> None:
    """8-bit binary PGM with ``[-1, 1]`` mapped linearly onto ``[0, 255]``."""
    img = np.atleast_2d(values)
    pixels = np.clip(np.rint((img + 1.0) * 127.5), 0, 255).astype(np.uint8)
    height, width = pixels.shape
    with open(path, "wb") as outf:
        outf.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        outf.write(pixels.tobytes())


# }}}
