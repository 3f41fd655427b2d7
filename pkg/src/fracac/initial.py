"""Named initial-condition generators.

Every generator is a deterministic function of the grid, its parameters and,
for ``random``, a 64-bit seed. Random values come from a counter-based
SplitMix64 stream: the ``i``-th draw (``i = 0, 1, ...`` over the interior
nodes in row-major order) is

.. code:: text

    z = seed + (i + 1) * 0x9E3779B97F4A7C15            (mod 2**64)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9           (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB           (mod 2**64)
    z = z ^ (z >> 31)
    U = (z >> 11) * 2**-53                              in [0, 1)

so any implementation with unsigned 64-bit arithmetic reproduces the field
from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np

from fracac.spatial import GridSpec

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


# {{{ prng


def splitmix64(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Draws ``offset, ..., offset + count - 1`` of the SplitMix64 stream."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if count < 0 or offset < 0:
        raise ValueError("count and offset must be non-negative")

    counter = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + counter * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_2)
    return z ^ (z >> np.uint64(31))


def uniform01(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Doubles in ``[0, 1)`` built from the top 53 bits of each draw."""
    z = splitmix64(seed, count, offset)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


# }}}


# {{{ generators


@dataclass(frozen=True)
class Generator:
    name: str
    func: Callable[..., np.ndarray]
    #: parameter name -> default value
    defaults: Mapping[str, float]
    needs_seed: bool = False


def _poly2d(grid: GridSpec, *, scale: float) -> np.ndarray:
    # x (1 - x) y (1 - y) on the unit square, rescaled to the actual lengths
    u = np.full(grid.shape, scale)
    for x, L in zip(grid.coordinates(), grid.lengths):
        s = x / L
        u = u * s * (1.0 - s)
    return u


def _sine(grid: GridSpec, *, amplitude: float, wavenumber: float) -> np.ndarray:
    u = np.full(grid.shape, amplitude)
    for x in grid.coordinates():
        u = u * np.sin(wavenumber * x)
    return u


def _random(grid: GridSpec, *, amplitude: float, seed: int) -> np.ndarray:
    r = uniform01(seed, grid.ndofs).reshape(grid.shape)
    return amplitude * (2.0 * r - 1.0)


def _profile(dist: np.ndarray, kappa: float) -> np.ndarray:
    return np.tanh(dist / (math.sqrt(2.0) * kappa))


def _center(grid: GridSpec) -> list[float]:
    return [0.5 * L for L in grid.lengths]


def _circle(grid: GridSpec, *, radius: float, kappa: float) -> np.ndarray:
    if grid.dim != 2:
        raise ValueError("the circle initial condition needs a 2D grid")

    X, Y = grid.coordinates()
    cx, cy = _center(grid)
    r = np.hypot(X - cx, Y - cy)
    return _profile(radius - r, kappa)


def _dumbbell(
    grid: GridSpec, *, radius: float, separation: float, neck: float, kappa: float
) -> np.ndarray:
    if grid.dim != 2:
        raise ValueError("the dumbbell initial condition needs a 2D grid")

    X, Y = grid.coordinates()
    cx, cy = _center(grid)
    half = 0.5 * separation

    # signed distances, positive inside; the union takes the maximum
    d_left = radius - np.hypot(X - (cx - half), Y - cy)
    d_right = radius - np.hypot(X - (cx + half), Y - cy)

    qx = np.abs(X - cx) - half
    qy = np.abs(Y - cy) - 0.5 * neck
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    d_neck = -(outside + inside)

    return _profile(np.maximum(np.maximum(d_left, d_right), d_neck), kappa)


GENERATORS: dict[str, Generator] = {
    "poly2d": Generator("poly2d", _poly2d, {"scale": 1.0}),
    "sine": Generator("sine", _sine, {"amplitude": 0.05, "wavenumber": 1.0}),
    "random": Generator("random", _random, {"amplitude": 0.05}, needs_seed=True),
    "circle": Generator(
        "circle", _circle, {"radius": 0.5 * math.pi, "kappa": 0.1}
    ),
    "dumbbell": Generator(
        "dumbbell", _dumbbell,
        {"radius": 0.9, "separation": 3.0, "neck": 0.6, "kappa": 0.1},
    ),
}


def generator_params(name: str) -> Mapping[str, float]:
    try:
        return GENERATORS[name].defaults
    except KeyError:
        raise ValueError(
            f"unknown initial condition {name!r}; "
            f"available: {', '.join(sorted(GENERATORS))}"
        ) from None


def initial_condition(
    name: str,
    grid: GridSpec,
    params: Mapping[str, Any] | None = None,
    seed: int | None = None,
) -> np.ndarray:
    """Evaluate the generator ``name`` on the interior nodes of ``grid``."""
    defaults = generator_params(name)
    gen = GENERATORS[name]

    params = dict(params or {})
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(
            f"unknown parameters for {name!r}: {', '.join(sorted(unknown))}"
        )
    kwargs = {**defaults, **{k: float(v) for k, v in params.items()}}

    for key in ("radius", "kappa", "neck", "separation"):
        if key in kwargs and not kwargs[key] > 0:
            raise ValueError(f"{name}: {key} must be positive, got {kwargs[key]}")
    if "amplitude" in kwargs and not abs(kwargs["amplitude"]) <= 1.0:
        raise ValueError(f"{name}: |amplitude| must be at most 1")

    if gen.needs_seed:
        if seed is None:
            raise ValueError(f"initial condition {name!r} requires a seed")
        kwargs["seed"] = int(seed)

    u = gen.func(grid, **kwargs)
    return np.ascontiguousarray(u, dtype=np.float64)


# }}}
