"""Backward-Euler convolution quadrature (Grünwald-Letnikov) for the Caputo
derivative.

The weights are the Taylor coefficients of ``(1 - z)**mu``,

.. math::

    \\omega_j = (-1)^j \\binom{\\mu}{j},

and the discrete derivative of a sequence ``u_0, ..., u_n`` sampled with step
``tau`` is

.. math::

    \\bar\\partial_\\tau^\\alpha u_n
        = \\tau^{-\\alpha} \\sum_{j=1}^n \\omega_{n-j} (u_j - u_0).

All history sums are evaluated serially over the time index so that results
are bit-reproducible regardless of how the caller batches the work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

ArrayOrScalar = Union[np.ndarray, float]


@dataclass(frozen=True)
class CQWeights:
    """Precomputed weights :math:`\\omega_0, \\ldots, \\omega_N` for the order
    ``alpha + order_shift``."""

    alpha: float
    order_shift: int
    weights: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return self.weights.size - 1

    @property
    def mu(self) -> float:
        return self.alpha + self.order_shift

    def partial_sums(self) -> np.ndarray:
        """Running sums :math:`\\sum_{j=0}^n \\omega_j` (serial order)."""
        return np.cumsum(self.weights)

    def __len__(self) -> int:
        return self.weights.size


def _check_alpha(alpha: float) -> None:
    # alpha = 1 is admitted as the integer-order (backward Euler) limit
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def cq_weights(alpha: float, order_shift: int = 0, n_max: int = 1) -> CQWeights:
    """Compute the BE-CQ weights of order ``mu = alpha + order_shift``.

    Uses the recurrence ``w_0 = 1``, ``w_j = w_{j-1} (j - 1 - mu) / j`` which is
    stable for every ``mu`` in ``(-1, 1)``.

    :arg order_shift: ``0`` for the derivative of order ``alpha`` or ``-1``
        for the fractional integral-like operator of order ``alpha - 1``.
    """
    _check_alpha(alpha)
    if order_shift not in (0, -1):
        raise ValueError(f"order_shift must be 0 or -1, got {order_shift!r}")
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be a positive integer, got {n_max!r}")

    mu = alpha + order_shift
    n_max = int(n_max)
    w = np.empty(n_max + 1)
    w[0] = 1.0
    for j in range(1, n_max + 1):
        w[j] = w[j - 1] * ((j - 1 - mu) / j)

    w.flags.writeable = False
    return CQWeights(alpha=float(alpha), order_shift=order_shift, weights=w)


# {{{ serial history sums


def _as_history(history: Sequence[ArrayOrScalar] | np.ndarray, count: int) -> list:
    if len(history) < count:
        raise ValueError(
            f"history holds {len(history)} entries, at least {count} are required"
        )

    entries = [np.asarray(history[j], dtype=np.float64) for j in range(count)]
    shape = entries[0].shape
    for j, e in enumerate(entries):
        if e.shape != shape:
            raise ValueError(
                f"history entry {j} has shape {e.shape}, expected {shape}"
            )

    return entries


def weighted_sum(coefficients: np.ndarray, rows: Sequence[np.ndarray]) -> np.ndarray:
    """Evaluate ``sum_j coefficients[j] * rows[j]`` left to right.

    Each grid point accumulates its terms in increasing ``j``, which fixes the
    floating-point result independently of the array layout.
    """
    acc = coefficients[0] * np.asarray(rows[0])
    if acc.ndim == 0:
        for j in range(1, len(coefficients)):
            acc = acc + coefficients[j] * rows[j]
        return acc

    # in-place form of acc = acc + c_j * row_j, identical rounding
    tmp = np.empty_like(acc)
    for j in range(1, len(coefficients)):
        np.multiply(rows[j], coefficients[j], out=tmp)
        acc += tmp

    return acc


def _unwrap(value: np.ndarray) -> ArrayOrScalar:
    return float(value) if value.ndim == 0 else value


def frac_derivative(
    history: Sequence[ArrayOrScalar] | np.ndarray,
    weights: CQWeights,
    tau: float,
    n: int,
) -> ArrayOrScalar:
    """Discrete Caputo derivative :math:`\\bar\\partial_\\tau^\\alpha u_n`."""
    if weights.order_shift != 0:
        raise ValueError("frac_derivative requires weights of order alpha")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n > weights.n_max + 1:
        raise ValueError(f"n = {n} exceeds the weight table (n_max = {weights.n_max})")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")

    u = _as_history(history, n + 1)
    w = weights.weights

    acc = w[n - 1] * (u[1] - u[0])
    for j in range(2, n + 1):
        acc = acc + w[n - j] * (u[j] - u[0])

    return _unwrap(tau ** (-weights.alpha) * acc)


def extrapolation_coefficients(weights: CQWeights, n: int) -> np.ndarray:
    """Coefficients ``c_0, ..., c_{n-1}`` of the fractional extrapolation.

    ``c_0 = sum_{i<n} w_i`` and ``c_j = -w_{n-j}``; by the sign pattern of the
    weights these form a convex combination.
    """
    if weights.order_shift != 0:
        raise ValueError("extrapolation requires weights of order alpha")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n > weights.n_max + 1:
        raise ValueError(f"n = {n} exceeds the weight table (n_max = {weights.n_max})")

    w = weights.weights
    c = np.empty(n)
    c[0] = np.sum(w[:n])
    c[1:] = -w[n - 1 : 0 : -1]
    return c


def frac_extrapolation(
    history: Sequence[ArrayOrScalar] | np.ndarray,
    weights: CQWeights,
    n: int,
) -> ArrayOrScalar:
    """Fractional extrapolation :math:`u_{n,\\alpha} = \\sum_{j<n} c_j u_j`.

    It does not depend on ``u_n`` and satisfies
    ``u_n - u_{n,alpha} = tau**alpha * frac_derivative(..., n)``.
    """
    c = extrapolation_coefficients(weights, n)
    u = _as_history(history, n)
    return _unwrap(weighted_sum(c, u))


# }}}


# {{{ positivity functional


def cq_positivity_functional(
    sequence: Sequence[ArrayOrScalar] | np.ndarray,
    weights_alpha: CQWeights,
    weights_alpha_m1: CQWeights,
    tau: float,
    cell_volume: float = 1.0,
) -> float:
    """Evaluate :math:`\\sum_{n=1}^N (\\bar\\partial_\\tau^\\alpha u_n,
    \\bar\\partial_\\tau^1 u_n)`.

    The derivative is evaluated through the equivalent form
    ``tau**(1 - alpha) * sum_j w^{(alpha-1)}_{n-j} y_j`` acting on the backward
    differences ``y_j = (u_j - u_{j-1}) / tau``. This is the form in which the
    functional is a positive semidefinite quadratic form in ``y``.
    """
    if weights_alpha_m1.order_shift != -1:
        raise ValueError("weights_alpha_m1 must be of order alpha - 1")
    if weights_alpha.alpha != weights_alpha_m1.alpha:
        raise ValueError("weight tables refer to different orders")

    N = len(sequence) - 1
    if N < 1:
        raise ValueError("the sequence needs at least two entries")
    if N > weights_alpha_m1.n_max + 1:
        raise ValueError(f"N = {N} exceeds the weight table")

    u = _as_history(sequence, N + 1)
    y = [(u[j] - u[j - 1]) / tau for j in range(1, N + 1)]
    w = weights_alpha_m1.weights
    scale = tau ** (1.0 - weights_alpha.alpha)

    total = 0.0
    for n in range(1, N + 1):
        # y[j - 1] holds y_j
        acc = w[n - 1] * y[0]
        for j in range(2, n + 1):
            acc = acc + w[n - j] * y[j - 1]
        total += float(np.sum(scale * acc * y[n - 1])) * cell_volume

    return total


# }}}
