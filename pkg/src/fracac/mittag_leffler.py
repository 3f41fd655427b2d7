"""Two-parameter Mittag-Leffler function on the non-positive real axis.

Only ``z <= 0`` is supported, which is all that is needed to write down the
exact solution ``y0 * E_{a,1}(-lam * t**a)`` of scalar linear subdiffusion.

Two branches are used:

* the power series ``sum_k z**k / Gamma(a k + b)``. Its terms grow to a
  maximum before decaying, so the sum is accumulated with :func:`math.fsum`
  when that maximum is moderate and in :mod:`mpmath` arbitrary precision
  otherwise (with enough digits to absorb the cancellation);
* the asymptotic expansion ``-sum_{k=1}^K z**(-k) / Gamma(b - a k)``, valid for
  ``0 < a < 1`` on the negative axis.

The branch preferred by ``series_radius`` is tried first and the other one is
used when the error estimate of the first misses ``series_tol``. Small orders
at moderate ``|z|`` defeat both (the series needs ``~|z|**(1/a)`` terms and the
asymptotic expansion is not yet accurate), so a quadrature of the real-line
integral representation of Gorenflo, Loutchko and Luchko serves as the last
resort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath


class MittagLefflerError(ArithmeticError):
    """Raised when no branch reaches the requested accuracy."""


@dataclass(frozen=True)
class MLEvalConfig:
    #: switch point between the series (``|z| <= series_radius``) and the
    #: asymptotic expansion
    series_radius: float = 10.0
    #: absolute accuracy target
    series_tol: float = 1.0e-10
    #: number of terms kept in the asymptotic expansion
    asymptotic_terms: int = 20
    #: safety cap on the number of series terms
    max_series_terms: int = 4000

    def __post_init__(self) -> None:
        if not self.series_radius > 0:
            raise ValueError(f"series_radius must be positive: {self.series_radius}")
        if not self.series_tol > 0:
            raise ValueError(f"series_tol must be positive: {self.series_tol}")
        if self.asymptotic_terms < 1:
            raise ValueError(
                f"asymptotic_terms must be at least 1: {self.asymptotic_terms}"
            )


DEFAULT_CONFIG = MLEvalConfig()


def _log_inv_gamma(x: float) -> float:
    """``log |1 / Gamma(x)|``, ``-inf`` at the poles."""
    if x <= 0 and x == math.floor(x):
        return -math.inf
    return -math.lgamma(x)


def _series(a: float, b: float, z: float, config: MLEvalConfig) -> tuple[float, float]:
    log_x = math.log(abs(z))

    # locate the largest term and the truncation index from log magnitudes
    log_peak = -math.inf
    n_terms = None
    log_tol = math.log(config.series_tol) - math.log(1.0e6)
    for k in range(config.max_series_terms + 1):
        log_term = k * log_x + _log_inv_gamma(a * k + b)
        log_peak = max(log_peak, log_term)
        # terms decay monotonically once (a k + b - 1)**a exceeds |z|
        tail_ok = a * k + b > 1.0 and math.log(a * k + b - 1.0) > log_x / a
        if log_term < log_tol and tail_ok:
            n_terms = k
            break

    if n_terms is None:
        return math.nan, math.inf

    peak = math.exp(min(log_peak, 700.0))
    if peak < 1.0e2:
        terms = [z**k / math.gamma(a * k + b) for k in range(n_terms)]
        value = math.fsum(terms)
        # each term carries a few ulps of rounding from pow and gamma
        error = peak * 1.0e-15 * math.sqrt(n_terms)
        return value, error

    digits = int(log_peak / math.log(10.0)) + 25
    with mpmath.workdps(digits):
        mz = mpmath.mpf(z)
        ma = mpmath.mpf(a)
        mb = mpmath.mpf(b)
        total = mpmath.fsum(mz**k * mpmath.rgamma(ma * k + mb) for k in range(n_terms))
        value = float(total)

    # 25 digits below the peak term survive the cancellation; then one rounding
    return value, n_terms * 1.0e-25 + 1.0e-16 * abs(value)


def _asymptotic(a: float, b: float, z: float, config: MLEvalConfig) -> tuple[float, float]:
    if a >= 1.0:
        # the expansion misses the exponential e^z contribution at a = 1
        return math.nan, math.inf

    log_x = math.log(abs(z))

    def log_mag(k: int) -> float:
        return -k * log_x + _log_inv_gamma(b - a * k)

    # sum up to asymptotic_terms, stopping early at the smallest term once the
    # expansion starts to diverge; terms at poles of Gamma vanish
    terms = []
    previous = math.inf
    k = 1
    while k <= config.asymptotic_terms:
        mag = log_mag(k)
        if not math.isinf(mag):
            if mag > previous:
                break
            previous = mag
            terms.append(-(z ** (-k)) / math.gamma(b - a * k))
        k += 1

    # the first omitted nonzero term estimates the truncation error
    tail = -math.inf
    for j in range(k, k + 4):
        tail = max(tail, log_mag(j))
        if not math.isinf(tail):
            break

    # for a close to 1 the remainder behaves like the e^z term it turns into
    # at a = 1, of size exp(|z|^(1/a) cos(pi / a))
    log_dropped = -math.inf
    if a > 2.0 / 3.0:
        log_dropped = (
            -math.log(a)
            + (1.0 - b) / a * log_x
            + math.exp(log_x / a) * math.cos(math.pi / a)
        )
    error = sum(math.exp(e) for e in (tail, log_dropped) if e > -700.0)

    value = math.fsum(terms)
    return value, error + 1.0e-16 * max(1.0, abs(value))


def _integral(a: float, b: float, z: float, config: MLEvalConfig) -> tuple[float, float]:
    # real-line representation valid for |arg z| > a pi and b < 1 + a
    if a >= 1.0:
        return math.nan, math.inf
    if b > 1.0:
        # E_{a,b}(z) = (E_{a,b-a}(z) - 1 / Gamma(b - a)) / z
        value, error = _integral(a, b - a, z, config)
        return (value - 1.0 / math.gamma(b - a)) / z, error / abs(z) + 1.0e-16

    with mpmath.workdps(30):
        ma, mb, mz = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(z)
        s1 = mpmath.sin(mpmath.pi * (1 - mb))
        s2 = mpmath.sin(mpmath.pi * (1 - mb + ma))
        c = mpmath.cos(mpmath.pi * ma)

        def kernel(chi):
            num = chi * s1 - mz * s2
            den = chi**2 - 2 * chi * mz * c + mz**2
            return chi ** ((1 - mb) / ma) * mpmath.exp(-(chi ** (1 / ma))) * num / den

        # the denominator nearly vanishes at chi = |z| when a is close to 1
        points = sorted({0, 0.5, 1, 2, abs(z), mpmath.inf})
        value, error = mpmath.quad(kernel, points, error=True)
        value = value / (ma * mpmath.pi)
        error = error / (ma * mpmath.pi)

    return float(value), float(error) + 1.0e-15


def mittag_leffler(
    a: float, b: float, z: float, config: MLEvalConfig = DEFAULT_CONFIG
) -> float:
    """Evaluate :math:`E_{a,b}(z)` for ``0 < a <= 1``, ``b > 0`` and ``z <= 0``."""
    if not (0.0 < a <= 1.0):
        raise ValueError(f"a must lie in (0, 1], got {a!r}")
    if not b > 0.0:
        raise ValueError(f"b must be positive, got {b!r}")
    if not z <= 0.0:
        raise ValueError(f"only z <= 0 is supported, got {z!r}")

    if z == 0.0:
        return 1.0 / math.gamma(b)

    branches = [_series, _asymptotic]
    if abs(z) > config.series_radius:
        branches.reverse()
    branches.append(_integral)

    estimates = []
    for branch in branches:
        value, error = branch(a, b, z, config)
        if error <= config.series_tol:
            return value
        estimates.append((branch.__name__.strip("_"), error))

    raise MittagLefflerError(
        f"E_{{{a},{b}}}({z}) could not be evaluated to {config.series_tol:.1e}: "
        + ", ".join(f"{name} error ~ {err:.1e}" for name, err in estimates)
    )


def linear_subdiffusion_exact(
    alpha: float, lam: float, t: float, y0: float = 1.0,
    config: MLEvalConfig = DEFAULT_CONFIG,
) -> float:
    """Exact solution ``y0 * E_{alpha,1}(-lam * t**alpha)`` of
    ``d^alpha y / dt^alpha + lam * y = 0``."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")

    return y0 * mittag_leffler(alpha, 1.0, -lam * t**alpha, config)
