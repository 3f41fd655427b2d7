"""Flat ``key = value`` run configuration.

One pair per line; ``#`` starts a comment. Keys:

==================  ========================================================
``scheme``          ``CS``, ``WCS`` or ``LWS``
``alpha``           fractional order in (0, 1); ``1`` selects backward Euler
``kappa``           interface parameter (> 0)
``N``               number of time steps
``tau``             time step; alternatively ``T``, the final time
``S``               LWS stabilization (default 2)
``dim``             1 or 2
``cells``           interior points, one value or one per axis
``length``          domain extent, one value or one per axis
``initial_condition``  generator name (see :mod:`fracac.initial`)
``ic.<param>``      generator parameters, e.g. ``ic.amplitude = 0.05``
``seed``            unsigned 64-bit seed (required by ``random``)
``snapshot_times``  comma-separated times at which to write fields
``output_dir``      directory for outputs (default ``output``)
``linear_mode``     drop the reaction term (default false)
``emit_pgm``        also write PGM heatmaps of 2D snapshots (default false)
``newton_tol``, ``newton_max``, ``cg_tol``  solver tolerances
==================  ========================================================

Values such as ``length = 2*pi`` may use ``pi`` in a product or quotient.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Any

from fracac import initial
from fracac.schemes import Scheme, SchemeConfig
from fracac.spatial import GridSpec


class ConfigError(ValueError):
    """A configuration document is malformed; ``errors`` lists every problem."""

    def __init__(self, errors: list[str]):
        super().__init__("\n".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class RunConfig:
    scheme: Scheme
    alpha: float
    kappa: float
    dim: int
    cells: tuple[int, ...]
    lengths: tuple[float, ...]
    initial_condition: str
    tau: float | None = None
    T: float | None = None
    N: int = 0
    S: float = 2.0
    ic_params: tuple[tuple[str, float], ...] = ()
    seed: int | None = None
    snapshot_times: tuple[float, ...] = ()
    output_dir: str = "output"
    linear_mode: bool = False
    emit_pgm: bool = False
    newton_tol: float = 1.0e-11
    newton_max: int = 50
    cg_tol: float = 1.0e-12

    # {{{ derived quantities

    @property
    def time_step(self) -> float:
        return self.tau if self.tau is not None else self.T / self.N

    @property
    def n_steps(self) -> int:
        return self.N

    @property
    def final_time(self) -> float:
        return self.T if self.T is not None else self.tau * self.N

    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.lengths, self.cells)

    def scheme_config(self, **overrides: Any) -> SchemeConfig:
        kwargs = dict(
            variant=self.scheme, alpha=self.alpha, kappa=self.kappa,
            tau=self.time_step, S=self.S,
            newton_tol=self.newton_tol, newton_max=self.newton_max,
            cg_tol=self.cg_tol, linear_mode=self.linear_mode,
        )
        kwargs.update(overrides)
        return SchemeConfig(**kwargs)

    def initial_field(self, grid: GridSpec | None = None):
        return initial.initial_condition(
            self.initial_condition, grid or self.grid(),
            dict(self.ic_params), self.seed,
        )

    def with_steps(self, N: int) -> RunConfig:
        """Same final time, ``N`` steps of size ``T / N``."""
        return replace(self, T=self.final_time, N=int(N), tau=None)

    # }}}


# {{{ parsing

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}
_PI_PRODUCT = re.compile(r"^\s*(?:([-+0-9.eE]+)\s*\*\s*)?pi\s*(?:/\s*([0-9.eE+]+))?\s*$")

REQUIRED = (
    "scheme", "alpha", "kappa", "N", "dim", "cells", "length", "initial_condition",
)
OPTIONAL = (
    "tau", "T", "S", "seed", "snapshot_times", "output_dir",
    "linear_mode", "emit_pgm", "newton_tol", "newton_max", "cg_tol",
)


def _real(text: str) -> float:
    m = _PI_PRODUCT.match(text)
    if m:
        value = math.pi * (float(m.group(1)) if m.group(1) else 1.0)
        return value / float(m.group(2)) if m.group(2) else value
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _int(text: str) -> int:
    if not re.fullmatch(r"[+-]?\d+", text.strip()):
        raise ValueError(f"{text!r} is not an integer")
    return int(text)


def _bool(text: str) -> bool:
    try:
        return _BOOL[text.strip().lower()]
    except KeyError:
        raise ValueError(f"{text!r} is not a boolean (true/false)") from None


def _list(conv, text: str) -> tuple:
    return tuple(conv(item.strip()) for item in text.split(",") if item.strip())


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate a configuration document.

    All problems are collected and raised together in a :class:`ConfigError`
    whose messages carry ``source:line`` locations.
    """
    errors: list[str] = []
    raw: dict[str, tuple[str, int]] = {}
    ic_raw: dict[str, tuple[str, int]] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"{source}:{lineno}: expected 'key = value', got {line!r}")
            continue

        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("ic."):
            target, name = ic_raw, key[3:]
        elif key in REQUIRED or key in OPTIONAL:
            target, name = raw, key
        else:
            errors.append(f"{source}:{lineno}: unknown key {key!r}")
            continue

        if name in target:
            errors.append(
                f"{source}:{lineno}: duplicate key {key!r} "
                f"(first set on line {target[name][1]})"
            )
            continue
        target[name] = (value, lineno)

    missing = [k for k in REQUIRED if k not in raw]
    if missing:
        errors.append(f"{source}: missing required keys: {', '.join(missing)}")

    values: dict[str, Any] = {}

    def get(key: str, conv, check=None, message: str = ""):
        if key not in raw:
            return
        text, lineno = raw[key]
        try:
            value = conv(text)
        except ValueError as exc:
            errors.append(f"{source}:{lineno}: {key}: {exc}")
            return
        if check is not None and not check(value):
            errors.append(f"{source}:{lineno}: {key} = {text}: {message}")
            return
        values[key] = value

    def scheme(text: str) -> Scheme:
        try:
            return Scheme(text.strip().upper())
        except ValueError:
            raise ValueError(f"{text!r} is not one of CS, WCS, LWS") from None

    get("scheme", scheme)
    get("alpha", _real, lambda a: 0.0 < a <= 1.0, "must lie in (0, 1) (or equal 1)")
    get("kappa", _real, lambda k: k > 0, "must be positive")
    get("tau", _real, lambda t: t > 0, "must be positive")
    get("T", _real, lambda t: t > 0, "must be positive")
    get("N", _int, lambda n: n >= 1, "must be at least 1")
    get("S", _real, lambda s: s >= 0, "must be non-negative")
    get("dim", _int, lambda d: d in (1, 2), "must be 1 or 2")
    get("cells", lambda s: _list(_int, s), lambda c: 1 <= len(c) <= 2 and min(c) >= 3,
        "needs one or two values, each at least 3")
    get("length", lambda s: _list(_real, s), lambda c: 1 <= len(c) <= 2 and min(c) > 0,
        "needs one or two positive values")
    get("initial_condition", str.strip, lambda n: n in initial.GENERATORS,
        f"unknown generator; available: {', '.join(sorted(initial.GENERATORS))}")
    get("seed", _int, lambda s: 0 <= s < 2**64, "must be an unsigned 64-bit integer")
    get("snapshot_times", lambda s: _list(_real, s),
        lambda ts: all(t >= 0 for t in ts), "times must be non-negative")
    get("output_dir", str.strip, lambda s: bool(s), "must not be empty")
    get("linear_mode", _bool)
    get("emit_pgm", _bool)
    get("newton_tol", _real, lambda t: t > 0, "must be positive")
    get("newton_max", _int, lambda n: n >= 1, "must be at least 1")
    get("cg_tol", _real, lambda t: t > 0, "must be positive")

    # time stepping: the step count N plus exactly one of tau and T
    if "tau" in raw and "T" in raw:
        errors.append(
            f"{source}: give either tau or T, not both "
            f"(lines {raw['tau'][1]} and {raw['T'][1]})"
        )
    elif "tau" not in raw and "T" not in raw:
        errors.append(f"{source}: missing time stepping: give tau or T, plus N")

    # per-axis values
    dim = values.get("dim")
    for key in ("cells", "length"):
        if dim is None or key not in values:
            continue
        seq = values[key]
        if len(seq) == 1:
            values[key] = seq * dim
        elif len(seq) != dim:
            errors.append(
                f"{source}:{raw[key][1]}: {key} has {len(seq)} values for dim = {dim}"
            )

    # generator parameters
    name = values.get("initial_condition")
    params: dict[str, float] = {}
    if name is not None:
        allowed = initial.generator_params(name)
        for pname, (text, lineno) in ic_raw.items():
            if pname not in allowed:
                errors.append(
                    f"{source}:{lineno}: unknown parameter ic.{pname} for {name!r}; "
                    f"allowed: {', '.join(sorted(allowed)) or 'none'}"
                )
                continue
            try:
                params[pname] = _real(text)
            except ValueError as exc:
                errors.append(f"{source}:{lineno}: ic.{pname}: {exc}")

        if initial.GENERATORS[name].needs_seed and "seed" not in raw:
            errors.append(f"{source}: initial condition {name!r} requires a seed")

    if errors:
        raise ConfigError(errors)

    return RunConfig(
        scheme=values["scheme"],
        alpha=values["alpha"],
        kappa=values["kappa"],
        dim=values["dim"],
        cells=tuple(values["cells"]),
        lengths=tuple(values["length"]),
        initial_condition=name,
        tau=values.get("tau"),
        T=values.get("T"),
        N=values["N"],
        S=values.get("S", 2.0),
        ic_params=tuple(sorted(params.items())),
        seed=values.get("seed"),
        snapshot_times=tuple(values.get("snapshot_times", ())),
        output_dir=values.get("output_dir", "output"),
        linear_mode=values.get("linear_mode", False),
        emit_pgm=values.get("emit_pgm", False),
        newton_tol=values.get("newton_tol", 1.0e-11),
        newton_max=values.get("newton_max", 50),
        cg_tol=values.get("cg_tol", 1.0e-12),
    )


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read(), source=str(path))


# }}}


# {{{ serialization


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(serialize_config(c)) == c``."""

    def real(x: float) -> str:
        return repr(float(x))

    lines = [
        f"scheme = {cfg.scheme.value}",
        f"alpha = {real(cfg.alpha)}",
        f"kappa = {real(cfg.kappa)}",
    ]
    if cfg.tau is not None:
        lines.append(f"tau = {real(cfg.tau)}")
    else:
        lines.append(f"T = {real(cfg.T)}")
    lines.append(f"N = {cfg.N}")

    lines += [
        f"S = {real(cfg.S)}",
        f"dim = {cfg.dim}",
        "cells = " + ", ".join(str(n) for n in cfg.cells),
        "length = " + ", ".join(real(L) for L in cfg.lengths),
        f"initial_condition = {cfg.initial_condition}",
    ]
    lines += [f"ic.{k} = {real(v)}" for k, v in cfg.ic_params]
    if cfg.seed is not None:
        lines.append(f"seed = {cfg.seed}")
    if cfg.snapshot_times:
        lines.append("snapshot_times = " + ", ".join(real(t) for t in cfg.snapshot_times))

    lines += [
        f"output_dir = {cfg.output_dir}",
        f"linear_mode = {str(cfg.linear_mode).lower()}",
        f"emit_pgm = {str(cfg.emit_pgm).lower()}",
        f"newton_tol = {real(cfg.newton_tol)}",
        f"newton_max = {cfg.newton_max}",
        f"cg_tol = {real(cfg.cg_tol)}",
    ]
    return "\n".join(lines) + "\n"


# }}}
