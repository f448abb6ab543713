"""Run configuration with layered overrides.

Precedence, highest first: command-line flags, ``FRAMECURVE_*`` environment
variables, a JSON config file, built-in defaults. The config file is given by
``--config`` or ``FRAMECURVE_CONFIG``. Keys are shared by all three layers::

    key          flag            environment              default
    grid         --grid          FRAMECURVE_GRID          256
    dp_window    --dp-window     FRAMECURVE_DP_WINDOW     6
    seed_stride  --seed-stride   FRAMECURVE_SEED_STRIDE   1
    max_iters    --max-iters     FRAMECURVE_MAX_ITERS     10
    tol          --tol           FRAMECURVE_TOL           1e-4
    steps        --steps         FRAMECURVE_STEPS         10
    seed         --seed          FRAMECURVE_SEED          0
    mode         --mode          FRAMECURVE_MODE          (inferred from inputs)
    jobs         --jobs          FRAMECURVE_JOBS          1
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace

from .curvecore import GridSpec
from .errors import ParseError
from .geodesic import Mode
from .registration import DPConfig

ENV_PREFIX = "FRAMECURVE_"


@dataclass(frozen=True)
class RunConfig:
    grid: int = 256
    dp_window: int = 6
    seed_stride: int = 1
    max_iters: int = 10
    tol: float = 1e-4
    steps: int = 10
    seed: int = 0
    mode: str | None = None
    jobs: int = 1

    def __post_init__(self):
        for k in ("grid", "dp_window", "seed_stride", "max_iters", "steps", "jobs"):
            if getattr(self, k) < 1:
                raise ValueError(f"{k} must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.mode is not None:
            Mode(self.mode)

    @property
    def dp(self) -> DPConfig:
        return DPConfig(window=self.dp_window, seed_stride=self.seed_stride, max_iters=self.max_iters, tol=self.tol)

    @property
    def grid_spec(self) -> GridSpec:
        return GridSpec(self.grid)

    def to_dict(self) -> dict:
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value, source: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if kind == "float":
            return float(value)
        return None if value is None else str(value)
    except (TypeError, ValueError):
        raise ParseError(f"invalid value {value!r} for {key}", source, None) from None


def _from_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", path, None) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError("config must be a JSON object", path, None)
    unknown = sorted(set(data) - set(_TYPES))
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}", path, None)
    return {k: _coerce(k, v, path) for k, v in data.items()}


def _from_env(env) -> dict:
    out = {}
    for key in _TYPES:
        name = ENV_PREFIX + key.upper()
        if name in env:
            out[key] = _coerce(key, env[name], name)
    return out


def load_config(flags: dict | None = None, config_path: str | None = None, env=None) -> RunConfig:
    """Merge defaults, config file, environment and ``flags`` (``None`` values ignored)."""
    env = os.environ if env is None else env
    path = config_path or env.get(ENV_PREFIX + "CONFIG")
    merged: dict = {}
    if path:
        merged.update(_from_file(path))
    merged.update(_from_env(env))
    merged.update({k: v for k, v in (flags or {}).items() if v is not None and k in _TYPES})
    try:
        return replace(RunConfig(), **merged)
    except ValueError as exc:
        raise ParseError(f"invalid configuration: {exc}", path, None) from None
