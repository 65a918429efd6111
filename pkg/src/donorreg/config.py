"""Run configuration: a flat ``key = value`` text file with ``#`` comments.

Values are in display units (T, mT, MHz, GHz/T, gauss, ms, ns) and are
converted to internal units only when building model objects. Unknown keys
and malformed values are errors that name the offending line.
"""
from dataclasses import dataclass, fields
import math
import os

import numpy as np

from .protocols import Ks
from .relaxation import GAUSS, RelaxationScenario
from .spin_model import SystemParams

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config", "dump_config",
           "SEED_ENV"]

SEED_ENV = "DONORREG_SEED"
_SOURCES = ("perturbative-0", "perturbative-2", "exact")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    b_T: float = 3.3
    delta_b_mT: float = 0.5
    A_MHz: float = 116.0
    J_MHz: float = 0.5
    gamma_e_GHz_per_T: float = 28.1818
    gamma_n_MHz_per_T: float = 17.25144
    grad_T_per_m: float = None
    spacing_nm: float = None
    K_e: int = 103
    K_e_prime: int = 1
    K_n: int = 33620
    energy_source: str = "perturbative-2"
    sim_source: str = "exact"
    seed: int = 20240229
    realizations: int = 100
    workers: int = 1
    protocol_initial: str = "random"
    sweep_j_MHz: tuple = (0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0)
    sweep_db_J_MHz: float = 2.0
    sweep_db_min_mT: float = 0.1
    sweep_db_max_mT: float = 5.0
    sweep_db_points: int = 25
    relax_B0_T: float = 3.3
    relax_Bx_gauss: float = 0.5
    relax_Tc_ms: float = 6.0
    relax_Sz0: float = 0.5
    relax_step_ns: float = 1.0
    relax_samples: int = 2001
    temperature_K: float = 1.0
    T2_ms: float = 60.0

    def __post_init__(self):
        for name in ("energy_source", "sim_source"):
            if getattr(self, name) not in _SOURCES:
                raise ConfigError(f"{name} must be one of {', '.join(_SOURCES)}")
        if (self.grad_T_per_m is None) != (self.spacing_nm is None):
            raise ConfigError("grad_T_per_m and spacing_nm must be given together")
        for name in ("K_e", "K_e_prime", "K_n", "realizations", "workers", "sweep_db_points"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.protocol_initial != "random" and self.protocol_initial not in ("6", "7", "14", "15"):
            raise ConfigError("protocol_initial must be 'random' or one of 6, 7, 14, 15")
        if not self.sweep_j_MHz:
            raise ConfigError("sweep_j_MHz must not be empty")

    @property
    def delta_b_T(self):
        """Half field difference; the gradient form gives ``2 delta_b = grad * spacing``."""
        if self.grad_T_per_m is not None:
            return self.grad_T_per_m * self.spacing_nm * 1e-9 / 2.0
        return self.delta_b_mT * 1e-3

    def params(self):
        try:
            return SystemParams.from_display(
                b_T=self.b_T, delta_b_mT=self.delta_b_T * 1e3, A_MHz=self.A_MHz,
                J_MHz=self.J_MHz, gamma_e_GHz_per_T=self.gamma_e_GHz_per_T,
                gamma_n_MHz_per_T=self.gamma_n_MHz_per_T)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def ks(self):
        return Ks(self.K_e, self.K_e_prime, self.K_n)

    def relaxation_scenario(self):
        p = self.params()
        try:
            return RelaxationScenario.from_params(
                p, B0=self.relax_B0_T, Bx=self.relax_Bx_gauss * GAUSS,
                Tc=self.relax_Tc_ms * 1e-3, Sz0=self.relax_Sz0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sweep_db_grid(self):
        """Full field differences ``2 delta_b`` in tesla, log-spaced."""
        return list(np.geomspace(self.sweep_db_min_mT, self.sweep_db_max_mT,
                                 self.sweep_db_points) * 1e-3)

    def sweep_j_grid(self):
        return [v * 1e6 for v in self.sweep_j_MHz]


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT = {"K_e", "K_e_prime", "K_n", "seed", "realizations", "workers", "sweep_db_points",
        "relax_samples"}
_STR = {"energy_source", "sim_source", "protocol_initial"}
_LIST = {"sweep_j_MHz"}
_OPTIONAL = {"grad_T_per_m", "spacing_nm"}


def _convert(key, raw):
    if key in _STR:
        return raw
    if key in _LIST:
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if key in _OPTIONAL and raw.lower() in ("none", ""):
        return None
    if key in _INT:
        value = int(raw, 0)
        return value
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return value


def parse_config(text, env=None):
    """Parse config text; ``env`` (default ``os.environ``) may override ``seed``."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r} ({exc})") from exc
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            values["seed"] = int(env[SEED_ENV], 0)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}: not an integer: {env[SEED_ENV]!r}") from exc
    return RunConfig(**values)


def load_config(path, env=None):
    if path is None:
        return parse_config("", env)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, env)


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    return str(value) if not isinstance(value, float) else repr(value)


def dump_config(cfg):
    """Text that :func:`parse_config` reads back to an identical config."""
    return "".join(f"{name} = {_format(getattr(cfg, name))}\n" for name in _FIELDS)

