"""Run configuration: a flat ``key = value`` text format with CLI overrides.

Grammar, one entry per line::

    # comment
    key = value

Blank lines and ``#`` comments are ignored; keys are case-sensitive and
repeated keys are an error.  Values are parsed by key:

* solver keys (``lam``, ``tau_n``, ``alpha``, ``mu0``, ``beta0``, ``rho``,
  ``mu_max``, ``tol``, ``max_iter``, ``c1``, ``c2``, ``eta``, ``truncation``,
  ``frequency_weighting``, ``weight_refresh``, ``tw_init``, ``tw_refresh``,
  ``threads``).  ``alpha`` is three comma-separated numbers, ``lam`` may be
  ``auto``, booleans are ``true``/``false``.
* noise keys: ``case`` (1-5), ``gaussian`` and ``impulse`` (a number or
  ``lo:hi`` for a per-band uniform draw), ``seed``, ``clip``.
* ``peak`` for PSNR.

Precedence is CLI flag > ``THREADS`` environment variable (threads only) >
config file > built-in default.
"""

import os
from dataclasses import dataclass, field
from typing import Optional

from .noise import CASES, Fixed, NoiseSpec, PerBandUniform
from .solver import SolverConfig

__all__ = ["ConfigError", "RunConfig", "parse_config_text", "load_config_file", "build_run_config"]


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


def _bool(v):
    s = str(v).strip().lower()
    if s in ("true", "1", "yes", "on"):
        return True
    if s in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _lam(v):
    if v is None or str(v).strip().lower() in ("auto", "none"):
        return None
    return float(v)


def _alpha(v):
    if isinstance(v, (tuple, list)):
        parts = v
    else:
        parts = str(v).split(",")
    if len(parts) != 3:
        raise ValueError(f"alpha needs three values, got {v!r}")
    return tuple(float(a) for a in parts)


SOLVER_KEYS = {
    "lam": _lam, "tau_n": float, "alpha": _alpha, "mu0": float, "beta0": float,
    "rho": float, "mu_max": float, "tol": float, "max_iter": int, "c1": float,
    "c2": float, "eta": float, "truncation": str, "frequency_weighting": _bool,
    "weight_refresh": _bool, "tw_init": str, "tw_refresh": int, "threads": int,
}


def _level(v):
    if isinstance(v, (Fixed, PerBandUniform)):
        return v
    s = str(v)
    if ":" in s:
        lo, hi = s.split(":", 1)
        return PerBandUniform(float(lo), float(hi))
    return Fixed(float(s))


OTHER_KEYS = {
    "case": lambda v: None if str(v).lower() == "none" else int(v),
    "gaussian": _level, "impulse": _level, "seed": int, "clip": _bool, "peak": float,
}


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of raw strings."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        if key not in SOLVER_KEYS and key not in OTHER_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def load_config_file(path):
    with open(path) as fh:
        return parse_config_text(fh.read(), source=str(path))


@dataclass
class RunConfig:
    """Complete, serialisable description of a run."""

    solver: SolverConfig = field(default_factory=SolverConfig)
    case: Optional[int] = None
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    peak: float = 1.0
    paths: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "solver": self.solver.as_dict(),
            "case": self.case,
            "noise": self.noise.as_dict(),
            "seed": self.seed,
            "peak": self.peak,
            "paths": dict(self.paths),
        }


def build_run_config(file_values=None, overrides=None, paths=None, env=None):
    """Merge defaults, file values, ``THREADS`` and CLI overrides, then validate.

    ``overrides`` holds CLI values already typed or as strings; entries that
    are ``None`` are treated as absent.
    """
    env = os.environ if env is None else env
    merged = dict(file_values or {})
    if "THREADS" in env and env["THREADS"].strip():
        merged["threads"] = env["THREADS"]
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        solver_kw = {k: SOLVER_KEYS[k](v) for k, v in merged.items() if k in SOLVER_KEYS}
        other = {k: OTHER_KEYS[k](v) for k, v in merged.items() if k in OTHER_KEYS}
        solver = SolverConfig(**solver_kw)
        seed = other.get("seed", 0)
        case = other.get("case")
        if case is not None:
            if case not in CASES:
                raise ValueError(f"unknown noise case {case}; expected 1-5")
            g, p = CASES[case]
        else:
            g, p = Fixed(0.0), Fixed(0.0)
        g = other.get("gaussian", g)
        p = other.get("impulse", p)
        noise = NoiseSpec(g, p, seed, other.get("clip", False))
        peak = other.get("peak", 1.0)
        if not peak > 0:
            raise ValueError("peak must be positive")
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(solver=solver, case=case, noise=noise, seed=seed, peak=peak,
                     paths=dict(paths or {}))
