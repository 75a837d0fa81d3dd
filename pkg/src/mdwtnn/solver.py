"""ADMM solver for mixed-noise removal with the multi-modal double-weighted
tensor nuclear norm.

Model::

    min  sum_p alpha_p ||Z_p||_dw  +  lam ||S||_1  +  tau_n ||N||_F^2
    s.t. Y = X + S + N,   Z_p = permute_mode(X, p),  p = 1, 2, 3

Augmented Lagrangian terms are ``<X_p - Z_p, G_p> + mu_p/2 ||X_p - Z_p||^2``
and ``<Y - X - S - N, L> + beta/2 ||Y - X - S - N||^2``.  Each iteration runs
the Z, X, S and N updates in that order (Gauss-Seidel), then dual ascent on
``G_p`` and ``L``, then penalty growth and a refresh of the frequency
weights from the new estimate.
"""

import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import List, NamedTuple, Optional

import numpy as np

from .linalg import soft_threshold
from .prox import ShrinkSpec, check_alpha, dw_svt
from .tensor_core import as_cube, frobenius_norm, ipermute_mode, permute_mode
from .weights import (
    TRUNCATION_MODES,
    WeightPlan,
    build_weight_plan,
    mode_frequency_weights,
    truncation_weights,
)

__all__ = [
    "DivergenceError",
    "SolverConfig",
    "SolverState",
    "IterationRecord",
    "DenoiseResult",
    "default_lambda",
    "init_state",
    "update_z",
    "update_x",
    "update_s",
    "update_n",
    "update_multipliers",
    "denoise",
]

log = logging.getLogger(__name__)


class DivergenceError(ArithmeticError):
    """Non-finite values appeared in the iterates."""

    def __init__(self, iteration, variable):
        super().__init__(f"non-finite values in {variable} at iteration {iteration}")
        self.iteration = iteration
        self.variable = variable


def default_lambda(shape):
    """Sparse-noise weight ``0.5 / sqrt(max(n1, n2) n3)``."""
    n1, n2, n3 = shape
    return 0.5 / np.sqrt(max(n1, n2) * n3)


@dataclass
class SolverConfig:
    """Hyperparameters of :func:`denoise`.

    ``lam=None`` resolves to :func:`default_lambda` of the input shape.
    Truncation counts start from the observation (``tw_init="observation"``)
    or at zero (``tw_init="zero"``).  ``tw_refresh=m > 0`` recomputes them
    from the running estimate every ``m`` iterations; ``0`` never does.
    """

    lam: Optional[float] = None
    tau_n: float = 10.0
    alpha: tuple = (1 / 3, 1 / 3, 1 / 3)
    mu0: float = 1e-3
    beta0: float = 1e-3
    rho: float = 1.2
    mu_max: float = 1e10
    tol: float = 1e-6
    max_iter: int = 100
    c1: float = 1.0
    c2: float = 2.0
    eta: float = 0.95
    truncation: str = "max-ratio"
    frequency_weighting: bool = True
    weight_refresh: bool = True
    tw_init: str = "observation"
    tw_refresh: int = 0
    threads: int = 1

    def __post_init__(self):
        self.alpha = tuple(float(a) for a in self.alpha)
        check_alpha(self.alpha, warn=False)
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.tau_n < 0:
            raise ValueError("tau_n must be non-negative")
        if not (self.mu0 > 0 and self.beta0 > 0 and self.mu_max > 0):
            raise ValueError("penalties must be positive")
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.c1 > 0 or self.c2 < 0:
            raise ValueError("need c1 > 0 and c2 >= 0")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.truncation not in TRUNCATION_MODES:
            raise ValueError(f"truncation must be one of {TRUNCATION_MODES}")
        if self.tw_init not in ("observation", "zero"):
            raise ValueError("tw_init must be 'observation' or 'zero'")
        if self.tw_refresh < 0 or self.threads < 1:
            raise ValueError("tw_refresh must be >= 0 and threads >= 1")

    def resolved(self, shape):
        """Copy with ``lam`` filled in for a cube of ``shape``."""
        cfg = SolverConfig(**asdict(self))
        if cfg.lam is None:
            cfg.lam = float(default_lambda(shape))
        return cfg

    def as_dict(self):
        d = asdict(self)
        d["alpha"] = list(self.alpha)
        return d


@dataclass
class SolverState:
    """ADMM iterates.  ``z[p-1]`` and ``gamma[p-1]`` live in the mode-p
    permuted orientation."""

    x: np.ndarray
    s: np.ndarray
    n: np.ndarray
    z: list
    gamma: list
    lam: np.ndarray
    mu: np.ndarray
    beta: float
    iter: int = 0
    residual_history: list = field(default_factory=list)


class IterationRecord(NamedTuple):
    iteration: int
    constraint: float
    consensus: float
    change: float
    mu: float
    beta: float
    seconds: dict


@dataclass
class DenoiseResult:
    x_hat: np.ndarray
    s_hat: np.ndarray
    n_hat: np.ndarray
    iterations: int
    converged: bool
    constraint_residual: float
    consensus_residual: float
    wall_time: float
    config: dict
    plan: WeightPlan
    history: List[IterationRecord]

    def log_records(self):
        """Iteration log as a list of plain dicts."""
        return [r._asdict() for r in self.history]


def init_state(y, cfg):
    """``X = Y``, ``S = N = 0``, ``Z_p = permute(Y, p)``, zero multipliers."""
    y = as_cube(y)
    zero = np.zeros_like(y)
    z = [permute_mode(y, p).copy() for p in (1, 2, 3)]
    gamma = [np.zeros_like(zp) for zp in z]
    return SolverState(
        x=y.copy(), s=zero.copy(), n=zero.copy(), z=z, gamma=gamma,
        lam=zero.copy(), mu=np.full(3, float(cfg.mu0)), beta=float(cfg.beta0),
    )


def _z_one(state, cfg, plan, p):
    mu = state.mu[p - 1]
    w, tw = plan.mode(p)
    spec = ShrinkSpec(cfg.alpha[p - 1] / mu, w, tw)
    return dw_svt(permute_mode(state.x, p) + state.gamma[p - 1] / mu, spec)


def update_z(state, cfg, plan, executor=None):
    """Prox step of each mode's double-weighted norm at ``X_p + G_p / mu_p``."""
    if executor is None:
        return [_z_one(state, cfg, plan, p) for p in (1, 2, 3)]
    futures = [executor.submit(_z_one, state, cfg, plan, p) for p in (1, 2, 3)]
    return [f.result() for f in futures]


def update_x(state, cfg, y):
    """Minimiser of the X-subproblem.

    The quadratic ``sum_p mu_p/2 ||X_p - Z_p + G_p/mu_p||^2 +
    beta/2 ||Y - X - S - N + L/beta||^2`` is stationary at the weighted
    average below, with denominator ``sum_p mu_p + beta``.
    """
    num = state.beta * (y - state.s - state.n) + state.lam
    for p in (1, 2, 3):
        mu = state.mu[p - 1]
        num = num + ipermute_mode(mu * state.z[p - 1] - state.gamma[p - 1], p)
    return num / (np.sum(state.mu) + state.beta)


def update_s(state, cfg, y):
    """Soft-threshold ``Y - X - N + L/beta`` by ``lam/beta`` (N from the previous step)."""
    return soft_threshold(y - state.x - state.n + state.lam / state.beta, cfg.lam / state.beta)


def update_n(state, cfg, y):
    """``beta (Y - X - S + L/beta) / (2 tau_n + beta)``, using the fresh S."""
    b = state.beta
    return (b * (y - state.x - state.s) + state.lam) / (2.0 * cfg.tau_n + b)


def update_multipliers(state, cfg, y):
    """Dual ascent: ``G_p += mu_p (X_p - Z_p)``, ``L += beta (Y - X - S - N)``."""
    gamma = [
        state.gamma[p - 1] + state.mu[p - 1] * (permute_mode(state.x, p) - state.z[p - 1])
        for p in (1, 2, 3)
    ]
    lam = state.lam + state.beta * (y - state.x - state.s - state.n)
    return gamma, lam


def _residuals(state, y):
    ynorm = max(frobenius_norm(y), 1e-12)
    xnorm = max(frobenius_norm(state.x), 1e-12)
    constraint = frobenius_norm(y - state.x - state.s - state.n) / ynorm
    consensus = max(
        frobenius_norm(permute_mode(state.x, p) - state.z[p - 1]) for p in (1, 2, 3)
    ) / xnorm
    return constraint, consensus


def _check_finite(state, iteration):
    for name in ("x", "s", "n", "lam"):
        if not np.all(np.isfinite(getattr(state, name))):
            raise DivergenceError(iteration, name)
    for p in (1, 2, 3):
        if not (np.all(np.isfinite(state.z[p - 1])) and np.all(np.isfinite(state.gamma[p - 1]))):
            raise DivergenceError(iteration, f"z/gamma[{p}]")


def _plan_for(y, cfg):
    plan = build_weight_plan(
        y, c1=cfg.c1, c2=cfg.c2, eta=cfg.eta,
        truncation="none" if cfg.tw_init == "zero" else cfg.truncation,
        frequency_weighting=cfg.frequency_weighting,
    )
    return replace(plan, truncation=cfg.truncation)


def denoise(y, cfg=None, plan=None, callback=None):
    """Split ``y`` into a low-rank estimate, sparse noise and Gaussian noise.

    Parameters
    ----------
    y : ndarray, shape (n1, n2, n3)
        Observed cube, nominally scaled to [0, 1].
    cfg : SolverConfig, optional
    plan : WeightPlan, optional
        Initial weights.  Built from ``y`` when omitted.
    callback : callable, optional
        Called with each :class:`IterationRecord`.

    Returns
    -------
    DenoiseResult
    """
    t0 = time.perf_counter()
    y = as_cube(y, finite=True)
    cfg = (cfg or SolverConfig()).resolved(y.shape)
    if y.size and (y.min() < -0.5 or y.max() > 1.5):
        warnings.warn("input values lie well outside [0, 1]; default parameters assume normalised data",
                      stacklevel=2)
    if plan is None:
        plan = _plan_for(y, cfg)
    state = init_state(y, cfg)
    executor = ThreadPoolExecutor(max_workers=min(cfg.threads, 3)) if cfg.threads > 1 else None
    converged = False
    constraint = consensus = float("nan")
    try:
        for it in range(1, cfg.max_iter + 1):
            x_prev = state.x
            secs = {}
            t = time.perf_counter()
            state.z = update_z(state, cfg, plan, executor)
            secs["z"] = time.perf_counter() - t
            t = time.perf_counter()
            state.x = update_x(state, cfg, y)
            secs["x"] = time.perf_counter() - t
            t = time.perf_counter()
            state.s = update_s(state, cfg, y)
            state.n = update_n(state, cfg, y)
            state.gamma, state.lam = update_multipliers(state, cfg, y)
            secs["snl"] = time.perf_counter() - t
            _check_finite(state, it)

            constraint, consensus = _residuals(state, y)
            change = frobenius_norm(state.x - x_prev) / max(frobenius_norm(x_prev), 1e-12)
            rec = IterationRecord(it, constraint, consensus, change,
                                  float(state.mu[0]), float(state.beta), secs)
            state.iter = it
            state.residual_history.append(rec)
            if callback is not None:
                callback(rec)
            log.debug("iter %d constraint %.3e consensus %.3e change %.3e",
                      it, constraint, consensus, change)
            if max(constraint, consensus) < cfg.tol:
                converged = True
                break

            state.mu = np.minimum(cfg.rho * state.mu, cfg.mu_max)
            state.beta = min(cfg.rho * state.beta, cfg.mu_max)
            if cfg.tw_refresh and it % cfg.tw_refresh == 0 and cfg.truncation != "none":
                plan = replace(plan, trunc_counts=tuple(
                    truncation_weights(permute_mode(state.x, p), cfg.eta, cfg.truncation)
                    for p in (1, 2, 3)))
            if cfg.weight_refresh and cfg.frequency_weighting:
                plan = plan.with_freq_weights(
                    mode_frequency_weights(state.x, cfg.c1, cfg.c2, plan.eps, plan.delta)
                )
    finally:
        if executor is not None:
            executor.shutdown()

    return DenoiseResult(
        x_hat=state.x, s_hat=state.s, n_hat=state.n, iterations=state.iter,
        converged=converged, constraint_residual=constraint, consensus_residual=consensus,
        wall_time=time.perf_counter() - t0, config=cfg.as_dict(), plan=plan,
        history=state.residual_history,
    )
