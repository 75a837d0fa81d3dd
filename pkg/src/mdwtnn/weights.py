"""Adaptive frequency weights and per-slice truncation counts.

Every frequency slice ``k`` of a (permuted) cube gets two numbers:

* a frequency weight ``w_k = c1 / max(log(e_k + eps), delta) + c2`` where
  ``e_k`` is the slice's squared Frobenius norm.  Energetic slices (low
  frequencies, profile content) get small weights; weak slices get large
  ones.  The ``delta`` floor keeps the weight bounded for ``e_k <= 1``.
* a truncation count ``TW(k)``: how many leading singular values of the slice
  are exempt from shrinkage.
"""

from dataclasses import dataclass, replace

import numpy as np

from .linalg import NumericalFailure
from .tensor_core import as_cube, fft_mode3, permute_mode, permuted_shape

__all__ = [
    "EPS",
    "DELTA",
    "TRUNCATION_MODES",
    "WeightPlan",
    "slice_energies",
    "frequency_weights",
    "slice_singular_values",
    "truncation_weights",
    "build_weight_plan",
    "uniform_weight_plan",
]

EPS = 1e-10
DELTA = 1e-2
TRUNCATION_MODES = ("max-ratio", "energy-ratio", "none")


@dataclass(frozen=True)
class WeightPlan:
    """Per-mode frequency weights and truncation counts.

    ``freq_weights[p - 1]`` and ``trunc_counts[p - 1]`` belong to the mode-p
    permutation and have length ``n_p``.
    """

    freq_weights: tuple
    trunc_counts: tuple
    c1: float = 1.0
    c2: float = 2.0
    eta: float = 0.95
    eps: float = EPS
    delta: float = DELTA
    truncation: str = "max-ratio"
    frequency_weighting: bool = True

    def mode(self, p):
        return self.freq_weights[p - 1], self.trunc_counts[p - 1]

    def with_freq_weights(self, weights):
        return replace(self, freq_weights=tuple(np.asarray(w, dtype=float) for w in weights))

    def as_dict(self):
        return {
            "c1": self.c1,
            "c2": self.c2,
            "eta": self.eta,
            "eps": self.eps,
            "delta": self.delta,
            "truncation": self.truncation,
            "frequency_weighting": self.frequency_weighting,
            "freq_weights": [w.tolist() for w in self.freq_weights],
            "trunc_counts": [t.tolist() for t in self.trunc_counts],
        }


def slice_energies(xb):
    """Squared Frobenius norm of each frontal slice."""
    xb = np.asarray(xb)
    return np.sum(np.abs(xb) ** 2, axis=(0, 1))


def frequency_weights(xb, c1, c2, eps=EPS, delta=DELTA):
    """Frequency weight of every slice of a transformed cube ``xb``.

    ``w_k = c1 / max(log(||xb[:, :, k]||_F^2 + eps), delta) + c2``.
    """
    if not c1 > 0:
        raise ValueError("c1 must be positive")
    if c2 < 0:
        raise ValueError("c2 must be non-negative")
    if not delta > 0:
        raise ValueError("delta must be positive")
    denom = np.maximum(np.log(slice_energies(xb) + eps), delta)
    return c1 / denom + c2


def slice_singular_values(y):
    """Singular values of every frequency slice of ``y``, shape ``(n3, l)``."""
    yb = fft_mode3(as_cube(y))
    stack = np.moveaxis(yb, 2, 0)
    try:
        return np.linalg.svd(stack, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


def _count_max_ratio(s, eta):
    # strict inequality; an all-zero slice has no value above 0
    return np.sum(s > s.max(axis=1, keepdims=True) * eta, axis=1)


def _count_energy_ratio(s, eta):
    total = s.sum(axis=1, keepdims=True)
    csum = np.cumsum(s, axis=1)
    reached = csum >= (1.0 - eta) * total
    counts = np.argmax(reached, axis=1) + 1
    return np.where(total[:, 0] > 0, counts, 0)


def truncation_weights(y, eta, mode="max-ratio"):
    """Number of leading singular values to preserve in each frequency slice.

    ``"max-ratio"`` counts singular values strictly above ``eta * max(s)``.
    ``"energy-ratio"`` takes the smallest ``r`` whose leading sum reaches
    ``(1 - eta)`` of the slice's total.  ``"none"`` returns zeros.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    y = as_cube(y)
    if mode == "none":
        return np.zeros(y.shape[2], dtype=int)
    s = slice_singular_values(y)
    if mode == "max-ratio":
        counts = _count_max_ratio(s, eta)
    elif mode == "energy-ratio":
        counts = _count_energy_ratio(s, eta)
    else:
        raise ValueError(f"unknown truncation mode {mode!r}; expected one of {TRUNCATION_MODES}")
    return counts.astype(int)


def mode_frequency_weights(x, c1, c2, eps=EPS, delta=DELTA, enabled=True):
    """Frequency weights for all three mode permutations of ``x``."""
    out = []
    for p in (1, 2, 3):
        n = permuted_shape(x.shape, p)[2]
        if enabled:
            out.append(frequency_weights(fft_mode3(permute_mode(x, p)), c1, c2, eps, delta))
        else:
            out.append(np.ones(n))
    return tuple(out)


def build_weight_plan(y, c1=1.0, c2=2.0, eta=0.95, truncation="max-ratio",
                      frequency_weighting=True, eps=EPS, delta=DELTA):
    """Weights and truncation counts of ``y`` under each mode permutation.

    With ``frequency_weighting=False`` every weight is 1; with
    ``truncation="none"`` every count is 0.  Both together turn the
    double-weighted norm into the plain tensor nuclear norm.
    """
    y = as_cube(y)
    if truncation not in TRUNCATION_MODES:
        raise ValueError(f"unknown truncation mode {truncation!r}; expected one of {TRUNCATION_MODES}")
    weights = mode_frequency_weights(y, c1, c2, eps, delta, frequency_weighting)
    counts = tuple(truncation_weights(permute_mode(y, p), eta, truncation) for p in (1, 2, 3))
    return WeightPlan(weights, counts, c1=c1, c2=c2, eta=eta, eps=eps, delta=delta,
                      truncation=truncation, frequency_weighting=frequency_weighting)


def uniform_weight_plan(shape):
    """Unit weights and zero truncation counts for a cube of ``shape``."""
    weights = tuple(np.ones(permuted_shape(shape, p)[2]) for p in (1, 2, 3))
    counts = tuple(np.zeros(permuted_shape(shape, p)[2], dtype=int) for p in (1, 2, 3))
    return WeightPlan(weights, counts, truncation="none", frequency_weighting=False)
