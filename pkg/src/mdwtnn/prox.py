"""Double-weighted singular value shrinkage and the family of tensor
nuclear norms built on the mode-3 DFT.

All norms here are evaluated on frequency slices ``fft_mode3(x)[:, :, k]``:

========  ==========================================================
tnn       ``(1/n3) sum_k ||X_k||_*``
fwtnn     ``sum_k w_k ||X_k||_*``  (no ``1/n3`` factor)
dwtnn     ``(1/n3) sum_k w_k sum_{r > TW(k)} sigma_r(X_k)``
mdwtnn    ``sum_p alpha_p dwtnn(permute_mode(x, p), w^p, TW^p)``
========  ==========================================================
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import shrink_tail, svd_stack
from .tensor_core import as_cube, fft_mode3, ifft_mode3, permute_mode
from .weights import slice_singular_values

__all__ = ["ShrinkSpec", "dw_svt", "tnn", "fwtnn", "dwtnn", "mdwtnn", "check_alpha"]


@dataclass(frozen=True)
class ShrinkSpec:
    """Prox strength plus per-slice weights and truncation counts."""

    tau: float
    freq_weights: np.ndarray
    trunc_counts: np.ndarray

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        w = np.asarray(self.freq_weights, dtype=float)
        tw = np.asarray(self.trunc_counts)
        if w.ndim != 1 or tw.ndim != 1 or w.shape != tw.shape:
            raise ValueError(
                f"weights and truncation counts must be 1-D of equal length, "
                f"got {w.shape} and {tw.shape}"
            )
        if np.any(tw < 0):
            raise ValueError("truncation counts must be non-negative")
        object.__setattr__(self, "freq_weights", w)
        object.__setattr__(self, "trunc_counts", tw.astype(int))

    def check(self, n3):
        if self.freq_weights.shape[0] != n3:
            raise ValueError(
                f"shrink spec has {self.freq_weights.shape[0]} slice entries, cube has n3={n3}"
            )


def dw_svt(y, spec):
    """Proximal operator of ``tau * dwtnn`` at ``y`` for fixed weights.

    Each frequency slice ``k`` keeps its ``TW(k)`` leading singular values and
    soft-thresholds the rest by ``tau * w_k``.  Only slices ``0..n3//2`` are
    decomposed; the others are filled in as complex conjugates, so the
    weights of the mirrored half are not consulted.
    """
    y = as_cube(y)
    n3 = y.shape[2]
    spec.check(n3)
    if spec.tau == 0:
        return y.copy()
    half = n3 // 2 + 1
    yb = fft_mode3(y)
    stack = np.moveaxis(yb[:, :, :half], 2, 0)
    u, s, vh = svd_stack(stack)
    s_new = shrink_tail(s, spec.tau * spec.freq_weights[:half], spec.trunc_counts[:half])
    recon = (u * s_new[:, None, :]) @ vh
    out = np.empty_like(yb)
    out[:, :, :half] = np.moveaxis(recon, 0, 2)
    if half < n3:
        mirror = np.arange(half, n3)
        out[:, :, mirror] = np.conj(out[:, :, n3 - mirror])
    # DC (and Nyquist for even n3) slices are real for real input
    out[:, :, 0] = out[:, :, 0].real
    if n3 % 2 == 0:
        out[:, :, n3 // 2] = out[:, :, n3 // 2].real
    return ifft_mode3(out)


def _check_len(v, n3, what):
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != n3:
        raise ValueError(f"{what} must have length n3={n3}, got shape {v.shape}")
    return v


def tnn(x):
    """Tensor nuclear norm."""
    x = as_cube(x)
    return float(slice_singular_values(x).sum() / x.shape[2])


def fwtnn(x, w):
    """Frequency-weighted nuclear norm ``sum_k w_k ||X_k||_*``."""
    x = as_cube(x)
    w = _check_len(w, x.shape[2], "weights")
    return float(np.dot(w, slice_singular_values(x).sum(axis=1)))


def dwtnn(x, w, tw):
    """Double-weighted nuclear norm: weighted partial sums of singular values."""
    x = as_cube(x)
    n3 = x.shape[2]
    w = _check_len(w, n3, "weights")
    tw = _check_len(tw, n3, "truncation counts")
    s = slice_singular_values(x)
    tail = np.arange(s.shape[1])[None, :] >= np.asarray(tw)[:, None]
    return float(np.dot(w, np.sum(s * tail, axis=1)) / n3)


def check_alpha(alpha, warn=True):
    """Validate mode weights: non-negative, summing to one.

    Zero entries are tolerated with a warning so single-mode reductions can
    be expressed.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (3,):
        raise ValueError(f"alpha must have 3 entries, got {alpha.shape}")
    if np.any(~np.isfinite(alpha)) or np.any(alpha < 0):
        raise ValueError(f"alpha entries must be non-negative, got {alpha.tolist()}")
    if abs(alpha.sum() - 1.0) > 1e-9:
        raise ValueError(f"alpha must sum to 1, got {alpha.sum()!r}")
    if warn and np.any(alpha == 0):
        warnings.warn("alpha has zero entries; those modes are ignored", stacklevel=2)
    return alpha


def mdwtnn(x, alpha, plan):
    """Mode-weighted average of the double-weighted norm of each permutation."""
    x = as_cube(x)
    alpha = check_alpha(alpha)
    total = 0.0
    for p in (1, 2, 3):
        w, tw = plan.mode(p)
        total += alpha[p - 1] * dwtnn(permute_mode(x, p), w, tw)
    return total
