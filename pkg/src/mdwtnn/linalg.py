"""Matrix kernels: complex SVD, soft thresholding and partial singular value
thresholding (PSVT)."""

from typing import NamedTuple

import numpy as np

__all__ = [
    "NumericalFailure",
    "SvdFactors",
    "svd_complex",
    "svd_stack",
    "soft_threshold",
    "psvt",
    "shrink_tail",
]


class NumericalFailure(ArithmeticError):
    """An iterative matrix factorisation did not converge.

    ``residual`` is the last reported residual if the backend exposes one,
    otherwise ``None``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SvdFactors(NamedTuple):
    """Thin SVD ``m == u @ diag(s) @ v.conj().T``."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def svd_stack(a):
    """Thin SVD of a matrix or a stack of matrices ``(..., m, n)``.

    Returns ``(u, s, vh)`` as numpy does, translating LAPACK convergence
    failures to :class:`NumericalFailure`.
    """
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("SVD input contains NaN or Inf")
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc


def svd_complex(m):
    """Thin SVD with a deterministic phase convention.

    The first component of each left singular vector whose modulus exceeds
    ``1e-12`` times the column's largest modulus is made real and
    non-negative; the matching right singular vector is rotated by the same
    phase so the product is unchanged.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    u, s, vh = svd_stack(m)
    v = vh.conj().T
    if u.size:
        mag = np.abs(u)
        lead = np.argmax(mag > 1e-12 * mag.max(axis=0, keepdims=True), axis=0)
        pivot = u[lead, np.arange(u.shape[1])]
        phase = np.ones_like(pivot)
        nz = np.abs(pivot) > 0
        phase[nz] = pivot[nz] / np.abs(pivot[nz])
        u = u * phase.conj()
        v = v * phase.conj()
    return SvdFactors(u, s, v)


def soft_threshold(x, t):
    """``sign(x) * max(|x| - t, 0)``, elementwise for arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return out if out.ndim else float(out)


def shrink_tail(s, t, r):
    """Keep the first ``r`` entries of ``s`` and soft-threshold the rest by ``t``.

    ``s`` may be a stack ``(..., l)``; ``t`` and ``r`` broadcast over the
    leading axes.  The split is by index, so ties at ``s[r-1] == s[r]`` are
    resolved in favour of the earlier position.
    """
    s = np.asarray(s, dtype=float)
    idx = np.arange(s.shape[-1])
    r = np.asarray(r)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    return np.where(idx < r, s, np.maximum(s - t, 0.0))


def psvt(m, t, r):
    """Partial singular value thresholding.

    Exact minimiser of ``0.5 * ||X - m||_F^2 + t * sum_{i > r} sigma_i(X)``:
    the ``r`` leading singular values of ``m`` are kept and the remainder
    are soft-thresholded by ``t``.  ``r`` larger than ``min(m.shape)`` is
    clamped.
    """
    if t < 0:
        raise ValueError("threshold must be non-negative")
    if r < 0:
        raise ValueError("number of preserved singular values must be >= 0")
    m = np.asarray(m)
    u, s, vh = svd_stack(m)
    r = min(int(r), s.size)
    s_new = shrink_tail(s, t, r)
    return (u * s_new) @ vh
