"""Dense third-order tensors: mode permutations, mode-3 DFT and norms.

A cube is a plain ``numpy.ndarray`` of shape ``(n1, n2, n3)``.  Index
``(i, j, k)`` addresses row ``i`` and column ``j`` of frontal slice ``k``.
When a cube is flattened (file I/O, oracles) the element order is
frontal-slice-major and column-major inside each slice, i.e. numpy's
Fortran order: ``x.ravel(order="F")``.

The transform convention is the unnormalised forward DFT along the third
axis and a ``1/n3``-scaled inverse, so ``||fft_mode3(x)||_F^2 ==
n3 * ||x||_F^2``.
"""

import numpy as np

__all__ = [
    "SymmetryError",
    "as_cube",
    "check_mode",
    "frontal_slice",
    "permute_mode",
    "ipermute_mode",
    "permuted_shape",
    "fft_mode3",
    "ifft_mode3",
    "frobenius_norm",
    "inner_product",
    "ELEMENT_ORDER",
]

#: Tag written into cube files; see module docstring.
ELEMENT_ORDER = "frontal-slice-major/column-major"

# axis order of permute(x, p), indexed by p
_PERM = {1: (1, 2, 0), 2: (2, 0, 1), 3: (0, 1, 2)}
_IPERM = {1: (2, 0, 1), 2: (1, 2, 0), 3: (0, 1, 2)}

IMAG_TOL = 1e-10


class SymmetryError(ValueError):
    """Inverse transform produced a non-negligible imaginary part."""


def as_cube(x, finite=False, dtype=np.float64):
    """Return `x` as a 3-D array, raising ``ValueError`` if it is not one."""
    x = np.asarray(x, dtype=dtype)
    if x.ndim != 3 or min(x.shape) < 1:
        raise ValueError(f"expected a non-empty 3rd-order tensor, got shape {x.shape}")
    if finite and not np.all(np.isfinite(x)):
        raise ValueError("cube contains NaN or Inf values")
    return x


def check_mode(p):
    """Validate a mode index; only 1, 2 and 3 are legal."""
    if isinstance(p, bool) or p not in (1, 2, 3):
        raise ValueError(f"mode index must be 1, 2 or 3, got {p!r}")
    return int(p)


def frontal_slice(x, k):
    """The ``k``-th frontal slice (1-based) as an ``n1 x n2`` view."""
    n3 = x.shape[2]
    if not 1 <= k <= n3:
        raise IndexError(f"slice {k} out of range 1..{n3}")
    return x[:, :, k - 1]


def permuted_shape(shape, p):
    p = check_mode(p)
    return tuple(shape[a] for a in _PERM[p])


def permute_mode(x, p):
    """Mode-``p`` permutation: mode ``p`` becomes the third (tube) mode.

    ``x[i, j, k] == permute_mode(x, 1)[j, k, i] == permute_mode(x, 2)[k, i, j]``
    and ``permute_mode(x, 3)`` is ``x`` itself.
    """
    p = check_mode(p)
    x = np.asarray(x)
    if p == 3:
        return x
    return np.ascontiguousarray(np.transpose(x, _PERM[p]))


def ipermute_mode(xp, p):
    """Inverse of :func:`permute_mode`."""
    p = check_mode(p)
    xp = np.asarray(xp)
    if p == 3:
        return xp
    return np.ascontiguousarray(np.transpose(xp, _IPERM[p]))


def fft_mode3(x):
    """Unnormalised DFT of every tube ``x[i, j, :]``.

    Any ``n3`` is accepted; numpy's pocketfft handles non-power-of-two
    lengths with mixed-radix and Bluestein kernels.
    """
    x = np.asarray(x)
    if x.ndim != 3:
        raise ValueError(f"expected a 3rd-order tensor, got shape {x.shape}")
    return np.fft.fft(x, axis=2)


def ifft_mode3(xb, tol=IMAG_TOL):
    """Inverse of :func:`fft_mode3`, returning a real cube.

    The input must be conjugate symmetric along the third axis.  Imaginary
    residue up to ``tol`` (relative to the largest magnitude, floored at 1)
    is discarded; anything larger raises :class:`SymmetryError`.
    """
    xb = np.asarray(xb)
    if xb.ndim != 3:
        raise ValueError(f"expected a 3rd-order tensor, got shape {xb.shape}")
    out = np.fft.ifft(xb, axis=2)
    if not np.iscomplexobj(out):
        return out
    scale = max(1.0, float(np.max(np.abs(out), initial=0.0)))
    resid = float(np.max(np.abs(out.imag), initial=0.0))
    if resid > tol * scale:
        raise SymmetryError(
            f"inverse transform has imaginary residue {resid:.3e} "
            f"(tolerance {tol * scale:.3e}); input is not conjugate symmetric"
        )
    return np.ascontiguousarray(out.real)


def frobenius_norm(x):
    """Square root of the sum of squared moduli; works for real and complex."""
    x = np.asarray(x)
    return float(np.sqrt(np.sum(np.abs(x) ** 2)))


def inner_product(x, y):
    """Sum of elementwise products of two equally shaped real cubes."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(np.sum(x * y))
