"""Synthetic low-rank cubes for tests and demos."""

import numpy as np

__all__ = ["cp_cube", "mixing_cube", "t_product"]


def t_product(a, b):
    """Tensor-tensor product of ``(n1, r, n3)`` and ``(r, n2, n3)`` cubes."""
    ab = np.einsum("irk,rjk->ijk", np.fft.fft(a, axis=2), np.fft.fft(b, axis=2))
    return np.fft.ifft(ab, axis=2).real


def _smooth(rng, n, passes):
    v = rng.uniform(size=n)
    kernel = np.ones(3) / 3
    for _ in range(passes):
        v = np.convolve(np.pad(v, 1, mode="edge"), kernel, mode="valid")
    return v


def mixing_cube(shape, rank, seed=0, smooth=2):
    """Linear-mixing cube ``sum_r A_r(i, j) s_r(k)`` scaled to ``[0, 1]``.

    Abundance maps ``A_r`` are non-negative and sum to one per pixel; the
    spectra ``s_r`` are non-negative, lightly smoothed random curves.  The
    tubal rank is at most ``rank`` after the mode-1 and mode-2 permutations;
    the frontal slices themselves are abundance maps and are generally full
    rank.
    """
    n1, n2, n3 = shape
    rng = np.random.default_rng(seed)
    maps = rng.gamma(1.0, size=(rank, n1, n2))
    for r in range(rank):
        for _ in range(smooth):
            m = maps[r]
            maps[r] = (m + np.roll(m, 1, 0) + np.roll(m, -1, 0) + np.roll(m, 1, 1) + np.roll(m, -1, 1)) / 5
    maps /= maps.sum(axis=0, keepdims=True)
    spectra = np.stack([_smooth(rng, n3, smooth) for _ in range(rank)])
    x = np.einsum("rij,rk->ijk", maps, spectra)
    return x / x.max()


def cp_cube(shape, rank, seed=0, smooth=2):
    """Sum of ``rank`` outer products of non-negative smooth factors, scaled
    to a maximum of 1.

    Every frequency slice of every mode permutation has rank at most
    ``rank``.
    """
    rng = np.random.default_rng(seed)
    factors = [np.stack([_smooth(rng, n, smooth) for _ in range(rank)]) for n in shape]
    x = np.einsum("ri,rj,rk->ijk", *factors)
    return x / x.max()
