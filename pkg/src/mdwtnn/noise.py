"""Seeded mixed Gaussian + salt-and-pepper noise, added band by band.

Randomness comes from numpy's PCG64 generator.  ``SeedSequence(seed)`` is
spawned into ``n3 + 1`` child streams: child 0 draws the per-band noise
levels, child ``b + 1`` draws band ``b``'s Gaussian field, impulse positions
and impulse values, in that order.  Bands can therefore be generated in any
order with identical results.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .tensor_core import as_cube

__all__ = ["Fixed", "PerBandUniform", "NoiseSpec", "case_spec", "band_levels", "apply_noise", "CASES"]


@dataclass(frozen=True)
class Fixed:
    value: float


@dataclass(frozen=True)
class PerBandUniform:
    lo: float
    hi: float


Level = Union[Fixed, PerBandUniform]


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian standard deviation and impulse fraction, each fixed or drawn
    uniformly per band."""

    gaussian: Level = Fixed(0.0)
    impulse: Level = Fixed(0.0)
    seed: int = 0
    clip: bool = False

    def __post_init__(self):
        for name, level, upper in (("gaussian", self.gaussian, np.inf), ("impulse", self.impulse, 1.0)):
            lo, hi = _bounds(level)
            if lo > hi:
                raise ValueError(f"{name}: lo must not exceed hi")
            if lo < 0 or hi > upper:
                raise ValueError(f"{name} level out of range: {level}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def as_dict(self):
        def enc(level):
            if isinstance(level, Fixed):
                return {"kind": "fixed", "value": level.value}
            return {"kind": "uniform", "lo": level.lo, "hi": level.hi}

        return {"gaussian": enc(self.gaussian), "impulse": enc(self.impulse),
                "seed": int(self.seed), "clip": self.clip}


def _bounds(level) -> Tuple[float, float]:
    if isinstance(level, Fixed):
        return float(level.value), float(level.value)
    if isinstance(level, PerBandUniform):
        return float(level.lo), float(level.hi)
    raise TypeError(f"noise level must be Fixed or PerBandUniform, got {type(level).__name__}")


# Gaussian level is a standard deviation on [0, 1] data
CASES = {
    1: (Fixed(0.1), Fixed(0.2)),
    2: (Fixed(0.2), Fixed(0.2)),
    3: (Fixed(0.1), Fixed(0.4)),
    4: (PerBandUniform(0.1, 0.2), Fixed(0.2)),
    5: (Fixed(0.1), PerBandUniform(0.2, 0.4)),
}


def case_spec(case_id, seed=0):
    """Noise specification of simulated case 1-5."""
    if case_id not in CASES:
        raise ValueError(f"unknown noise case {case_id!r}; expected 1-5")
    g, p = CASES[case_id]
    return NoiseSpec(g, p, seed)


def _streams(seed, n3):
    children = np.random.SeedSequence(int(seed)).spawn(n3 + 1)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _draw(level, rng, n3):
    if isinstance(level, Fixed):
        return np.full(n3, float(level.value))
    return rng.uniform(level.lo, level.hi, size=n3)


def band_levels(spec, n3):
    """Per-band ``(sigma, fraction)`` arrays for a cube with ``n3`` bands."""
    rng = _streams(spec.seed, n3)[0]
    sigma = _draw(spec.gaussian, rng, n3)
    frac = _draw(spec.impulse, rng, n3)
    return sigma, frac


def apply_noise(x, spec):
    """Corrupt each band of ``x`` with Gaussian then salt-and-pepper noise.

    In band ``b``, i.i.d. Gaussian noise of standard deviation ``sigma_b`` is
    added, then exactly ``round(P_b * n1 * n2)`` pixels, chosen without
    replacement, are overwritten with 0 or 1 (equally likely).
    """
    x = as_cube(x, finite=True)
    n1, n2, n3 = x.shape
    streams = _streams(spec.seed, n3)
    sigma, frac = band_levels(spec, n3)
    out = np.empty_like(x)
    npix = n1 * n2
    for b in range(n3):
        rng = streams[b + 1]
        band = x[:, :, b] + sigma[b] * rng.standard_normal((n1, n2))
        count = int(round(frac[b] * npix))
        if count:
            flat = band.reshape(-1, order="F")
            idx = rng.choice(npix, size=count, replace=False)
            flat[idx] = rng.integers(0, 2, size=count).astype(float)
            band = flat.reshape((n1, n2), order="F")
        out[:, :, b] = band
    if spec.clip:
        np.clip(out, 0.0, 1.0, out=out)
    return out
