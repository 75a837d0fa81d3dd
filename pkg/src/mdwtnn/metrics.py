"""Full-reference quality metrics for hyperspectral cubes.

PSNR and SSIM are computed per band (frontal slice) and averaged; SAM is
the angle between reference and test spectra at each pixel, in degrees,
averaged over pixels where both spectra are non-zero.
"""

import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

__all__ = [
    "PSNR_CAP",
    "SSIM_K1",
    "SSIM_K2",
    "SSIM_SIGMA",
    "SSIM_WIN",
    "QualityReport",
    "psnr",
    "ssim",
    "sam",
    "evaluate",
]

PSNR_CAP = 100.0
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_SIGMA = 1.5
SSIM_WIN = 11
SAM_MIN_NORM = 1e-12


def _pair(ref, test):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {test.shape}")
    return ref, test


def psnr(ref_band, test_band, peak=1.0):
    """``10 log10(peak^2 / MSE)`` in dB, capped at ``PSNR_CAP``."""
    ref, test = _pair(ref_band, test_band)
    mse = np.mean((ref - test) ** 2)
    if mse == 0:
        return PSNR_CAP
    return float(min(10.0 * np.log10(peak**2 / mse), PSNR_CAP))


def _gaussian_window(size=SSIM_WIN, sigma=SSIM_SIGMA):
    ax = np.arange(size) - (size - 1) / 2
    g = np.exp(-(ax**2) / (2 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(ref_band, test_band, data_range=1.0):
    """Mean structural similarity of two 2-D bands.

    Local statistics use an 11x11 Gaussian window (sigma 1.5) and the mean is
    taken over positions where the window fits inside the band.  Bands
    smaller than the window use windows truncated at the border and
    renormalised; a warning is issued.
    """
    ref, test = _pair(ref_band, test_band)
    if ref.ndim != 2:
        raise ValueError("ssim expects 2-D bands")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    win = _gaussian_window()
    small = min(ref.shape) < SSIM_WIN
    if small:
        warnings.warn(f"band {ref.shape} is smaller than the {SSIM_WIN}x{SSIM_WIN} SSIM window; "
                      "using truncated windows", stacklevel=2)
        norm = ndimage.correlate(np.ones_like(ref), win, mode="constant")

        def filt(a):
            return ndimage.correlate(a, win, mode="constant") / norm
    else:
        def filt(a):
            return ndimage.correlate(a, win, mode="reflect")

    mu_x, mu_y = filt(ref), filt(test)
    sxx = filt(ref * ref) - mu_x**2
    syy = filt(test * test) - mu_y**2
    sxy = filt(ref * test) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    smap = num / den
    if not small:
        pad = SSIM_WIN // 2
        smap = smap[pad:-pad, pad:-pad]
    return float(np.clip(smap.mean(), -1.0, 1.0))


def sam(ref_cube, test_cube):
    """Spectral angle per pixel (degrees) and its mean over valid pixels.

    Pixels where either spectrum has norm below ``1e-12`` are NaN in the
    returned field and excluded from the mean.
    """
    ref, test = _pair(ref_cube, test_cube)
    if ref.ndim != 3:
        raise ValueError("sam expects 3rd-order cubes")
    dot = np.sum(ref * test, axis=2)
    nr = np.linalg.norm(ref, axis=2)
    nt = np.linalg.norm(test, axis=2)
    valid = (nr >= SAM_MIN_NORM) & (nt >= SAM_MIN_NORM)
    if not np.any(valid):
        raise ValueError("every pixel has a degenerate (zero) spectrum")
    cos = np.full(dot.shape, np.nan)
    cos[valid] = np.clip(dot[valid] / (nr[valid] * nt[valid]), -1.0, 1.0)
    angles = np.degrees(np.arccos(cos))
    return angles, float(np.mean(angles[valid]))


@dataclass
class QualityReport:
    psnr_per_band: np.ndarray
    ssim_per_band: np.ndarray
    sam_per_pixel: np.ndarray
    mpsnr: float
    mssim: float
    msam: float
    wall_time: float = 0.0

    def summary(self):
        return {"mpsnr": self.mpsnr, "mssim": self.mssim, "msam": self.msam,
                "time": self.wall_time}


def evaluate(ref, test, peak=1.0):
    """MPSNR, MSSIM and MSAM of ``test`` against ``ref``."""
    t0 = time.perf_counter()
    ref, test = _pair(ref, test)
    if ref.ndim != 3:
        raise ValueError("evaluate expects 3rd-order cubes")
    n3 = ref.shape[2]
    p = np.array([psnr(ref[:, :, k], test[:, :, k], peak) for k in range(n3)])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        s = np.array([ssim(ref[:, :, k], test[:, :, k], peak) for k in range(n3)])
    if caught:
        warnings.warn(str(caught[0].message), stacklevel=2)
    angles, msam = sam(ref, test)
    return QualityReport(p, s, angles, float(p.mean()), float(s.mean()), msam,
                         wall_time=time.perf_counter() - t0)
