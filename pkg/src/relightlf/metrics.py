"""Image quality metrics on linear-light images: PSNR and single-scale SSIM.

Both metrics operate in linear color (no transfer function); SSIM reduces
RGB to Rec.709 luminance first.
"""

import numpy as np
from scipy.signal import convolve2d

from .errors import ShapeError

REC709_LUMA = np.array([0.2126, 0.7152, 0.0722])

PSNR_CAP_DB = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def rec709_luminance(image):
    """(..., 3) linear RGB -> (...) luminance."""
    image = np.asarray(image, dtype=np.float64)
    if image.shape[-1] != 3:
        raise ShapeError("luminance expects trailing RGB axis")
    return image @ REC709_LUMA


def psnr(a, b, peak=1.0):
    """10*log10(peak^2 / MSE) in dB, capped at 99 (zero-MSE convention)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak * peak / mse), PSNR_CAP_DB)


def _gaussian_window(size, sigma):
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def ssim(a, b):
    """Mean local SSIM over the valid (fully windowed) region.

    11x11 Gaussian window, sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1.
    Color images are reduced to Rec.709 luminance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 3:
        a = rec709_luminance(a)
        b = rec709_luminance(b)
    if a.ndim != 2:
        raise ShapeError("ssim expects (H, W) or (H, W, 3)")
    if min(a.shape) < SSIM_WINDOW:
        raise ShapeError(f"image smaller than the {SSIM_WINDOW}px window")
    win = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)

    def filt(x):
        return convolve2d(x, win, mode="valid")

    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2
    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))
