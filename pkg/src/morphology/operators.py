"""
Classical and logarithmic grey-level dilation / erosion with non-flat probes.

Windows are clipped at the image border: samples falling outside the image are
the identity of the lattice operation (−∞ for a supremum, +∞ for an infimum),
so they never win. Images may carry leading batch axes; the window slides over
the last two axes.
"""

import numpy as np
from scipy import ndimage

from src.errors import LipDomainError
from src.lip.arithmetic import LipImage, resolve_m, xi, xi_inv
from src.morphology.probe import Probe


def _pad(f, shape, fill):
    rows, cols = shape
    widths = [(0, 0)] * (f.ndim - 2) + [(rows, rows), (cols, cols)]
    return np.pad(f, widths, mode="constant", constant_values=fill)


def _candidates(f, b, sign, maximum):
    """Yield (tap index, f(x + sign·h) ± b(h)) for every support tap, row-major."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim < 2:
        raise LipDomainError(f"expected an image with at least 2 dimensions, got shape {f.shape}")

    rows, cols = b.shape
    height, width = f.shape[-2:]
    padded = _pad(f, b.shape, -np.inf if maximum else np.inf)
    for index, di, dj, h in b.taps():
        r0 = rows + sign * di
        c0 = cols + sign * dj
        sample = padded[..., r0:r0 + height, c0:c0 + width]
        yield index, (sample + h if maximum else sample - h)


def _sliding_extremum(f, b, sign, maximum):
    """
    Evaluate max/min over taps of f(x + sign·h) ± b(h) and record the winning tap.

    Taps are visited in row-major order with a strict comparison, so on ties
    the lowest linear tap index wins. Pixels whose clipped window holds no
    finite candidate keep the fill value and tap index −1.
    """
    shape = np.shape(f)
    best = np.full(shape, -np.inf if maximum else np.inf)
    arg = np.full(shape, -1, dtype=np.int64)
    for index, candidate in _candidates(f, b, sign, maximum):
        better = candidate > best if maximum else candidate < best
        best = np.where(better, candidate, best)
        arg = np.where(better, index, arg)
    return best, arg


def count_near_ties(f, b, extremum, dilation, tolerance):
    """
    Count pixels where a second tap comes within ``tolerance`` of the extremum.

    Args:
        f (np.ndarray): Image the extremum was computed on
        b (Probe): Probe used
        extremum (np.ndarray): Output of dilate/erode on (f, b)
        dilation (bool): True for a dilation, False for an erosion
        tolerance (float): Gap below which two taps are considered tied

    Returns:
        int: Number of tied pixels
    """
    close = np.zeros(np.shape(f), dtype=np.int64)
    sign = -1 if dilation else 1
    for _, candidate in _candidates(f, b, sign, maximum=dilation):
        with np.errstate(invalid="ignore"):
            close += np.abs(candidate - extremum) <= tolerance
    return int(np.count_nonzero(close > 1))


def _flat_fast_path(f, b, maximum):
    # full rectangular support, odd sizes, centred origin only
    rows, cols = b.shape
    if not (b.is_flat and b.support.all() and rows % 2 and cols % 2 and b.origin == (rows // 2, cols // 2)):
        return None
    f = np.asarray(f, dtype=np.float64)
    size = (1,) * (f.ndim - 2) + (rows, cols)
    h = b.heights[b.origin]
    if maximum:
        return ndimage.maximum_filter(f, size=size, mode="constant", cval=-np.inf) + h
    return ndimage.minimum_filter(f, size=size, mode="constant", cval=np.inf) - h


def dilate(f, b, method="auto"):
    """
    Classical dilation δ_b(f)(x) = max_h f(x − h) + b(h).

    Args:
        f (np.ndarray): Real-valued image (±∞ allowed)
        b (Probe): Structuring function
        method (str): "auto" uses the separable max filter for flat probes,
            "direct" always evaluates tap by tap

    Returns:
        np.ndarray: Dilated image
    """
    if method == "auto":
        fast = _flat_fast_path(f, b, maximum=True)
        if fast is not None:
            return fast
    return _sliding_extremum(f, b, sign=-1, maximum=True)[0]


def erode(f, b, method="auto"):
    """
    Classical erosion ε_b(f)(x) = min_h f(x + h) − b(h).

    Args:
        f (np.ndarray): Real-valued image (±∞ allowed)
        b (Probe): Structuring function
        method (str): "auto" or "direct", as for dilate

    Returns:
        np.ndarray: Eroded image
    """
    if method == "auto":
        fast = _flat_fast_path(f, b, maximum=False)
        if fast is not None:
            return fast
    return _sliding_extremum(f, b, sign=1, maximum=False)[0]


def dilate_with_argmax(f, b):
    """Dilation plus the linear index of the winning tap of b per pixel."""
    return _sliding_extremum(f, b, sign=-1, maximum=True)


def erode_with_argmin(f, b):
    """Erosion plus the linear index of the winning tap of b per pixel."""
    return _sliding_extremum(f, b, sign=1, maximum=False)


def opening(f, b):
    """Classical opening δ_b ∘ ε_b."""
    return dilate(erode(f, b), b)


def closing(f, b):
    """Classical closing ε_b ∘ δ_b."""
    return erode(dilate(f, b), b)


def _unwrap(f, b, M):
    M = resolve_m(f, M=M)
    values = f.pixels if isinstance(f, LipImage) else np.asarray(f, dtype=np.float64)
    if np.any(values > M):
        raise LipDomainError(f"image values must not exceed M={M}")
    if np.any(b.heights[b.support] >= M):
        raise LipDomainError(f"probe heights must be strictly below M={M}")
    return values, M


def _rewrap(result, f, M):
    return LipImage(result, M) if isinstance(f, LipImage) else result


def xi_probe(b, M):
    """Probe with heights ξ(b) on the same support."""
    heights = np.where(b.support, b.heights, 0.0)
    return b.with_heights(xi(heights, M=M))


def log_dilate(f, b, M=None):
    """
    Logarithmic dilation δ_b^⊕(f)(x) = max_h f(x − h) ⊕ b(h), computed as ξ⁻¹[δ_ξ(b)(ξ(f))].

    Pixels equal to M propagate M; a window made only of −∞ samples gives −∞.

    Args:
        f (LipImage or np.ndarray): Image with values in [−∞, M]
        b (Probe): Probe with heights below M
        M (float, optional): Ceiling when f is a bare array

    Returns:
        LipImage or np.ndarray: Same kind as f
    """
    values, M = _unwrap(f, b, M)
    result = xi_inv(dilate(xi(values, M=M), xi_probe(b, M)), M=M)
    return _rewrap(result, f, M)


def log_erode(f, b, M=None):
    """
    Logarithmic erosion ε_b^⊕(f)(x) = min_h f(x + h) ⊖ b(h), computed as ξ⁻¹[ε_ξ(b)(ξ(f))].

    A sample equal to M gives M (it never wins against a finite sample).
    """
    values, M = _unwrap(f, b, M)
    result = xi_inv(erode(xi(values, M=M), xi_probe(b, M)), M=M)
    return _rewrap(result, f, M)


def log_open(f, b, M=None):
    """Logarithmic opening γ_b^⊕ = δ_b^⊕ ∘ ε_b^⊕ (idempotent, anti-extensive)."""
    return log_dilate(log_erode(f, b, M=M), b, M=M)


def log_close(f, b, M=None):
    """Logarithmic closing φ_b^⊕ = ε_b^⊕ ∘ δ_b^⊕ (idempotent, extensive)."""
    return log_erode(log_dilate(f, b, M=M), b, M=M)


__all__ = [
    "Probe",
    "closing",
    "count_near_ties",
    "dilate",
    "dilate_with_argmax",
    "erode",
    "erode_with_argmin",
    "log_close",
    "log_dilate",
    "log_erode",
    "log_open",
    "opening",
    "xi_probe",
]
