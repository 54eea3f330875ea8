"""
LIP-additive Asplund distance and maps of Asplund distances.

Three routes compute the same map:

- ``asplund_map_xi_form``: ξ⁻¹[δ_{−ξ(b̄)} ξ(f) − ε_{ξ(b)} ξ(f)], the production route;
- ``asplund_map_morphological``: δ_{⊖b̄}^⊕(f) ⊖ ε_b^⊕(f) with logarithmic operators;
- ``asplund_map_definitional``: the inf/sup of LIP-shifts of the probe, found by a
  grid scan then bisection on the pointwise LIP inequalities, window by window.
  It shares no code with the other two and serves as their oracle.

Conventions shared by all three: the distance is M where the window contains M
(the dilation term reaches M) or −∞ (the erosion term reaches −∞), M taking
precedence; a pixel whose clipped window is empty gets distance 0.
"""

import logging

import numpy as np

from src.errors import LipDomainError, NumericError
from src.lip.arithmetic import LipImage, lip_add, lip_negate, lip_sub, resolve_m, xi, xi_inv
from src.morphology.operators import dilate, erode, log_dilate, log_erode, xi_probe
from src.morphology.probe import Probe, reflect

logger = logging.getLogger(__name__)

BISECTION_TOLERANCE = 1e-11
GRID_STEPS = 2 ** 20


def asplund_distance(window, probe_vals, M=None):
    """
    LIP-additive Asplund distance d(f, g) = c1 ⊖ c2 between a window and a probe.

    c1 is the least constant with f ≤ c1 ⊕ g and c2 the greatest with c2 ⊕ g ≤ f;
    in ξ-space they are the max and min of ξ(f) − ξ(g).

    Args:
        window (array-like): Grey values on the probe support
        probe_vals (array-like): Probe heights aligned with window, below M
        M (float, optional): Ceiling

    Returns:
        float: Distance in [0, M]

    Raises:
        LipDomainError: If the support is empty or the shapes differ
    """
    M = resolve_m(window, probe_vals, M=M)
    f = np.ravel(np.asarray(window, dtype=np.float64))
    g = np.ravel(np.asarray(probe_vals, dtype=np.float64))
    if f.size == 0:
        raise LipDomainError("Asplund distance over an empty support")
    if f.shape != g.shape:
        raise LipDomainError(f"window and probe differ in size: {f.size} vs {g.size}")
    if np.any(f >= M) or np.any(f == -np.inf):
        return M
    diff = xi(f, M=M) - xi(g, M=M)
    return float(xi_inv(diff.max() - diff.min(), M=M))


def _result(values, f, M):
    return LipImage(values, M) if isinstance(f, LipImage) else values


def _pixels(f):
    return f.pixels if isinstance(f, LipImage) else np.asarray(f, dtype=np.float64)


def _finish(upper_reached, lower_reached, empty, distance, M):
    distance = np.where(empty, 0.0, distance)
    return np.where(upper_reached | lower_reached, M, distance)


def asplund_map_xi_form(f, b, M=None):
    """
    Map of Asplund distances via ξ⁻¹[δ_{−ξ(b̄)} ξ(f) − ε_{ξ(b)} ξ(f)].

    Args:
        f (LipImage or np.ndarray): Image (leading batch axes allowed)
        b (Probe): Probe with heights below M
        M (float, optional): Ceiling when f is a bare array

    Returns:
        LipImage or np.ndarray: Distance map with values in [0, M]
    """
    M = resolve_m(f, M=M)
    xf = xi(_pixels(f), M=M)
    xb = xi_probe(b, M)
    upper = dilate(xf, reflect(xb.with_heights(-xb.heights)))
    lower = erode(xf, xb)
    with np.errstate(invalid="ignore"):
        distance = xi_inv(upper - lower, M=M)
    values = _finish(upper == np.inf, lower == -np.inf, (upper == -np.inf) & (lower == np.inf), distance, M)
    return _result(values, f, M)


def asplund_map_morphological(f, b, M=None):
    """
    Map of Asplund distances via logarithmic morphology, δ_{⊖b̄}^⊕(f) ⊖ ε_b^⊕(f).
    """
    M = resolve_m(f, M=M)
    values = _pixels(f)
    heights = np.where(b.support, b.heights, 0.0)
    negated = reflect(b.with_heights(lip_negate(heights, M=M)))
    upper = log_dilate(values, negated, M=M)
    lower = log_erode(values, b, M=M)

    upper_reached = upper >= M
    lower_reached = lower == -np.inf
    empty = (upper == -np.inf) & (lower >= M)
    safe_upper = np.where(upper_reached | empty, 0.0, upper)
    safe_lower = np.where(lower_reached | (lower >= M), 0.0, lower)
    distance = np.where(upper == lower, 0.0, lip_sub(safe_upper, safe_lower, M=M))
    return _result(_finish(upper_reached, lower_reached, empty, distance, M), f, M)


def _window_samples(values, b):
    """Stack f(x + h) over the support taps: shape (T, ..., H, W); NaN outside the image."""
    rows, cols = b.shape
    height, width = values.shape[-2:]
    widths = [(0, 0)] * (values.ndim - 2) + [(rows, rows), (cols, cols)]
    padded = np.pad(values, widths, mode="constant", constant_values=np.nan)
    samples, heights = [], []
    for _, di, dj, h in b.taps():
        samples.append(padded[..., rows + di:rows + di + height, cols + dj:cols + dj + width])
        heights.append(h)
    return np.stack(samples), np.asarray(heights)


def _first_at_least(values, thresholds):
    """First index i with values[i] >= threshold (len(values) when none), per threshold."""
    return np.searchsorted(np.maximum.accumulate(values), thresholds, side="left")


def _settle(predicate, grid, index, step, max_steps=64):
    """Move each grid index by ``step`` until the predicate holds there."""
    index = np.clip(index, 0, grid.size - 1)
    for _ in range(max_steps):
        holds = predicate(grid[index])
        if holds.all():
            return index
        index = np.where(holds, index, np.clip(index + step, 0, grid.size - 1))
    raise NumericError(f"grid scan left {int(np.count_nonzero(~holds))} pixel(s) without a feasible constant")


def _bisect(predicate, lo, hi, tolerance, max_iter=200):
    """Smallest t in [lo, hi] (per pixel) for which the predicate holds, given that it holds at hi."""
    for _ in range(max_iter):
        if not np.any(hi - lo > tolerance):
            break
        mid = 0.5 * (lo + hi)
        holds = predicate(mid)
        hi = np.where(holds, mid, hi)
        lo = np.where(holds, lo, mid)
    return hi


def asplund_map_definitional(f, b, M=None, tolerance=BISECTION_TOLERANCE, grid_steps=GRID_STEPS):
    """
    Map of Asplund distances straight from the definition, window by window.

    For every pixel, c1 = inf{c : f ≤ c ⊕ b} and c2 = sup{c : c ⊕ b ≤ f} on the
    clipped neighbourhood are located over t = ξ(c): a scan of ``grid_steps``
    equal steps finds the first (last) grid point where every inequality holds,
    tested with LIP-addition itself, and bisection refines inside that step.
    Slow; meant as an oracle.

    Args:
        f (LipImage or np.ndarray): Image (leading batch axes allowed)
        b (Probe): Probe with heights below M
        M (float, optional): Ceiling when f is a bare array
        tolerance (float): Bisection width in ξ-units
        grid_steps (int): Number of scan steps over the bracket

    Returns:
        LipImage or np.ndarray: Distance map

    Raises:
        NumericError: If no grid point satisfies the inequalities of some pixel
    """
    M = resolve_m(f, M=M)
    values = _pixels(f)
    samples, tap_heights = _window_samples(values, b)
    heights = tap_heights.reshape((-1,) + (1,) * values.ndim)
    inside = ~np.isnan(samples)
    empty = ~inside.any(axis=0)
    upper_reached = (inside & (samples >= M)).any(axis=0)
    lower_reached = (inside & (samples == -np.inf)).any(axis=0)

    # bracket wide enough for every window: |ξ(f) − ξ(b)| never exceeds it
    finite = samples[inside & np.isfinite(samples)]
    span = float(xi(M - 1.0, M=M))
    if finite.size:
        span += float(np.max(np.abs(xi(np.clip(finite, None, M - 1.0), M=M))))
    span += float(np.max(np.abs(xi(heights, M=M))))
    span *= 2.0

    usable = inside & np.isfinite(samples) & (samples < M)
    f_safe = np.where(usable, samples, 0.0)
    below_m = np.nextafter(M, 0.0)

    def constant(t):
        return np.minimum(xi_inv(t, M=M), below_m)

    def dominates(t):
        return np.all(~usable | (lip_add(constant(t), heights, M=M) >= f_safe), axis=0)

    def dominated(t):
        return np.all(~usable | (lip_add(constant(t), heights, M=M) <= f_safe), axis=0)

    grid = np.linspace(-span, span, int(grid_steps) + 1)
    last_index = grid.size - 1
    shifted_grid = constant(grid)
    first = np.zeros(values.shape, dtype=np.int64)
    last = np.full(values.shape, last_index, dtype=np.int64)
    for j, h in enumerate(tap_heights):
        shifted = lip_add(shifted_grid, h, M=M)
        # first grid point with c ⊕ b(h) ≥ f, last one with c ⊕ b(h) ≤ f
        tap_first = _first_at_least(shifted, f_safe[j])
        tap_last = last_index - _first_at_least(-shifted[::-1], -f_safe[j])
        first = np.maximum(first, np.where(usable[j], tap_first, 0))
        last = np.minimum(last, np.where(usable[j], tap_last, last_index))

    i1 = _settle(dominates, grid, first, 1)
    i2 = _settle(dominated, grid, last, -1)
    t1 = _bisect(dominates, grid[np.maximum(i1 - 1, 0)], grid[i1], tolerance)
    # sup{t : dominated(t)} = −inf{s : dominated(−s)}
    t2 = -_bisect(lambda s: dominated(-s), -grid[np.minimum(i2 + 1, last_index)], -grid[i2], tolerance)

    distance = np.maximum(lip_sub(constant(t1), constant(t2), M=M), 0.0)
    return _result(_finish(upper_reached, lower_reached, empty, distance, M), f, M)


def classical_asplund_map(f, b):
    """
    Additive (non-LIP) double-sided probing map δ_{−b̄}(f) − ε_b(f).

    Invariant under ordinary addition of a constant but not under LIP-addition;
    used as a control for the lighting-invariance experiments.
    """
    values = _pixels(f)
    heights = np.where(b.support, b.heights, 0.0)
    upper = dilate(values, reflect(b.with_heights(-heights)))
    lower = erode(values, b)
    return upper - lower


__all__ = [
    "Probe",
    "asplund_distance",
    "asplund_map_definitional",
    "asplund_map_morphological",
    "asplund_map_xi_form",
    "classical_asplund_map",
]
