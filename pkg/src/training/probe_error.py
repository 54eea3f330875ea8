"""
Probe-recovery error between learned and reference kernels.

The map of Asplund distances cannot tell a probe from any LIP-shift of it, so
the height error is minimised over a constant k LIP-added on the reference
support:

    E_pr = (1/(A·B)) [ min_k Σ_{x∈D} (W_h,r(x) − (W_h(x) ⊕ k))² + Σ_{x∉D} W_h(x)² ]

The inner problem is solved in t = ξ(k): a coarse scan brackets the minimum,
then golden-section search refines it.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from src.errors import LipDomainError
from src.lip.arithmetic import DEFAULT_M, xi, xi_inv
from src.layer.asplund_layer import soft_mask

logger = logging.getLogger(__name__)

SCAN_POINTS = 4097


@dataclass
class ProbeErrorResult:
    """E_pr, the soft-mask MSE and the optimal LIP-shift k."""

    e_pr: float
    mask_mse: float
    shift: float


def _shift_objective(heights, reference, M):
    xi_h = xi(heights, M=M)

    def objective(t):
        t = np.asarray(t, dtype=np.float64)
        shifted = xi_inv(xi_h + t[..., None], M=M)
        return np.sum((reference - shifted) ** 2, axis=-1)

    return objective


def best_lip_shift(heights, reference, M=DEFAULT_M):
    """
    Minimise Σ (reference − (heights ⊕ k))² over k ∈ (−∞, M).

    Args:
        heights (np.ndarray): Learned heights on the support
        reference (np.ndarray): Reference heights on the support
        M (float): Ceiling

    Returns:
        tuple: (optimal t = ξ(k), minimal sum of squares)
    """
    heights = np.ravel(np.asarray(heights, dtype=np.float64))
    reference = np.ravel(np.asarray(reference, dtype=np.float64))
    objective = _shift_objective(heights, reference, M)

    # the minimiser lies between the smallest and largest per-sample optimal shift
    per_sample = xi(reference, M=M) - xi(heights, M=M)
    span = float(xi(M - 1.0, M=M))
    lo = min(-span, float(per_sample.min()))
    hi = max(span, float(per_sample.max()))
    grid = np.linspace(lo, hi, SCAN_POINTS)
    values = objective(grid)
    i = int(np.argmin(values))

    a, c = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if 0 < i < len(grid) - 1 and values[i] < values[i - 1] and values[i] < values[i + 1]:
        result = minimize_scalar(
            lambda t: float(objective(t)),
            bracket=(a, grid[i], c),
            method="golden",
            options={"xtol": 1e-12, "maxiter": 10000},
        )
    else:
        result = minimize_scalar(
            lambda t: float(objective(t)), bounds=(a, c), method="bounded", options={"xatol": 1e-10}
        )
    best_t, best_value = float(result.x), float(result.fun)
    if values[i] < best_value:
        best_t, best_value = float(grid[i]), float(values[i])
    return best_t, best_value


def probe_error(W_h, W_m, W_h_ref, mask_ref, M=DEFAULT_M):
    """
    Compare learned kernels with a reference probe.

    Args:
        W_h (np.ndarray): Learned height kernel
        W_m (np.ndarray): Learned mask logits
        W_h_ref (np.ndarray): Reference heights (0 off the support)
        mask_ref (np.ndarray): Binary reference support
        M (float): Ceiling

    Returns:
        ProbeErrorResult: E_pr, MSE(χ(W_m), mask_ref) and the optimal k

    Raises:
        LipDomainError: If shapes differ or the reference support is empty
    """
    W_h = np.asarray(W_h, dtype=np.float64)
    W_h_ref = np.asarray(W_h_ref, dtype=np.float64)
    mask_ref = np.asarray(mask_ref).astype(bool)
    if not (W_h.shape == W_h_ref.shape == mask_ref.shape == np.shape(W_m)):
        raise LipDomainError("kernel and reference shapes differ")
    if not mask_ref.any():
        raise LipDomainError("reference support is empty")

    best_t, on_support = best_lip_shift(W_h[mask_ref], W_h_ref[mask_ref], M=M)
    off_support = float(np.sum(W_h[~mask_ref] ** 2))
    e_pr = (on_support + off_support) / W_h.size
    mask_mse = float(np.mean((soft_mask(W_m) - mask_ref) ** 2))
    shift = float(xi_inv(best_t, M=M))
    logger.debug("E_pr=%.3e mask MSE=%.3e optimal shift k=%.6f", e_pr, mask_mse, shift)
    return ProbeErrorResult(e_pr, mask_mse, shift)
