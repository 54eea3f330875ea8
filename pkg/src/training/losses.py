"""
Losses / validation metrics and their gradients with respect to the prediction
"""

import logging

import numpy as np

from src.errors import NumericError
from src.lip.arithmetic import DEFAULT_M, xi, xi_derivative

logger = logging.getLogger(__name__)

LIPMSE_MARGIN = 1e-9


def _pair(g, g_hat):
    g = np.asarray(g, dtype=np.float64)
    g_hat = np.asarray(g_hat, dtype=np.float64)
    if g.shape != g_hat.shape:
        raise ValueError(f"shape mismatch: {g.shape} vs {g_hat.shape}")
    return g, g_hat


def mse(g, g_hat):
    """Mean squared pixel difference (1/P) Σ (g − ĝ)²."""
    g, g_hat = _pair(g, g_hat)
    return float(np.mean((g - g_hat) ** 2))


def mse_grad(g, g_hat):
    """∂MSE/∂ĝ."""
    g, g_hat = _pair(g, g_hat)
    return 2.0 * (g_hat - g) / g.size


def _clamp_below_m(values, M):
    limit = M - LIPMSE_MARGIN
    over = values > limit
    if over.any():
        logger.warning("LIPMSE: clamping %d value(s) to M - %g", int(over.sum()), LIPMSE_MARGIN)
        values = np.where(over, limit, values)
    if np.any(values >= M):
        raise NumericError("LIPMSE operand equals M after clamping")
    return values


def lipmse(g, g_hat, M=DEFAULT_M):
    """
    LIP-consistent squared error (M²/P) Σ ln²((M − g)/(M − ĝ)), i.e. (1/P) Σ (ξ(g) − ξ(ĝ))².

    Values above M − 1e-9 are clamped to it.

    Raises:
        NumericError: If a value still equals M after clamping
    """
    g, g_hat = _pair(g, g_hat)
    g = _clamp_below_m(g, M)
    g_hat = _clamp_below_m(g_hat, M)
    return float(np.mean((xi(g, M=M) - xi(g_hat, M=M)) ** 2))


def lipmse_grad(g, g_hat, M=DEFAULT_M):
    """∂LIPMSE/∂ĝ."""
    g, g_hat = _pair(g, g_hat)
    g = _clamp_below_m(g, M)
    g_hat = _clamp_below_m(g_hat, M)
    return 2.0 * (xi(g_hat, M=M) - xi(g, M=M)) * xi_derivative(g_hat, M=M) / g.size


LOSSES = {
    "MSE": (mse, mse_grad),
    "LIPMSE": (lipmse, lipmse_grad),
}


def get_loss(name, M=DEFAULT_M):
    """
    Look up a loss by name.

    Returns:
        tuple: (loss(g, ĝ), grad(g, ĝ)) callables bound to M
    """
    key = name.upper()
    if key not in LOSSES:
        raise ValueError(f"unknown loss {name!r}; choose from {sorted(LOSSES)}")
    loss, grad = LOSSES[key]
    if key == "LIPMSE":
        return (lambda g, g_hat: loss(g, g_hat, M)), (lambda g, g_hat: grad(g, g_hat, M))
    return loss, grad
