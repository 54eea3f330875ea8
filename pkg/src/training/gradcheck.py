"""
Finite-difference verification of the layer's analytic gradients
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.layer.asplund_layer import AsplundLayer, KernelPair
from src.training.losses import get_loss

logger = logging.getLogger(__name__)

# gradient norms below this fraction of the loss value are compared in absolute terms
GRADIENT_FLOOR = 1e-6


def central_difference(fun, x, h=1e-5):
    """
    Central-difference gradient of a scalar function of an array.

    Args:
        fun (callable): Scalar function of an array shaped like x
        x (np.ndarray): Point of evaluation
        h (float): Step size

    Returns:
        np.ndarray: Numerical gradient, same shape as x
    """
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + h
        f_plus = fun(x)
        x[index] = original - h
        f_minus = fun(x)
        x[index] = original
        grad[index] = 0.5 * (f_plus - f_minus) / h
    return grad


def relative_error(analytic, numeric, atol=0.0):
    """‖a − n‖ / max(‖a‖, ‖n‖, atol), 0 when both vanish and atol is 0."""
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), atol)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


@dataclass
class GradCheckReport:
    """Outcome of ``gradient_check``."""

    checked: int = 0
    passed: int = 0
    skipped_ties: int = 0
    worst_error: float = 0.0

    @property
    def all_passed(self):
        return self.checked == self.passed


class _RoutingChanged(Exception):
    pass


def _scaled_step(h, x):
    return h * max(1.0, float(np.max(np.abs(x))))


def check_configuration(f, g, kernels, M=256.0, loss="MSE", h=1e-5, tie_tolerance=1e-6):
    """
    Compare analytic and numerical gradients for one configuration.

    Each kernel is perturbed with a step of h·max(1, max |entry|), so the
    roundoff of the loss stays small next to the difference it measures.

    Returns:
        tuple: (error on W_h, error on W_m), or None when taps tie, i.e. when
        the base forward pass has a near-tie or a perturbation changes the routing
    """
    loss_fn, grad_fn = get_loss(loss, M)
    layer = AsplundLayer(M=M, kernels=kernels.copy(), tie_tolerance=tie_tolerance, track_ties=True)
    g_hat = layer.forward(f)
    if layer.last_tie_count:
        return None
    routing = layer.routing()
    grads = layer.backward(grad_fn(g, g_hat))

    perturbed = AsplundLayer(M=M, kernels=kernels.copy())

    def loss_at(W_h, W_m):
        perturbed.kernels = KernelPair(W_h, W_m)
        value = loss_fn(g, perturbed.forward(f))
        arg_dil, arg_ero = perturbed.routing()
        if not (np.array_equal(arg_dil, routing[0]) and np.array_equal(arg_ero, routing[1])):
            raise _RoutingChanged
        return value

    try:
        numeric_h = central_difference(lambda w: loss_at(w, kernels.W_m), kernels.W_h, _scaled_step(h, kernels.W_h))
        numeric_m = central_difference(lambda w: loss_at(kernels.W_h, w), kernels.W_m, _scaled_step(h, kernels.W_m))
    except _RoutingChanged:
        return None
    atol = GRADIENT_FLOOR * max(1.0, abs(float(loss_fn(g, g_hat))))
    return relative_error(grads.W_h, numeric_h, atol), relative_error(grads.W_m, numeric_m, atol)


def gradient_check(configurations=100, image_shape=(8, 8), kernel_shape=(3, 3), M=256.0, loss="MSE",
                   h=1e-5, tolerance=1e-4, tie_tolerance=1e-6, seed=0):
    """
    Run ``check_configuration`` on random images, targets and kernels.

    Configurations affected by ties are skipped and counted, and replaced so
    that ``configurations`` valid checks are performed.

    Returns:
        GradCheckReport: Counts and the worst relative error seen
    """
    rng = np.random.default_rng(seed)
    report = GradCheckReport()
    attempts = 0
    while report.checked < configurations and attempts < 10 * configurations:
        attempts += 1
        f = rng.uniform(0.0, M - 1.0, size=image_shape)
        g = rng.uniform(0.0, 0.8 * M, size=image_shape)
        kernels = KernelPair(rng.uniform(-60.0, 150.0, size=kernel_shape), rng.uniform(-3.0, 3.0, size=kernel_shape))
        errors = check_configuration(f, g, kernels, M=M, loss=loss, h=h, tie_tolerance=tie_tolerance)
        if errors is None:
            report.skipped_ties += 1
            continue
        report.checked += 1
        worst = max(errors)
        report.worst_error = max(report.worst_error, worst)
        if worst <= tolerance:
            report.passed += 1
        else:
            logger.warning("gradient mismatch: relative errors W_h=%.3e W_m=%.3e", *errors)
    logger.info(
        "gradient check: %d/%d passed, %d skipped for ties, worst error %.3e",
        report.passed, report.checked, report.skipped_ties, report.worst_error,
    )
    return report
