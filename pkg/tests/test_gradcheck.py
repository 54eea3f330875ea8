"""
Unit tests for the finite-difference gradient check
"""

import unittest
import numpy as np
import sys
import os

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.layer.asplund_layer import AsplundLayer, KernelPair
from src.training.gradcheck import central_difference, check_configuration, gradient_check, relative_error
from src.training.losses import mse, mse_grad


class TestCentralDifference(unittest.TestCase):
    """Test cases for the numerical helpers"""

    def test_quadratic(self):
        x = np.array([[1.0, -2.0], [0.5, 3.0]])
        grad = central_difference(lambda v: float(np.sum(v ** 2)), x)
        np.testing.assert_allclose(grad, 2.0 * x, atol=1e-8)

    def test_input_not_modified(self):
        x = np.array([1.0, 2.0])
        central_difference(lambda v: float(np.sum(v)), x)
        np.testing.assert_array_equal(x, [1.0, 2.0])

    def test_relative_error(self):
        self.assertEqual(relative_error(np.zeros(3), np.zeros(3)), 0.0)
        self.assertAlmostEqual(relative_error(np.array([1.0, 0.0]), np.array([0.0, 0.0])), 1.0)
        self.assertAlmostEqual(relative_error(np.array([2.0]), np.array([1.0])), 0.5)

    def test_relative_error_floor(self):
        # tiny gradients are compared against the floor, not against themselves
        self.assertAlmostEqual(relative_error(np.array([1e-9]), np.array([2e-9]), atol=1e-3), 1e-6)
        self.assertAlmostEqual(relative_error(np.array([3.0]), np.array([1.0]), atol=1e-3), 2.0 / 3.0)
        self.assertEqual(relative_error(np.zeros(2), np.zeros(2), atol=1e-3), 0.0)


class TestGradientCheck(unittest.TestCase):
    """Analytic layer gradients against central differences"""

    def test_hundred_configurations_mse(self):
        report = gradient_check(configurations=100, seed=0)
        self.assertEqual(report.checked, 100)
        self.assertTrue(report.all_passed, f"worst relative error {report.worst_error:.3e}")
        self.assertGreaterEqual(report.skipped_ties, 0)
        self.assertLessEqual(report.worst_error, 1e-4)

    def test_larger_kernels(self):
        report = gradient_check(configurations=30, kernel_shape=(5, 5), image_shape=(10, 10), seed=7)
        self.assertEqual(report.checked, 30)
        self.assertLessEqual(report.worst_error, 1e-4)

    def test_lipmse(self):
        report = gradient_check(configurations=20, loss="LIPMSE", seed=1)
        self.assertEqual(report.checked, 20)
        self.assertTrue(report.all_passed, f"worst relative error {report.worst_error:.3e}")

    def test_constant_image_is_skipped(self):
        # every tap ties on a constant image
        f = np.full((4, 4), 50.0)
        kernels = KernelPair(np.zeros((3, 3)), np.zeros((3, 3)))
        self.assertIsNone(check_configuration(f, np.zeros((4, 4)), kernels))

    def test_single_pixel_kernel(self):
        rng = np.random.default_rng(3)
        f = rng.uniform(0, 255, (1, 1))
        g = rng.uniform(0, 200, (1, 1))
        W_h, W_m = np.array([[20.0]]), np.array([[2.0]])

        layer = AsplundLayer(kernels=KernelPair(W_h, W_m))
        grads = layer.backward(mse_grad(g, layer.forward(f)))

        def loss_at(w_h, w_m):
            return mse(g, AsplundLayer(kernels=KernelPair(w_h, w_m)).forward(f))

        numeric_h = central_difference(lambda w: loss_at(w, W_m), W_h)
        numeric_m = central_difference(lambda w: loss_at(W_h, w), W_m)
        # the output does not depend on W_h when the window is a single pixel
        self.assertEqual(float(grads.W_h[0, 0]), 0.0)
        self.assertLess(abs(float(numeric_h[0, 0])), 1e-6 * abs(float(grads.W_m[0, 0])))
        self.assertLess(relative_error(grads.W_m, numeric_m), 1e-6)


if __name__ == '__main__':
    unittest.main()
