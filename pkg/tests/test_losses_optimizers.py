"""
Unit tests for the losses and optimisers
"""

import unittest
import numpy as np
import sys
import os

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.training.gradcheck import central_difference
from src.training.losses import get_loss, lipmse, lipmse_grad, mse, mse_grad
from src.training.optimizers import SGD, Adam, make_optimizer

M = 256.0


class TestLosses(unittest.TestCase):
    """Test cases for MSE and LIPMSE"""

    def setUp(self):
        rng = np.random.default_rng(21)
        self.g = rng.uniform(0, 250, (2, 5, 5))
        self.g_hat = rng.uniform(-50, 250, (2, 5, 5))

    def test_mse_values(self):
        self.assertEqual(mse([1.0, 2.0], [1.0, 2.0]), 0.0)
        self.assertAlmostEqual(mse([0.0, 0.0], [3.0, 4.0]), 12.5)

    def test_lipmse_value(self):
        self.assertAlmostEqual(lipmse([128.0], [0.0]), (M * np.log(2.0)) ** 2, places=6)
        self.assertAlmostEqual(lipmse([128.0], [0.0]), 31486.9687, delta=1e-3)
        self.assertEqual(lipmse(self.g, self.g), 0.0)

    def test_lipmse_log_ratio_form(self):
        direct = M ** 2 / self.g.size * np.sum(np.log((M - self.g) / (M - self.g_hat)) ** 2)
        self.assertAlmostEqual(lipmse(self.g, self.g_hat) / direct, 1.0, places=12)

    def test_lipmse_clamps_near_m(self):
        with self.assertLogs('src.training.losses', level='WARNING'):
            value = lipmse([M], [0.0])
        self.assertTrue(np.isfinite(value))

    def test_gradients_match_finite_differences(self):
        for loss, grad in ((mse, mse_grad), (lipmse, lipmse_grad)):
            analytic = grad(self.g, self.g_hat)
            self.assertEqual(analytic.shape, self.g.shape)
            numeric = central_difference(lambda p: loss(self.g, p), self.g_hat, h=1e-5)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-5)

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            mse(np.zeros(3), np.zeros(4))

    def test_get_loss(self):
        loss, grad = get_loss('lipmse', M)
        self.assertAlmostEqual(loss([128.0], [0.0]), lipmse([128.0], [0.0]))
        self.assertIs(get_loss('MSE')[0], mse)
        with self.assertRaises(ValueError):
            get_loss('L1')


class TestOptimizers(unittest.TestCase):
    """Test cases for SGD and Adam"""

    def test_sgd_step(self):
        params = {'W_h': np.array([1.0, 2.0])}
        SGD(lr=0.5).step(params, {'W_h': np.array([2.0, -2.0])})
        np.testing.assert_allclose(params['W_h'], [0.0, 3.0])

    def test_adam_zero_gradient(self):
        params = {'W_h': np.array([1.0, -4.0]), 'W_m': np.zeros(2)}
        optimizer = Adam(lr=0.5)
        for _ in range(3):
            optimizer.step(params, {'W_h': np.zeros(2), 'W_m': np.zeros(2)})
        np.testing.assert_array_equal(params['W_h'], [1.0, -4.0])
        np.testing.assert_array_equal(params['W_m'], [0.0, 0.0])

    def test_adam_first_step_is_lr_sized(self):
        params = {'w': np.array([0.0, 0.0])}
        Adam(lr=0.5).step(params, {'w': np.array([3.0, -1e-3])})
        np.testing.assert_allclose(params['w'], [-0.5, 0.5], rtol=1e-4)

    def test_adam_minimises_quadratic(self):
        params = {'w': np.array([5.0, -3.0])}
        optimizer = make_optimizer('adam', 0.1)
        for _ in range(2000):
            optimizer.step(params, {'w': 2.0 * params['w']})
        self.assertTrue(np.all(np.abs(params['w']) < 0.25))

    def test_make_optimizer(self):
        self.assertIsInstance(make_optimizer('SGD', 0.1), SGD)
        self.assertIsInstance(make_optimizer('adam', 0.1), Adam)
        with self.assertRaises(ValueError):
            make_optimizer('rmsprop', 0.1)


if __name__ == '__main__':
    unittest.main()
