"""
Unit tests for the probe-recovery error
"""

import unittest
import numpy as np
import sys
import os

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.dataset.reference_probes import make_reference_probe
from src.errors import LipDomainError
from src.layer.asplund_layer import HARD_MASK_LOGIT
from src.lip.arithmetic import lip_add, xi, xi_inv
from src.training.probe_error import best_lip_shift, probe_error

M = 256.0


def shifted_on_support(W_h, mask, k):
    return np.where(mask, lip_add(W_h, k), W_h)


class TestProbeError(unittest.TestCase):
    """Test cases for E_pr and the optimal LIP-shift"""

    def setUp(self):
        self.reference = make_reference_probe(1.2, 10.0)
        self.mask = self.reference.mask
        self.hard = np.where(self.mask, HARD_MASK_LOGIT, -HARD_MASK_LOGIT)

    def test_identical_kernels(self):
        result = probe_error(self.reference.W_h, self.hard, self.reference.W_h, self.mask)
        self.assertLess(result.e_pr, 1e-12)
        self.assertLess(abs(result.shift), 1e-6)
        self.assertLess(result.mask_mse, 1e-20)

    def test_lip_shifted_reference_is_recovered(self):
        for k0 in (-120.0, -30.0, 45.0, 200.0):
            W_h = shifted_on_support(self.reference.W_h, self.mask, k0)
            result = probe_error(W_h, self.hard, self.reference.W_h, self.mask)
            self.assertLess(result.e_pr, 1e-8)
            # the optimal shift undoes k0
            self.assertAlmostEqual(float(lip_add(k0, result.shift)), 0.0, places=5)

    def test_off_support_heights_count(self):
        W_h = self.reference.W_h.copy()
        W_h[~self.mask] = 2.0
        result = probe_error(W_h, self.hard, self.reference.W_h, self.mask)
        self.assertAlmostEqual(result.e_pr, 4.0 * np.count_nonzero(~self.mask) / W_h.size, places=8)

    def test_mask_mse(self):
        result = probe_error(self.reference.W_h, np.zeros((7, 7)), self.reference.W_h, self.mask)
        self.assertAlmostEqual(result.mask_mse, 0.25)

    def test_invariant_to_lip_shift_of_learned_heights(self):
        rng = np.random.default_rng(31)
        W_h = np.where(self.mask, rng.uniform(-50, 200, (7, 7)), rng.uniform(-5, 5, (7, 7)))
        base = probe_error(W_h, self.hard, self.reference.W_h, self.mask).e_pr
        for k in rng.uniform(-200, 200, 100):
            shifted = probe_error(shifted_on_support(W_h, self.mask, k), self.hard, self.reference.W_h, self.mask)
            self.assertLess(abs(shifted.e_pr - base), 1e-8)

    def test_minimiser_against_dense_grid(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            heights = rng.uniform(-100, 250, 20)
            reference = rng.uniform(0, 200, 20)
            best_t, best_value = best_lip_shift(heights, reference)

            def objective(t):
                shifted = xi_inv(xi(heights)[None, :] + t[:, None])
                return np.sum((reference[None, :] - shifted) ** 2, axis=1)

            coarse = np.linspace(-3000.0, 3000.0, 60001)
            centre = coarse[int(np.argmin(objective(coarse)))]
            fine = np.linspace(centre - 0.2, centre + 0.2, 40001)
            oracle = float(objective(fine).min())
            self.assertLessEqual(best_value, oracle + 1e-9)
            self.assertLessEqual(oracle - best_value, 1e-6 * max(1.0, oracle))

    def test_invalid_inputs(self):
        with self.assertRaises(LipDomainError):
            probe_error(np.zeros((7, 7)), np.zeros((7, 7)), np.zeros((7, 7)), np.zeros((7, 7), dtype=bool))
        with self.assertRaises(LipDomainError):
            probe_error(np.zeros((5, 5)), np.zeros((5, 5)), self.reference.W_h, self.mask)


if __name__ == '__main__':
    unittest.main()
