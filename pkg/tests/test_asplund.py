"""
Unit tests for the Asplund distance module
"""

import unittest
import numpy as np
import sys
import os

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.asplund.distance import (
    asplund_distance,
    asplund_map_definitional,
    asplund_map_morphological,
    asplund_map_xi_form,
    classical_asplund_map,
)
from src.errors import LipDomainError
from src.lip.arithmetic import LipImage, lip_add, lip_sub, xi, xi_inv
from src.morphology.probe import Probe

M = 256.0
FORMS = (asplund_map_xi_form, asplund_map_morphological, asplund_map_definitional)


def random_probe(rng, max_size=5):
    rows, cols = rng.integers(1, max_size + 1, size=2)
    heights = rng.uniform(-100.0, 200.0, size=(rows, cols))
    support = rng.random((rows, cols)) < 0.75
    support[rng.integers(rows), rng.integers(cols)] = True
    return Probe(heights, support)


class TestAsplundDistance(unittest.TestCase):
    """Test cases for the distance between one window and a probe"""

    def test_identical_window(self):
        probe = np.array([10.0, 50.0, 120.0])
        self.assertAlmostEqual(asplund_distance(probe, probe), 0.0, places=12)

    def test_lip_shifted_window(self):
        probe = np.array([10.0, 50.0, 120.0, -30.0])
        for k in (-200.0, -5.0, 30.0, 180.0):
            self.assertLess(abs(asplund_distance(lip_add(probe, k), probe)), 1e-9)

    def test_flat_probe_gives_lip_range(self):
        self.assertAlmostEqual(asplund_distance([100.0, 200.0], [0.0, 0.0]), 164.1025641025641, places=9)

    def test_symmetric_under_shift_of_either_argument(self):
        rng = np.random.default_rng(8)
        window = rng.uniform(0, 250, 9)
        probe = rng.uniform(-50, 150, 9)
        base = asplund_distance(window, probe)
        self.assertAlmostEqual(asplund_distance(window, lip_add(probe, 70.0)), base, places=9)
        self.assertAlmostEqual(asplund_distance(lip_sub(window, 40.0), probe), base, places=9)

    def test_conventions(self):
        self.assertEqual(asplund_distance([10.0, M], [0.0, 0.0]), M)
        self.assertEqual(asplund_distance([10.0, -np.inf], [0.0, 0.0]), M)

    def test_errors(self):
        with self.assertRaises(LipDomainError):
            asplund_distance([], [])
        with self.assertRaises(LipDomainError):
            asplund_distance([1.0, 2.0], [1.0])


class TestAsplundMaps(unittest.TestCase):
    """Test cases for the three routes to the map of Asplund distances"""

    def setUp(self):
        self.rng = np.random.default_rng(77)
        self.image = self.rng.uniform(0, 255, (8, 8))
        self.probe = Probe(self.rng.uniform(-40, 120, (3, 3)))

    def test_constant_image_flat_probe(self):
        f = np.full((6, 6), 90.0)
        for form in FORMS:
            np.testing.assert_allclose(form(f, Probe.flat((3, 3), 25.0)), 0.0, atol=1e-9)

    def test_constant_image_non_flat_probe(self):
        # every window sees the same constant, so the distance is the LIP-range of the probe
        f = np.full((7, 7), 90.0)
        heights = self.probe.heights
        expected = float(xi_inv(xi(heights).max() - xi(heights).min()))
        for form in FORMS:
            np.testing.assert_allclose(form(f, self.probe)[1:-1, 1:-1], expected, atol=1e-9)

    def test_single_pixel_probe_zero_map(self):
        for form in FORMS:
            np.testing.assert_allclose(form(self.image, Probe.single_pixel(33.0)), 0.0, atol=1e-9)

    def test_three_forms_agree(self):
        reference = asplund_map_definitional(self.image, self.probe)
        np.testing.assert_allclose(asplund_map_morphological(self.image, self.probe), reference, rtol=0, atol=1e-9)
        np.testing.assert_allclose(asplund_map_xi_form(self.image, self.probe), reference, rtol=0, atol=1e-9)
        self.assertTrue(np.all(reference >= 0) and np.all(reference <= M))

    def test_tri_form_agreement_random_instances(self):
        rng = np.random.default_rng(1000)
        worst = 0.0
        for _ in range(1000):
            shape = tuple(rng.integers(1, 17, size=2))
            f = rng.uniform(0.0, 255.0, shape)
            b = random_probe(rng)
            oracle = asplund_map_definitional(f, b, grid_steps=2 ** 16)
            for form in (asplund_map_morphological, asplund_map_xi_form):
                worst = max(worst, float(np.max(np.abs(form(f, b) - oracle))))
        self.assertLessEqual(worst, 1e-9)

    def test_tie_heavy_inputs(self):
        rng = np.random.default_rng(5)
        f = rng.integers(0, 3, (12, 12)) * 100.0
        f[2:9, 2:9] = 100.0
        probes = (
            Probe(rng.integers(0, 2, (3, 3)) * 40.0),
            Probe.flat((5, 5), 0.0),
            Probe(np.full((3, 3), 60.0), np.eye(3, dtype=bool)),
        )
        for b in probes:
            oracle = asplund_map_definitional(f, b)
            np.testing.assert_allclose(asplund_map_xi_form(f, b), oracle, rtol=0, atol=1e-9)
            np.testing.assert_allclose(asplund_map_morphological(f, b), oracle, rtol=0, atol=1e-9)
        # every window of the flat patch sees one level: zero distance for a flat probe
        self.assertAlmostEqual(float(asplund_map_definitional(f, probes[1])[5, 5]), 0.0, places=9)

    def test_definitional_grid_resolution(self):
        coarse = asplund_map_definitional(self.image, self.probe, grid_steps=2 ** 8)
        fine = asplund_map_definitional(self.image, self.probe)
        np.testing.assert_allclose(coarse, fine, rtol=0, atol=1e-9)

    def test_lighting_invariance(self):
        for k in (-150.0, -20.0, 60.0, 100.0, 200.0):
            shifted = lip_add(self.image, k)
            for form in FORMS:
                diff = np.abs(form(shifted, self.probe) - form(self.image, self.probe))
                self.assertLessEqual(float(diff.max()), 1e-9)

    def test_probe_shift_invariance(self):
        shifted_probe = self.probe.with_heights(lip_add(self.probe.heights, 45.0))
        np.testing.assert_allclose(
            asplund_map_xi_form(self.image, shifted_probe), asplund_map_xi_form(self.image, self.probe), atol=1e-9
        )

    def test_classical_map_is_not_lip_invariant(self):
        base = classical_asplund_map(self.image, self.probe)
        shifted = classical_asplund_map(lip_add(self.image, 100.0), self.probe)
        self.assertGreater(float(np.max(np.abs(base - shifted))), 1e-3)
        # invariant under ordinary addition
        np.testing.assert_allclose(classical_asplund_map(self.image + 17.0, self.probe), base, atol=1e-9)

    def test_pixel_at_m_minus_one_with_deep_probe(self):
        f = np.full((5, 5), 20.0)
        f[2, 2] = M - 1.0
        probe = Probe(np.array([[-500.0, -500.0, -500.0], [-500.0, 0.0, -500.0], [-500.0, -500.0, -500.0]]))
        maps = [form(f, probe) for form in FORMS]
        self.assertTrue(np.all(np.isfinite(maps[0])))
        self.assertTrue(np.all(maps[0] < M))
        for other in maps[1:]:
            np.testing.assert_allclose(other, maps[0], atol=1e-9)

    def test_degenerate_conventions(self):
        f = np.full((1, 5), 30.0)
        f[0, 0] = M
        f[0, 4] = -np.inf
        probe = Probe.flat((1, 3), 0.0)
        for form in FORMS:
            result = form(f, probe)
            np.testing.assert_array_equal(result[0, [0, 1, 3, 4]], [M, M, M, M])
            self.assertAlmostEqual(float(result[0, 2]), 0.0, places=9)

    def test_empty_window_gives_zero(self):
        probe = Probe(np.zeros((1, 5)), np.array([[False, False, False, False, True]]))
        f = np.array([[40.0]])
        for form in FORMS:
            self.assertEqual(float(form(f, probe)[0, 0]), 0.0)

    def test_lip_image_and_batches(self):
        batch = self.rng.uniform(0, 255, (3, 6, 6))
        stacked = asplund_map_xi_form(batch, self.probe)
        for i in range(3):
            np.testing.assert_allclose(stacked[i], asplund_map_xi_form(batch[i], self.probe), atol=1e-12)
        result = asplund_map_morphological(LipImage(batch[0]), self.probe)
        self.assertIsInstance(result, LipImage)


if __name__ == '__main__':
    unittest.main()
