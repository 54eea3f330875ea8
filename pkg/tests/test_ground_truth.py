"""
Unit tests for lighting augmentation and the ground-truth cache
"""

import unittest
import numpy as np
import sys
import os
import tempfile

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.asplund.distance import asplund_map_definitional
from src.dataset.data_processor import generate_sample_data
from src.dataset.ground_truth import (
    build_ground_truth,
    cache_path,
    check_shift_invariance,
    lip_shift_set,
    read_ground_truth,
    write_ground_truth,
)
from src.dataset.idx import dataset_hash
from src.dataset.reference_probes import make_reference_probe
from src.errors import DataFormatError, NumericError
from src.morphology.probe import Probe


class TestLipShiftSet(unittest.TestCase):
    """Test cases for the simulated lighting changes"""

    def test_darken(self):
        self.assertAlmostEqual(float(lip_shift_set(np.array([200.0]), 100.0)[0]), 221.875, places=12)

    def test_darken_then_brighten(self):
        images = generate_sample_data(count=4, seed=0, shape=(10, 10))
        restored = lip_shift_set(lip_shift_set(images, 100.0), -100.0)
        self.assertLessEqual(float(np.max(np.abs(restored - images))), 1e-12)

    def test_zero_shift_copies(self):
        images = np.ones((2, 3, 3))
        shifted = lip_shift_set(images, 0.0)
        np.testing.assert_array_equal(shifted, images)
        self.assertIsNot(shifted, images)

    def test_brightening_may_go_negative(self):
        self.assertLess(float(lip_shift_set(np.array([10.0]), -100.0)[0]), 0.0)


class TestGroundTruth(unittest.TestCase):
    """Test cases for building and caching ground truths"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.images = generate_sample_data(count=5, seed=9, shape=(12, 12))
        self.reference = make_reference_probe(0.6, 80.0)

    def tearDown(self):
        self.tmp.cleanup()

    def test_matches_definitional_map(self):
        maps = build_ground_truth(self.images, self.reference)
        self.assertEqual(maps.shape, self.images.shape)
        for i in (0, 3):
            expected = asplund_map_definitional(self.images[i], self.reference.probe())
            np.testing.assert_allclose(maps[i], expected, rtol=0, atol=1e-9)

    def test_constant_images(self):
        images = np.full((2, 9, 9), 120.0)
        single = make_reference_probe(100.0, 30.0)
        np.testing.assert_allclose(build_ground_truth(images, single), 0.0, atol=1e-9)
        # with a wider probe every full window sees the LIP-range of the probe heights
        maps = build_ground_truth(images, self.reference)
        self.assertAlmostEqual(float(maps[0, 4, 4]), float(maps[1, 4, 4]), places=12)
        self.assertGreater(float(maps[0, 4, 4]), 0.0)

    def test_chunking_does_not_change_result(self):
        whole = build_ground_truth(self.images, self.reference, chunk_size=256)
        pieces = build_ground_truth(self.images, self.reference, chunk_size=2)
        np.testing.assert_array_equal(whole, pieces)

    def test_cache_round_trip(self):
        maps = build_ground_truth(self.images, self.reference, cache_dir=self.tmp.name)
        path = cache_path(self.tmp.name, dataset_hash(self.images), 0.6, 80.0)
        self.assertTrue(os.path.exists(path))
        cached, header = read_ground_truth(path)
        np.testing.assert_array_equal(cached, maps)
        self.assertEqual(header['beta'], 0.6)
        self.assertEqual(header['count'], 5)
        self.assertEqual(header['dataset'], dataset_hash(self.images))

    def test_cache_hit(self):
        build_ground_truth(self.images, self.reference, cache_dir=self.tmp.name)
        with self.assertLogs('src.dataset.ground_truth', level='INFO') as logs:
            again = build_ground_truth(self.images, self.reference, cache_dir=self.tmp.name)
        self.assertTrue(any('cache hit' in line for line in logs.output))
        self.assertEqual(again.shape, self.images.shape)

    def test_stale_cache_is_recomputed(self):
        path = cache_path(self.tmp.name, dataset_hash(self.images), 0.6, 80.0)
        write_ground_truth(path, np.zeros((2, 12, 12)), 0.6, 80.0, 256.0, dataset_hash(self.images))
        with self.assertLogs('src.dataset.ground_truth', level='WARNING'):
            maps = build_ground_truth(self.images, self.reference, cache_dir=self.tmp.name)
        self.assertEqual(maps.shape, self.images.shape)
        self.assertEqual(read_ground_truth(path)[0].shape, self.images.shape)

    def test_malformed_cache(self):
        path = os.path.join(self.tmp.name, 'bad.bin')
        with open(path, 'wb') as handle:
            handle.write(b'NOTACACHE\n')
        with self.assertRaises(DataFormatError):
            read_ground_truth(path)
        write_ground_truth(path, np.zeros((1, 2, 2)), 0.4, 50.0, 256.0, 'abc')
        with open(path, 'ab') as handle:
            handle.write(b'\x00')
        with self.assertRaises(DataFormatError):
            read_ground_truth(path)

    def test_shift_invariance_check(self):
        worst = check_shift_invariance(self.images, self.reference.probe())
        self.assertLessEqual(worst, 1e-9)
        with self.assertRaises(NumericError):
            check_shift_invariance(self.images, Probe(np.zeros((3, 3))), tolerance=-1.0)


if __name__ == '__main__':
    unittest.main()
