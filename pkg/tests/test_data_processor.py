"""
Unit tests for the data processor module
"""

import unittest
import numpy as np
import sys
import os
import tempfile
from unittest import mock

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.dataset.data_processor import (
    DATA_DIR_ENV,
    generate_sample_data,
    images_path,
    load_data,
    load_or_generate,
)
from src.dataset.idx import read_idx, write_idx


class TestDataProcessor(unittest.TestCase):
    """Test cases for the data processor module"""

    def setUp(self):
        """Set up a dataset directory with a small test split"""
        self.tmp = tempfile.TemporaryDirectory()
        rng = np.random.default_rng(0)
        self.images = rng.integers(0, 256, (5, 28, 28)).astype(np.uint8)
        write_idx(os.path.join(self.tmp.name, 't10k-images-idx3-ubyte.gz'), self.images)

    def tearDown(self):
        self.tmp.cleanup()

    def test_load_data(self):
        """Test the load_data function"""
        result = load_data(self.tmp.name, split='test')

        # Values are promoted to float grey levels
        self.assertEqual(result.dtype, np.float64)
        np.testing.assert_array_equal(result, self.images)

        # limit keeps the first images
        self.assertEqual(load_data(self.tmp.name, split='test', limit=2).shape, (2, 28, 28))

    def test_missing_split(self):
        """Test that a missing images file raises FileNotFoundError"""
        with self.assertRaises(FileNotFoundError):
            load_data(self.tmp.name, split='train')
        with self.assertRaises(ValueError):
            images_path(self.tmp.name, split='validation')

    def test_data_dir_environment(self):
        with mock.patch.dict(os.environ, {DATA_DIR_ENV: self.tmp.name}):
            self.assertTrue(images_path(split='t10k').endswith('t10k-images-idx3-ubyte.gz'))
            self.assertEqual(len(load_data(split='test')), 5)

    def test_file_path_accepted(self):
        path = os.path.join(self.tmp.name, 't10k-images-idx3-ubyte.gz')
        self.assertEqual(images_path(path), path)

    def test_generate_sample_data(self):
        """Test the generate_sample_data function"""
        first = generate_sample_data(count=12, seed=4)
        second = generate_sample_data(count=12, seed=4)

        # Equal seeds give identical images
        np.testing.assert_array_equal(first, second)
        self.assertEqual(first.shape, (12, 28, 28))

        # Integer grey levels in 0..255
        self.assertTrue(np.all((first >= 0) & (first <= 255)))
        np.testing.assert_array_equal(first, np.round(first))
        self.assertFalse(np.array_equal(first, generate_sample_data(count=12, seed=5)))

    def test_generate_sample_data_to_file(self):
        path = os.path.join(self.tmp.name, 'synthetic', 'train-images-idx3-ubyte')
        images = generate_sample_data(count=3, seed=1, shape=(10, 10), output_path=path)
        np.testing.assert_array_equal(read_idx(path), images)

    def test_load_or_generate(self):
        with self.assertLogs('src.dataset.data_processor', level='WARNING'):
            images = load_or_generate(self.tmp.name, split='train', limit=7, seed=2)
        np.testing.assert_array_equal(images, generate_sample_data(7, seed=2))
        self.assertEqual(len(load_or_generate(self.tmp.name, split='test')), 5)


if __name__ == '__main__':
    unittest.main()
