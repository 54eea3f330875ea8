"""
Unit tests for PGM output and exact value dumps
"""

import unittest
import numpy as np
import sys
import os
import tempfile

# Add the parent directory to the path so we can import the modules
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.errors import DataFormatError
from src.visualization.pgm import display_bytes, dump_image, read_dump, read_pgm, write_pgm


class TestPgm(unittest.TestCase):
    """Test cases for the PGM reader and writer"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, 'image.pgm')

    def tearDown(self):
        self.tmp.cleanup()

    def write_raw(self, raw):
        with open(self.path, 'wb') as handle:
            handle.write(raw)

    def test_round_trip(self):
        pixels = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
        write_pgm(self.path, pixels)
        np.testing.assert_array_equal(read_pgm(self.path), pixels)

    def test_header_comments(self):
        self.write_raw(b'P5\n# made by hand\n2 1\n# maxval next\n255\n\x00\xff')
        np.testing.assert_array_equal(read_pgm(self.path), [[0, 255]])

    def test_rejects_other_formats(self):
        self.write_raw(b'P2\n2 1\n255\n0 255\n')
        with self.assertRaises(DataFormatError):
            read_pgm(self.path)
        self.write_raw(b'P5\n2 1\n65535\n\x00\x00\x00\x00')
        with self.assertRaises(DataFormatError):
            read_pgm(self.path)
        self.write_raw(b'P5\n2 2\n255\n\x00')
        with self.assertRaises(DataFormatError):
            read_pgm(self.path)

    def test_write_needs_2d(self):
        with self.assertRaises(ValueError):
            write_pgm(self.path, np.zeros(4))


class TestDumps(unittest.TestCase):
    """Test cases for the display scaling and exact dumps"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def test_display_bytes(self):
        values = np.array([[-10.0, 0.0, 255.0, 256.0]])
        np.testing.assert_array_equal(display_bytes(values), [[255, 255, 0, 0]])
        self.assertEqual(int(display_bytes(np.array([51.0]))[0]), 204)

    def test_dump_and_read_back(self):
        rng = np.random.default_rng(6)
        values = rng.uniform(-20, 260, (5, 7))
        stem = os.path.join(self.tmp.name, 'panels', 'distance_map')
        pgm = dump_image(stem, values)
        self.assertEqual(pgm, stem + '.pgm')
        np.testing.assert_array_equal(read_dump(stem), values)
        np.testing.assert_array_equal(read_pgm(pgm), display_bytes(values))
        with open(stem + '.meta', encoding='utf-8') as handle:
            meta = dict(line.rstrip('\n').split(' = ', 1) for line in handle)
        self.assertEqual((meta['rows'], meta['cols'], meta['M']), ('5', '7', '256'))
        self.assertEqual(float(meta['max']), values.max())

    def test_truncated_dump(self):
        stem = os.path.join(self.tmp.name, 'map')
        dump_image(stem, np.zeros((2, 2)))
        with open(stem + '.f64', 'wb') as handle:
            handle.write(b'\x00' * 8)
        with self.assertRaises(DataFormatError):
            read_dump(stem)


if __name__ == '__main__':
    unittest.main()
