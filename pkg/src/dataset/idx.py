"""
Reader and writer for IDX files (the Fashion-MNIST distribution format).

Layout, all integers big-endian::

    offset  type      value
    0       uint16    0
    2       uint8     0x08 (unsigned byte payload)
    3       uint8     number of dimensions d
    4       uint32*d  dimension sizes
    4+4d    uint8...  payload, row-major

Images files have d = 3 (magic 0x00000803), label files d = 1 (0x00000801).
Files compressed with gzip are detected from their first two bytes.
"""

import gzip
import hashlib
import logging
import os
import struct

import numpy as np

from src.errors import DataFormatError
from src.lip.arithmetic import DEFAULT_M

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
UNSIGNED_BYTE = 0x08
GZIP_MAGIC = b"\x1f\x8b"


def _read_bytes(path):
    with open(path, "rb") as handle:
        raw = handle.read()
    if raw[:2] == GZIP_MAGIC:
        try:
            raw = gzip.decompress(raw)
        except (OSError, EOFError) as exc:
            raise DataFormatError(f"{path}: corrupt gzip stream: {exc}", offset=0) from exc
    return raw


def parse_idx(raw, source="<bytes>"):
    """
    Decode an unsigned-byte IDX payload.

    Args:
        raw (bytes): Uncompressed file contents
        source (str): Name used in error messages

    Returns:
        np.ndarray: uint8 array with the dimensions stated in the header

    Raises:
        DataFormatError: On a bad magic number, short header or truncated payload
    """
    if len(raw) < 4:
        raise DataFormatError(f"{source}: file too short for an IDX header ({len(raw)} bytes)", offset=len(raw))
    zero, data_type, dims = struct.unpack(">HBB", raw[:4])
    if zero != 0:
        raise DataFormatError(f"{source}: bad magic number 0x{struct.unpack('>I', raw[:4])[0]:08x}", offset=0)
    if data_type != UNSIGNED_BYTE:
        raise DataFormatError(f"{source}: unsupported IDX data type 0x{data_type:02x}", offset=2)
    if dims == 0:
        raise DataFormatError(f"{source}: IDX header declares no dimensions", offset=3)

    header_size = 4 + 4 * dims
    if len(raw) < header_size:
        raise DataFormatError(f"{source}: dimension sizes truncated", offset=len(raw))
    shape = struct.unpack(f">{dims}I", raw[4:header_size])
    expected = int(np.prod(shape, dtype=np.int64))
    available = len(raw) - header_size
    if available < expected:
        raise DataFormatError(
            f"{source}: payload truncated, expected {expected} bytes, found {available}", offset=len(raw)
        )
    if available > expected:
        raise DataFormatError(
            f"{source}: {available - expected} trailing byte(s) after payload", offset=header_size + expected
        )
    return np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header_size).reshape(shape)


def read_idx(path):
    """Read an IDX file, gzip-compressed or not, as a uint8 array."""
    return parse_idx(_read_bytes(path), source=os.fspath(path))


def write_idx(path, array, compress=None):
    """
    Write a uint8 array as an IDX file.

    Args:
        path (str): Destination; compressed when it ends in ".gz" unless ``compress`` says otherwise
        array (np.ndarray): Values in 0..255
        compress (bool, optional): Force gzip on or off
    """
    array = np.asarray(array)
    if array.ndim == 0 or array.ndim > 255:
        raise ValueError("IDX arrays need between 1 and 255 dimensions")
    if array.size and (array.min() < 0 or array.max() > 255):
        raise ValueError("IDX unsigned-byte payload must lie in 0..255")
    header = struct.pack(">HBB", 0, UNSIGNED_BYTE, array.ndim) + struct.pack(f">{array.ndim}I", *array.shape)
    payload = header + np.ascontiguousarray(array, dtype=np.uint8).tobytes()
    if compress is None:
        compress = os.fspath(path).endswith(".gz")
    if compress:
        payload = gzip.compress(payload, mtime=0)
    with open(path, "wb") as handle:
        handle.write(payload)


def load_idx(path, shape=(28, 28)):
    """
    Load an IDX images file as float64 grey levels.

    Args:
        path (str): Images file (magic 0x00000803)
        shape (tuple, optional): Expected image size; None accepts any

    Returns:
        np.ndarray: N×rows×cols float64 array with values in [0, 255] (M = 256)

    Raises:
        DataFormatError: If the file is not an images file or the size differs
    """
    images = read_idx(path)
    if images.ndim != 3:
        raise DataFormatError(f"{path}: expected an images file (3 dimensions), found {images.ndim}", offset=3)
    if shape is not None and images.shape[1:] != tuple(shape):
        raise DataFormatError(f"{path}: images are {images.shape[1:]}, expected {tuple(shape)}", offset=8)
    logger.info("loaded %d images of %dx%d from %s (M=%g)", *images.shape, path, DEFAULT_M)
    return images.astype(np.float64)


def dataset_hash(images):
    """SHA-256 of the shape and float64 bytes of an image stack, first 16 hex digits."""
    images = np.ascontiguousarray(images, dtype=np.float64)
    digest = hashlib.sha256()
    digest.update(repr(images.shape).encode("ascii"))
    digest.update(images.astype("<f8").tobytes())
    return digest.hexdigest()[:16]
