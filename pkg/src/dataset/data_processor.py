"""
Data processor module to load the Fashion-MNIST images or build a synthetic stand-in.

Dataset directory layout (``LMM_DATA_DIR``, default ``data/raw``)::

    train-images-idx3-ubyte[.gz]    training images
    train-labels-idx1-ubyte[.gz]    labels, unused
    t10k-images-idx3-ubyte[.gz]     test images
"""

import logging
import os

import numpy as np
from scipy.ndimage import gaussian_filter

from src.dataset.idx import load_idx, write_idx

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "LMM_DATA_DIR"
SPLITS = {"train": "train-images-idx3-ubyte", "test": "t10k-images-idx3-ubyte", "t10k": "t10k-images-idx3-ubyte"}


def default_data_dir():
    return os.environ.get(DATA_DIR_ENV, os.path.join("data", "raw"))


def images_path(data_path=None, split="train"):
    """
    Locate the images file of a split, preferring the uncompressed file.

    Args:
        data_path (str, optional): Dataset directory or an IDX file.
            Defaults to $LMM_DATA_DIR, else 'data/raw'.
        split (str): 'train' or 'test' ('t10k')

    Returns:
        str: Path to an existing file

    Raises:
        FileNotFoundError: If no images file exists
    """
    if data_path is None:
        data_path = default_data_dir()
    if os.path.isfile(data_path):
        return data_path
    if split not in SPLITS:
        raise ValueError(f"unknown split {split!r}; choose 'train' or 'test'")
    for suffix in ("", ".gz"):
        candidate = os.path.join(data_path, SPLITS[split] + suffix)
        if os.path.exists(candidate):
            return candidate
    raise FileNotFoundError(f"Images file for split '{split}' not found in {data_path}")


def load_data(data_path=None, split="train", limit=None):
    """
    Load images of one split as float64 grey levels.

    Args:
        data_path (str, optional): Dataset directory or IDX file
        split (str): 'train' or 'test'
        limit (int, optional): Keep only the first ``limit`` images

    Returns:
        np.ndarray: N×28×28 float64 array in [0, 255]

    Raises:
        FileNotFoundError: If the data file doesn't exist
    """
    images = load_idx(images_path(data_path, split))
    if limit is not None:
        images = images[:limit]
    return images


def generate_sample_data(count=1000, seed=0, shape=(28, 28), output_path=None):
    """
    Generate smooth random blobs that stand in for Fashion-MNIST.

    Each image is white noise smoothed with a Gaussian of random width,
    stretched to a random grey-level range and quantised to 0..255.

    Args:
        count (int): Number of images
        seed (int): Seed of the generator; equal seeds give identical images
        shape (tuple): Image size
        output_path (str, optional): Also write the images as an IDX file

    Returns:
        np.ndarray: count×rows×cols float64 array with integer values in [0, 255]
    """
    rng = np.random.default_rng(seed)
    images = np.empty((count, *shape), dtype=np.float64)
    for i in range(count):
        noise = rng.standard_normal(shape)
        smooth = gaussian_filter(noise, sigma=rng.uniform(1.0, 3.0), mode="reflect")
        span = smooth.max() - smooth.min()
        unit = (smooth - smooth.min()) / span if span > 0 else np.zeros(shape)
        low = rng.uniform(0.0, 60.0)
        high = rng.uniform(150.0, 255.0)
        images[i] = np.round(low + unit * (high - low))

    if output_path is not None:
        directory = os.path.dirname(output_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        write_idx(output_path, images.astype(np.uint8))
        logger.info("wrote %d synthetic images to %s", count, output_path)
    return images


def load_or_generate(data_path=None, split="train", limit=None, seed=0):
    """Load a split, falling back to ``generate_sample_data`` when the files are missing."""
    try:
        return load_data(data_path, split, limit)
    except FileNotFoundError as exc:
        count = limit if limit is not None else 1000
        logger.warning("%s; using %d synthetic images (seed %d)", exc, count, seed)
        return generate_sample_data(count, seed=seed)
