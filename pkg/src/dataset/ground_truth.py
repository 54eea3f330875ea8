"""
Lighting augmentation and ground-truth distance maps, with an on-disk cache.

Cache file layout: one ASCII header line

    LMMGT1 beta=<β> c=<c> M=<M> count=<N> rows=<H> cols=<W> dataset=<hash>

followed by N·H·W little-endian float64 values. Files are written to a
temporary name and renamed, so a reader never sees a partial cache.
"""

import logging
import os

import numpy as np

from src.asplund.distance import asplund_map_morphological
from src.dataset.idx import dataset_hash
from src.errors import DataFormatError, NumericError
from src.lip.arithmetic import DEFAULT_M, lip_add, lip_sub

logger = logging.getLogger(__name__)

CACHE_TAG = "LMMGT1"
INVARIANCE_TOLERANCE = 1e-9


def lip_shift_set(images, k, M=DEFAULT_M):
    """
    Simulate a lighting change on a stack of images.

    k > 0 darkens (f ⊕ k); k < 0 brightens by LIP-subtracting |k| (f ⊖ |k|).
    Brightened values may be negative and are kept as they are.

    Args:
        images (np.ndarray): Grey levels below M
        k (float): Signed shift, |k| < M
        M (float): Ceiling

    Returns:
        np.ndarray: Shifted images, float64
    """
    images = np.asarray(images, dtype=np.float64)
    if k == 0:
        return images.copy()
    if k > 0:
        return lip_add(images, float(k), M=M)
    return lip_sub(images, float(-k), M=M)


def cache_path(cache_dir, images_hash, beta, c):
    return os.path.join(cache_dir, f"gt_{images_hash}_beta{beta:g}_c{c:g}.bin")


def write_ground_truth(path, maps, beta, c, M, images_hash):
    """Write distance maps to a cache file atomically."""
    maps = np.ascontiguousarray(maps, dtype="<f8")
    count, rows, cols = maps.shape
    header = f"{CACHE_TAG} beta={beta!r} c={c!r} M={M!r} count={count} rows={rows} cols={cols} dataset={images_hash}\n"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "wb") as handle:
        handle.write(header.encode("ascii"))
        handle.write(maps.tobytes())
    os.replace(tmp_path, path)
    logger.info("wrote %d ground-truth maps to %s", count, path)


def read_ground_truth(path):
    """
    Read a cache file.

    Returns:
        tuple: (maps as N×H×W float64, header dict)

    Raises:
        DataFormatError: If the header is malformed or the payload size is wrong
    """
    with open(path, "rb") as handle:
        raw = handle.read()
    end = raw.find(b"\n")
    if end < 0:
        raise DataFormatError(f"{path}: missing cache header line", offset=len(raw))
    fields = raw[:end].decode("ascii", errors="replace").split()
    if not fields or fields[0] != CACHE_TAG:
        raise DataFormatError(f"{path}: not a ground-truth cache", offset=0)
    header = dict(field.split("=", 1) for field in fields[1:] if "=" in field)
    try:
        count, rows, cols = int(header["count"]), int(header["rows"]), int(header["cols"])
        header["beta"], header["c"], header["M"] = float(header["beta"]), float(header["c"]), float(header["M"])
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: incomplete cache header: {exc}", offset=0) from exc
    payload = raw[end + 1:]
    expected = count * rows * cols * 8
    if len(payload) != expected:
        raise DataFormatError(
            f"{path}: cache payload has {len(payload)} bytes, expected {expected}", offset=end + 1 + min(len(payload), expected)
        )
    maps = np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(count, rows, cols)
    header.update(count=count, rows=rows, cols=cols)
    return maps, header


def check_shift_invariance(images, probe, k=100.0, M=DEFAULT_M, samples=4, tolerance=INVARIANCE_TOLERANCE):
    """
    Confirm on a few images that ground truths of f and f ⊕ k coincide.

    Returns:
        float: Largest absolute difference seen

    Raises:
        NumericError: If the difference exceeds ``tolerance``
    """
    subset = np.asarray(images, dtype=np.float64)[:samples]
    base = asplund_map_morphological(subset, probe, M=M)
    shifted = asplund_map_morphological(lip_shift_set(subset, k, M=M), probe, M=M)
    worst = float(np.max(np.abs(base - shifted))) if subset.size else 0.0
    if worst > tolerance:
        raise NumericError(f"ground truth changed by {worst:.3e} under a LIP-shift of {k}")
    return worst


def build_ground_truth(images, reference, cache_dir=None, chunk_size=256, verify_samples=4):
    """
    Compute g = Asp_{b_r}(f) for every image, reusing a cached result when present.

    Images are processed in vectorised chunks along the first axis.

    Args:
        images (np.ndarray): N×H×W grey levels
        reference (ReferenceProbe): Probe b_r with its β, c and M
        cache_dir (str, optional): Directory of cache files; no caching when None
        chunk_size (int): Images per vectorised chunk
        verify_samples (int): Images used by ``check_shift_invariance`` (0 skips it)

    Returns:
        np.ndarray: N×H×W distance maps
    """
    images = np.asarray(images, dtype=np.float64)
    M = reference.M
    images_hash = dataset_hash(images)
    path = None
    if cache_dir is not None:
        path = cache_path(cache_dir, images_hash, reference.beta, reference.c)
        if os.path.exists(path):
            maps, header = read_ground_truth(path)
            if header.get("dataset") == images_hash and maps.shape == images.shape and header["M"] == M:
                logger.info("ground-truth cache hit: %s", path)
                return maps
            logger.warning("ground-truth cache %s does not match the images; recomputing", path)
        logger.info("ground-truth cache miss: %s", path)

    probe = reference.probe()
    if verify_samples:
        check_shift_invariance(images, probe, M=M, samples=verify_samples)
    maps = np.empty_like(images)
    for start in range(0, len(images), chunk_size):
        maps[start:start + chunk_size] = asplund_map_morphological(images[start:start + chunk_size], probe, M=M)

    if path is not None:
        write_ground_truth(path, maps, reference.beta, reference.c, M, images_hash)
    return maps
