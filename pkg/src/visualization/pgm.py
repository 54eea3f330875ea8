"""
Lossless image dumps: 8-bit binary PGM for viewing plus exact float64 values.

``dump_image(stem, values)`` writes three files:

- ``<stem>.pgm``  P5 greyscale, display byte = 255 − clip(v·255/(M − 1), 0, 255).
  Values are grey levels of the LIP model (0 white, M black), so the display
  inverts them; values below 0 show as white and values at or above M − 1 as black.
- ``<stem>.f64``  the raw values, little-endian float64, row-major.
- ``<stem>.meta`` ``key = value`` lines: rows, cols, M, min, max, display.
"""

import logging
import os

import numpy as np

from src.errors import DataFormatError
from src.lip.arithmetic import DEFAULT_M

logger = logging.getLogger(__name__)

DISPLAY_RULE = "255 - clip(v * 255 / (M - 1), 0, 255), rounded"


def write_pgm(path, pixels):
    """Write a 2-D uint8 array as a binary (P5) PGM file."""
    pixels = np.asarray(pixels)
    if pixels.ndim != 2:
        raise ValueError(f"PGM needs a 2-D array, got shape {pixels.shape}")
    height, width = pixels.shape
    with open(path, "wb") as handle:
        handle.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        handle.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def _next_token(raw, position):
    while position < len(raw):
        if raw[position:position + 1] == b"#":
            while position < len(raw) and raw[position:position + 1] != b"\n":
                position += 1
        elif raw[position:position + 1].isspace():
            position += 1
        else:
            break
    start = position
    while position < len(raw) and not raw[position:position + 1].isspace():
        position += 1
    return raw[start:position], position


def read_pgm(path):
    """
    Read an 8-bit binary PGM file.

    Raises:
        DataFormatError: If the file is not an 8-bit P5 image or is truncated
    """
    with open(path, "rb") as handle:
        raw = handle.read()
    if raw[:2] != b"P5":
        raise DataFormatError(f"{path}: not a binary PGM (P5) file", offset=0)
    position = 2
    values = []
    for _ in range(3):
        token, position = _next_token(raw, position)
        try:
            values.append(int(token))
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad PGM header field {token!r}", offset=position) from exc
    width, height, max_value = values
    if max_value != 255:
        raise DataFormatError(f"{path}: only 8-bit PGM is supported (maxval {max_value})", offset=position)
    position += 1
    payload = raw[position:position + width * height]
    if len(payload) != width * height:
        raise DataFormatError(f"{path}: PGM payload truncated", offset=len(raw))
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width)


def display_bytes(values, M=DEFAULT_M):
    """Map grey levels to display bytes in the inverted scale."""
    values = np.asarray(values, dtype=np.float64)
    scaled = np.clip(values * 255.0 / (M - 1.0), 0.0, 255.0)
    return np.round(255.0 - scaled).astype(np.uint8)


def dump_image(stem, values, M=DEFAULT_M):
    """
    Write ``<stem>.pgm``, ``<stem>.f64`` and ``<stem>.meta``.

    Args:
        stem (str): Output path without extension
        values (np.ndarray): 2-D grey levels or distance map
        M (float): Ceiling used by the display scaling

    Returns:
        str: Path of the PGM file
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {values.shape}")
    directory = os.path.dirname(stem)
    if directory:
        os.makedirs(directory, exist_ok=True)

    write_pgm(f"{stem}.pgm", display_bytes(values, M))
    with open(f"{stem}.f64", "wb") as handle:
        handle.write(values.astype("<f8").tobytes())
    meta = {
        "rows": values.shape[0],
        "cols": values.shape[1],
        "M": f"{M:.17g}",
        "min": f"{values.min():.17g}",
        "max": f"{values.max():.17g}",
        "dtype": "float64 little-endian",
        "display": DISPLAY_RULE,
    }
    with open(f"{stem}.meta", "w", encoding="utf-8") as handle:
        handle.writelines(f"{key} = {value}\n" for key, value in meta.items())
    logger.debug("dumped %s (.pgm/.f64/.meta)", stem)
    return f"{stem}.pgm"


def read_dump(stem):
    """Read back the exact values written by ``dump_image``."""
    meta = {}
    with open(f"{stem}.meta", "r", encoding="utf-8") as handle:
        for line in handle:
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    rows, cols = int(meta["rows"]), int(meta["cols"])
    values = np.fromfile(f"{stem}.f64", dtype="<f8")
    if values.size != rows * cols:
        raise DataFormatError(f"{stem}.f64 holds {values.size} values, expected {rows * cols}")
    return values.reshape(rows, cols).astype(np.float64)
