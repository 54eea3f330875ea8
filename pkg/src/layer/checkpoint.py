"""
Kernel files: layer checkpoints and reference probes.

Format (plain text, UTF-8)::

    format = lmm-kernels/1
    kind = learned            # or: reference
    rows = 7
    cols = 7
    M = 256
    beta = 0.4                # optional extra keys, one per line
    W_h
    <rows lines of cols numbers>
    W_m                       # "mask" for kind = reference (0/1 indicator)
    <rows lines of cols numbers>

Numbers are written with 17 significant digits, so values read back are
bit-identical to the values written.
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from src.errors import DataFormatError
from src.layer.asplund_layer import AsplundLayer, KernelPair

logger = logging.getLogger(__name__)

FORMAT_TAG = "lmm-kernels/1"
_SECOND_GRID = {"learned": "W_m", "reference": "mask"}


@dataclass
class KernelFile:
    """Contents of a kernel file."""

    kind: str
    W_h: np.ndarray
    second: np.ndarray
    M: float
    meta: dict = field(default_factory=dict)


def _format_rows(grid):
    return ["  ".join(f"{value:.17g}" for value in row) for row in grid]


def write_kernel_file(path, kernel_file):
    """
    Write a kernel file atomically.

    Args:
        path (str): Destination
        kernel_file (KernelFile): Contents
    """
    if kernel_file.kind not in _SECOND_GRID:
        raise ValueError(f"unknown kernel file kind: {kernel_file.kind}")
    rows, cols = kernel_file.W_h.shape
    lines = [
        f"format = {FORMAT_TAG}",
        f"kind = {kernel_file.kind}",
        f"rows = {rows}",
        f"cols = {cols}",
        f"M = {kernel_file.M:.17g}",
    ]
    lines += [f"{key} = {value}" for key, value in sorted(kernel_file.meta.items())]
    lines += ["W_h"] + _format_rows(kernel_file.W_h)
    lines += [_SECOND_GRID[kernel_file.kind]] + _format_rows(kernel_file.second)

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = f"{path}.tmp"
    with open(tmp_path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    os.replace(tmp_path, path)
    logger.debug("wrote %s kernel file %s", kernel_file.kind, path)


def _read_grid(lines, start, rows, cols, name, path):
    grid = []
    for offset in range(rows):
        index = start + offset
        if index >= len(lines):
            raise DataFormatError(f"{path}: {name} grid truncated at line {index + 1}")
        try:
            values = [float(token) for token in lines[index].split()]
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad number on line {index + 1}: {exc}") from exc
        if len(values) != cols:
            raise DataFormatError(f"{path}: line {index + 1} has {len(values)} values, expected {cols}")
        grid.append(values)
    return np.array(grid, dtype=np.float64)


def read_kernel_file(path):
    """
    Read a kernel file.

    Args:
        path (str): Source file

    Returns:
        KernelFile: Parsed contents

    Raises:
        FileNotFoundError: If the file does not exist
        DataFormatError: If the file is malformed
    """
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]

    header = {}
    index = 0
    while index < len(lines) and "=" in lines[index]:
        key, value = lines[index].split("=", 1)
        header[key.strip()] = value.strip()
        index += 1

    if header.get("format") != FORMAT_TAG:
        raise DataFormatError(f"{path}: not a kernel file (format tag {header.get('format')!r})")
    kind = header.get("kind")
    if kind not in _SECOND_GRID:
        raise DataFormatError(f"{path}: unknown kind {kind!r}")
    try:
        rows, cols, M = int(header["rows"]), int(header["cols"]), float(header["M"])
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: incomplete shape header: {exc}") from exc

    if index >= len(lines) or lines[index] != "W_h":
        raise DataFormatError(f"{path}: expected 'W_h' on line {index + 1}")
    W_h = _read_grid(lines, index + 1, rows, cols, "W_h", path)
    index += 1 + rows
    second_name = _SECOND_GRID[kind]
    if index >= len(lines) or lines[index] != second_name:
        raise DataFormatError(f"{path}: expected {second_name!r} on line {index + 1}")
    second = _read_grid(lines, index + 1, rows, cols, second_name, path)

    meta = {key: value for key, value in header.items() if key not in ("format", "kind", "rows", "cols", "M")}
    return KernelFile(kind, W_h, second, M, meta)


def save_checkpoint(path, layer, **meta):
    """Save the kernels of a layer."""
    write_kernel_file(path, KernelFile("learned", layer.kernels.W_h, layer.kernels.W_m, layer.M, meta))


def load_checkpoint(path, **layer_options):
    """
    Rebuild a layer from a checkpoint.

    Raises:
        DataFormatError: If the file holds a reference probe rather than learned kernels
    """
    contents = read_kernel_file(path)
    if contents.kind != "learned":
        raise DataFormatError(f"{path}: expected a learned checkpoint, found kind {contents.kind!r}")
    return AsplundLayer(M=contents.M, kernels=KernelPair(contents.W_h, contents.second), **layer_options)
