"""
Reference structuring functions used to generate ground truths.

On a 7×7 window with offsets −3..3, h(x) = (−β√7·‖x‖²) ⊕ c; the probe is h
where h ≥ 0 and −∞ elsewhere.
"""

import logging
import os
from dataclasses import dataclass

import numpy as np

from src.errors import DataFormatError, ProbeError
from src.layer.checkpoint import KernelFile, read_kernel_file, write_kernel_file
from src.lip.arithmetic import DEFAULT_M, lip_add
from src.morphology.probe import Probe

logger = logging.getLogger(__name__)

WINDOW = 7
BETA_GRID = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2)
C_GRID = tuple(float(c) for c in range(10, 251, 15))


@dataclass(eq=False)
class ReferenceProbe:
    """
    Reference probe b_r with its kernels.

    Args:
        beta (float): Curvature β > 0
        c (float): Centre height, 0 ≤ c < M
        W_h (np.ndarray): Heights, 0 off the support
        mask (np.ndarray): Boolean support indicator
        M (float): Ceiling
    """

    beta: float
    c: float
    W_h: np.ndarray
    mask: np.ndarray
    M: float = DEFAULT_M

    def probe(self):
        return Probe(self.W_h, self.mask)

    @property
    def name(self):
        return f"probe_beta{self.beta:g}_c{self.c:g}"


def make_reference_probe(beta, c, M=DEFAULT_M, size=WINDOW):
    """
    Build the reference probe for (β, c).

    Args:
        beta (float): Curvature, β > 0
        c (float): Centre height, 0 ≤ c < M
        M (float): Ceiling
        size (int): Odd window side

    Returns:
        ReferenceProbe: Heights and support

    Raises:
        ProbeError: If β or c are out of range
    """
    if beta <= 0:
        raise ProbeError(f"beta must be positive, got {beta}")
    if not 0 <= c < M:
        raise ProbeError(f"c must lie in [0, M), got {c}")
    radius = size // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    squared_norm = offsets[:, None] ** 2 + offsets[None, :] ** 2
    h = lip_add(-beta * np.sqrt(7.0) * squared_norm, c, M=M)
    mask = h >= 0
    assert mask[radius, radius], "the centre height c is always in the support"
    W_h = np.where(mask, h, 0.0)
    return ReferenceProbe(float(beta), float(c), W_h, mask, float(M))


def probe_grid(betas=BETA_GRID, cs=C_GRID):
    """All (β, c) pairs of the generation grid, β-major."""
    return [(float(beta), float(c)) for beta in betas for c in cs]


def save_reference_probe(path, reference):
    """Write a reference probe as a kernel file of kind 'reference'."""
    meta = {"beta": f"{reference.beta:.17g}", "c": f"{reference.c:.17g}"}
    write_kernel_file(path, KernelFile("reference", reference.W_h, reference.mask.astype(np.float64), reference.M, meta))


def load_reference_probe(path):
    """
    Read a reference probe file.

    Raises:
        DataFormatError: If the file holds learned kernels or lacks β/c
    """
    contents = read_kernel_file(path)
    if contents.kind != "reference":
        raise DataFormatError(f"{path}: expected a reference probe, found kind {contents.kind!r}")
    try:
        beta, c = float(contents.meta["beta"]), float(contents.meta["c"])
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: missing or bad beta/c: {exc}") from exc
    mask = contents.second != 0
    return ReferenceProbe(beta, c, contents.W_h, mask, contents.M)


def generate_probe_files(out_dir, pairs, M=DEFAULT_M):
    """
    Write one probe file per (β, c) pair.

    Returns:
        list: Paths written, in the order of ``pairs``
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for beta, c in pairs:
        reference = make_reference_probe(beta, c, M=M)
        path = os.path.join(out_dir, reference.name + ".txt")
        save_reference_probe(path, reference)
        paths.append(path)
    logger.info("wrote %d reference probes to %s", len(paths), out_dir)
    return paths
