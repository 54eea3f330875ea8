"""
Structuring functions (probes) over a finite rectangular window
"""

from dataclasses import dataclass

import numpy as np

from src.errors import ProbeError


@dataclass(frozen=True, eq=False)
class Probe:
    """
    Non-flat structuring function b on an A×B window.

    Heights are meaningful on the support only; outside it the function is
    conceptually −∞. Offsets are measured from ``origin`` (row, col), which
    defaults to the window centre (⌊A/2⌋, ⌊B/2⌋).

    Args:
        heights (np.ndarray): A×B grid of heights
        support (np.ndarray, optional): A×B boolean grid. Defaults to the whole window.
        origin (tuple, optional): Origin index (row, col)
    """

    heights: np.ndarray
    support: np.ndarray = None
    origin: tuple = None

    def __post_init__(self):
        heights = np.array(self.heights, dtype=np.float64)
        if heights.ndim != 2 or heights.size == 0:
            raise ProbeError(f"probe heights must be a non-empty 2-D grid, got shape {heights.shape}")

        support = np.ones(heights.shape, dtype=bool) if self.support is None else np.array(self.support, dtype=bool)
        if support.shape != heights.shape:
            raise ProbeError(f"support shape {support.shape} does not match heights shape {heights.shape}")
        if not support.any():
            raise ProbeError("probe support is empty")
        if not np.all(np.isfinite(heights[support])):
            raise ProbeError("probe heights must be finite on the support")

        origin = (heights.shape[0] // 2, heights.shape[1] // 2) if self.origin is None else tuple(int(v) for v in self.origin)
        if not (0 <= origin[0] < heights.shape[0] and 0 <= origin[1] < heights.shape[1]):
            raise ProbeError(f"origin {origin} lies outside the {heights.shape} window")

        heights.setflags(write=False)
        support.setflags(write=False)
        object.__setattr__(self, "heights", heights)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def flat(cls, shape, height=0.0):
        """Flat probe with full rectangular support."""
        return cls(np.full(shape, float(height)))

    @classmethod
    def from_grid(cls, grid, origin=None):
        """Build a probe from a grid where −∞ marks samples outside the support."""
        grid = np.asarray(grid, dtype=np.float64)
        return cls(grid, grid > -np.inf, origin)

    @classmethod
    def single_pixel(cls, height=0.0, shape=(1, 1)):
        """Probe whose support is the origin only."""
        heights = np.zeros(shape)
        support = np.zeros(shape, dtype=bool)
        origin = (shape[0] // 2, shape[1] // 2)
        heights[origin] = height
        support[origin] = True
        return cls(heights, support, origin)

    @property
    def shape(self):
        return self.heights.shape

    @property
    def is_flat(self):
        values = self.heights[self.support]
        return bool(np.all(values == values[0]))

    def taps(self):
        """
        Enumerate the support in row-major order.

        Returns:
            list: (linear_index, row_offset, col_offset, height) tuples
        """
        rows, cols = self.shape
        result = []
        for i in range(rows):
            for j in range(cols):
                if self.support[i, j]:
                    result.append((i * cols + j, i - self.origin[0], j - self.origin[1], self.heights[i, j]))
        return result

    def with_heights(self, heights):
        """Same support and origin, new heights."""
        return Probe(heights, self.support, self.origin)


def reflect(b):
    """
    Reflection b̄(x) = b(−x).

    Index i maps to (size − 1 − i) on each axis and the origin follows, so every
    offset is exactly negated, for even-sized windows as well.
    """
    rows, cols = b.shape
    return Probe(
        b.heights[::-1, ::-1],
        b.support[::-1, ::-1],
        (rows - 1 - b.origin[0], cols - 1 - b.origin[1]),
    )
