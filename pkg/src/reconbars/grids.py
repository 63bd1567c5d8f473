"""Centered-frequency grid conventions.

Every frequency-domain array in this package uses the centered layout:
entry ``[i, j]`` holds the coefficient of the frequency pair
``(i - m//2, j - n//2)``, so row frequencies run from ``-floor(m/2)``
through ``ceil(m/2) - 1`` and likewise for columns.  This is exactly
the layout ``numpy.fft.fftshift`` produces, for even and odd sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridDims:
    """Shape shared by an image and its frequency-domain data."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(
                f"grid must be at least 2x2, got {self.rows}x{self.cols}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row_freqs(self) -> np.ndarray:
        """Centered row frequencies, ``-floor(m/2) .. ceil(m/2)-1``."""
        return np.arange(self.rows) - self.rows // 2

    def col_freqs(self) -> np.ndarray:
        """Centered column frequencies, ``-floor(n/2) .. ceil(n/2)-1``."""
        return np.arange(self.cols) - self.cols // 2

    def row_index(self, freq: int) -> int:
        """Array row index of a centered row frequency."""
        return int(freq) + self.rows // 2

    def col_index(self, freq: int) -> int:
        """Array column index of a centered column frequency."""
        return int(freq) + self.cols // 2


def as_dims(value) -> GridDims:
    """Coerce a ``GridDims``, ``(rows, cols)`` pair, or array shape."""
    if isinstance(value, GridDims):
        return value
    rows, cols = value
    return GridDims(int(rows), int(cols))


def dims_of(arr: np.ndarray) -> GridDims:
    """Grid dimensions of a 2-D array."""
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
    return GridDims(arr.shape[0], arr.shape[1])
