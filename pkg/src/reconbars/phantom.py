"""Synthetic head phantom, the bundled stand-in for real scan data."""

from __future__ import annotations

import numpy as np

from .errors import PhantomSizeError
from .grids import as_dims
from .kspace import normalize_image

# Classic ten-ellipse head phantom: additive densities.
# Columns: (value, x0, y0, half_width, half_height, angle_deg).
_ELLIPSES = (
    (2.00, 0.00, 0.0000, 0.6900, 0.920, 0.0),
    (-0.98, 0.00, -0.0184, 0.6624, 0.874, 0.0),
    (-0.02, 0.22, 0.0000, 0.1100, 0.310, -18.0),
    (-0.02, -0.22, 0.0000, 0.1600, 0.410, 18.0),
    (0.01, 0.00, 0.3500, 0.2100, 0.250, 0.0),
    (0.01, 0.00, 0.1000, 0.0460, 0.046, 0.0),
    (0.01, 0.00, -0.1000, 0.0460, 0.046, 0.0),
    (0.01, -0.08, -0.6050, 0.0460, 0.023, 0.0),
    (0.01, 0.00, -0.6050, 0.0230, 0.023, 0.0),
    (0.01, 0.06, -0.6050, 0.0230, 0.046, 0.0),
)


def shepp_logan(dims) -> np.ndarray:
    """Rasterize the standard ten-ellipse head phantom.

    The unit square [-1, 1]^2 maps onto the full (possibly non-square)
    grid; densities accumulate additively and the result is normalized
    to [0, 1].  Deterministic: two calls return identical arrays.
    """
    dims = as_dims(dims)
    if dims.rows < 16 or dims.cols < 16:
        raise PhantomSizeError(
            f"phantom needs at least 16x16 pixels, got {dims.rows}x{dims.cols}"
        )
    # Row 0 is the top of the picture (y = +1).
    y = np.linspace(1.0, -1.0, dims.rows)[:, None]
    x = np.linspace(-1.0, 1.0, dims.cols)[None, :]
    img = np.zeros(dims.shape)
    for value, x0, y0, a, b, angle_deg in _ELLIPSES:
        theta = np.deg2rad(angle_deg)
        xr = (x - x0) * np.cos(theta) + (y - y0) * np.sin(theta)
        yr = -(x - x0) * np.sin(theta) + (y - y0) * np.cos(theta)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    return normalize_image(img)
