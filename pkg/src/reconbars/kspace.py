"""Fourier-grid data model: unitary centered transforms, measurement
noise, and intensity normalization.

Both transform directions carry the unitary ``1/sqrt(m*n)`` factor, so
they preserve the L2 norm and noise of a given standard deviation has
the same energy scale in either domain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ComplexResidueWarning
from .seeds import rng_for

# Relative size of the imaginary part an inverse transform may discard
# silently; anything larger points at non-Hermitian data upstream.
RESIDUE_TOLERANCE = 1e-10


@dataclass(frozen=True)
class NoiseSpec:
    """Complex Gaussian measurement noise: per-sample standard deviation
    ``sigma`` (real and imaginary parts each get variance ``sigma**2/2``)
    and the 64-bit seed that makes it reproducible."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def forward_transform(img: np.ndarray) -> np.ndarray:
    """Unitary 2-D DFT of an image, in the centered frequency layout.

    Parameters
    ----------
    img : (m, n) array_like
        Real pixel values.

    Returns
    -------
    (m, n) complex ndarray
        Coefficients indexed by centered frequency; the DC coefficient
        sits at ``[m//2, n//2]``.
    """
    img = np.asarray(img, dtype=np.float64)
    return np.fft.fftshift(np.fft.fft2(img, norm="ortho"))


def inverse_transform(k: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`forward_transform`, returning a real image.

    The imaginary part of the inverse DFT is discarded.  If its norm
    exceeds ``RESIDUE_TOLERANCE`` relative to the real part, a
    :class:`~reconbars.errors.ComplexResidueWarning` is emitted: real
    images have Hermitian-symmetric spectra, so a large residue means
    the input was not the spectrum of a real image.
    """
    k = np.asarray(k, dtype=np.complex128)
    u = np.fft.ifft2(np.fft.ifftshift(k), norm="ortho")
    real_norm = np.linalg.norm(u.real)
    imag_norm = np.linalg.norm(u.imag)
    if imag_norm > RESIDUE_TOLERANCE * real_norm and imag_norm > 0.0:
        rel = imag_norm / real_norm if real_norm > 0 else np.inf
        warnings.warn(
            f"discarding imaginary residue of relative size {rel:.3e}",
            ComplexResidueWarning,
            stacklevel=2,
        )
    return u.real.copy()


def add_measurement_noise(k: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. centered complex Gaussian noise to every grid value.

    Noise is generated in one fixed-layout draw of shape ``(2, m, n)``
    (real parts first, then imaginary), so the result is a pure function
    of ``(k, spec.sigma, spec.seed)``.
    """
    k = np.asarray(k, dtype=np.complex128)
    if spec.sigma == 0.0:
        return k.copy()
    z = rng_for(spec.seed).standard_normal((2,) + k.shape)
    return k + (z[0] + 1j * z[1]) * (spec.sigma / np.sqrt(2.0))


def normalize_image(img: np.ndarray) -> np.ndarray:
    """Affinely rescale pixel values to span [0, 1].

    A constant image maps to all zeros.
    """
    img = np.asarray(img, dtype=np.float64)
    lo = img.min()
    hi = img.max()
    if hi == lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)
