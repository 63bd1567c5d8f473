"""Total-variation regularized reconstruction from masked frequency data.

Solves

    min_u  sum_p ||(D u)_p||_2  +  (mu/2) * sum_{retained} |F(u) - y|^2

by operator splitting (alternating-direction method of multipliers)
with an auxiliary gradient field ``w ~ D u`` and multipliers ``lam``.
``D`` is the forward-difference gradient with periodic wrap, so its
normal matrix is diagonal in the Fourier basis, as is the sampling
projection; the inner linear solve is therefore exact.

The iterate is kept complex throughout: masked measurement sets are
generally not Hermitian-symmetric, so the exact minimizer of the inner
normal equations is complex even for a real underlying image.  Only the
returned reconstruction takes the real part.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimsMismatchError, EmptyMaskError
from .grids import as_dims, dims_of


@dataclass(frozen=True)
class SolverParams:
    """Reconstruction parameters: data-fidelity weight ``mu``, splitting
    coupling ``beta``, and the fixed iteration count."""

    mu: float = 1e12
    beta: float = 10.0
    iterations: int = 100

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


class GradientField(NamedTuple):
    """Forward differences with periodic wrap: ``dx`` along columns,
    ``dy`` along rows."""

    dx: np.ndarray
    dy: np.ndarray


def forward_diff(u: np.ndarray) -> GradientField:
    """Periodic forward-difference gradient of an image."""
    return GradientField(
        dx=np.roll(u, -1, axis=1) - u,
        dy=np.roll(u, -1, axis=0) - u,
    )


def diff_adjoint(field: GradientField) -> np.ndarray:
    """Adjoint of :func:`forward_diff` (the negative divergence)."""
    dx, dy = field
    return (np.roll(dx, 1, axis=1) - dx) + (np.roll(dy, 1, axis=0) - dy)


def shrink2(field: GradientField, threshold: float) -> GradientField:
    """Pointwise isotropic soft-threshold of a 2-vector field.

    With ``r = sqrt(|dx|^2 + |dy|^2)`` per pixel, scales each 2-vector
    by ``max(r - threshold, 0) / r`` (zero where ``r = 0``).  This is
    the exact minimizer of ``threshold*||w|| + ||w - v||^2 / 2`` at
    each pixel.  Complex components are handled through their moduli.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    dx = np.asarray(field[0])
    dy = np.asarray(field[1])
    r = np.sqrt(np.abs(dx) ** 2 + np.abs(dy) ** 2)
    scale = np.maximum(r - threshold, 0.0) / np.where(r == 0.0, 1.0, r)
    return GradientField(dx * scale, dy * scale)


def periodic_laplacian_symbol(dims) -> np.ndarray:
    """Fourier-basis eigenvalues of the gradient's normal matrix.

    Under periodic boundaries ``D^T D`` acts diagonally in frequency
    with value ``4 - 2cos(2*pi*p/m) - 2cos(2*pi*q/n)``; the returned
    array uses the centered layout shared by all k-space data.
    """
    dims = as_dims(dims)
    p = dims.row_freqs()
    q = dims.col_freqs()
    row_part = 2.0 - 2.0 * np.cos(2.0 * np.pi * p / dims.rows)
    col_part = 2.0 - 2.0 * np.cos(2.0 * np.pi * q / dims.cols)
    return row_part[:, None] + col_part[None, :]


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape != b.shape:
        raise DimsMismatchError(f"{what}: shapes {a.shape} and {b.shape} differ")


def reconstruct(
    kspace: np.ndarray,
    mask: np.ndarray,
    params: SolverParams = SolverParams(),
    *,
    collect: list | None = None,
) -> np.ndarray:
    """Reconstruct an image from the retained frequencies of ``kspace``.

    Runs exactly ``params.iterations`` splitting cycles from the
    zero-filled inverse transform of the masked data, with ``w`` and the
    multipliers starting at zero.  Each cycle shrinks the shifted
    gradient, solves the normal equations

        (beta * D^T D + mu * P^T P) u = beta * D^T (w - lam/beta) + mu * P^T y

    exactly in the Fourier basis, and updates the multipliers by
    ``lam += beta * (D u - w)``.  Returns the real part of the final
    iterate.  Pure function of its arguments; bit-stable across runs.

    Parameters
    ----------
    kspace : (m, n) complex ndarray
        Measured data in the centered frequency layout.
    mask : (m, n) bool ndarray
        Retained frequencies (centered layout).  Must retain >= 1 pixel.
    params : SolverParams
    collect : list, optional
        If given, one diagnostics dict is appended per iteration with
        the independently recomputed normal-equation residual of the
        u-step, the objective value of the current real-part iterate,
        and the rms/max fidelity deviation of the (complex) iterate on
        retained frequencies.  Note the returned real part cannot hit
        the iterate's pointwise fidelity when the mask is asymmetric:
        realness ties every frequency to its mirror.
    """
    kspace = np.asarray(kspace, dtype=np.complex128)
    mask = np.asarray(mask, dtype=bool)
    _check_same_shape(kspace, mask, "kspace vs mask")
    if not mask.any():
        raise EmptyMaskError("mask retains no frequency")

    mu, beta = params.mu, params.beta
    dims = dims_of(kspace)
    # Internally everything lives in the unshifted FFT layout; shift
    # once on the way in.
    mask_u = np.fft.ifftshift(mask)
    y = np.fft.ifftshift(np.where(mask, kspace, 0.0))
    symbol = np.fft.ifftshift(periodic_laplacian_symbol(dims))
    denom = beta * symbol + mu * mask_u
    # The symbol vanishes only at DC; if DC is unmeasured both operator
    # and right-hand side are zero there, and the component is pinned
    # to zero (minimal-norm completion).
    singular = denom == 0.0
    denom = np.where(singular, 1.0, denom)
    mu_y = mu * y

    u = np.fft.ifft2(y, norm="ortho")
    zeros = np.zeros(dims.shape, dtype=np.complex128)
    lam = GradientField(zeros, zeros)  # multipliers start at zero, as does w
    du = forward_diff(u)

    for iteration in range(params.iterations):
        w = shrink2(
            GradientField(du.dx + lam.dx / beta, du.dy + lam.dy / beta),
            1.0 / beta,
        )
        rhs_spatial = diff_adjoint(
            GradientField(beta * w.dx - lam.dx, beta * w.dy - lam.dy)
        )
        rhs_hat = np.fft.fft2(rhs_spatial, norm="ortho") + mu_y
        u_hat = np.where(singular, 0.0, rhs_hat / denom)
        u = np.fft.ifft2(u_hat, norm="ortho")
        du = forward_diff(u)
        lam = GradientField(
            lam.dx + beta * (du.dx - w.dx),
            lam.dy + beta * (du.dy - w.dy),
        )
        if collect is not None:
            collect.append(
                _iteration_diagnostics(
                    iteration, u, rhs_spatial, y, mask_u, symbol, params, kspace, mask
                )
            )
    return u.real.copy()


def _iteration_diagnostics(
    iteration, u, rhs_spatial, y, mask_u, symbol, params, kspace_centered, mask_centered
):
    """Diagnostics recomputed through image-space operator application,
    independent of the diagonal solve that produced ``u``."""
    mu, beta = params.mu, params.beta
    applied = beta * diff_adjoint(forward_diff(u)) + mu * np.fft.ifft2(
        mask_u * np.fft.fft2(u, norm="ortho"), norm="ortho"
    )
    rhs_image = rhs_spatial + mu * np.fft.ifft2(y, norm="ortho")
    rhs_norm = np.linalg.norm(rhs_image)
    residual = np.linalg.norm(applied - rhs_image)
    u_hat = np.fft.fft2(u, norm="ortho")
    deviation = np.abs(u_hat - y)[mask_u]
    return {
        "iteration": iteration,
        "u_step_residual": float(residual / rhs_norm) if rhs_norm > 0 else 0.0,
        "objective": objective_value(u.real, kspace_centered, mask_centered, params),
        "fidelity_rms": float(np.sqrt(np.mean(deviation**2))),
        "fidelity_max": float(deviation.max()),
    }


def objective_value(
    u: np.ndarray, kspace: np.ndarray, mask: np.ndarray, params: SolverParams
) -> float:
    """Diagnostic objective: total variation plus weighted data misfit.

    ``sum_p ||(D u)_p||_2 + (mu/2) * sum_{retained} |F(u) - kspace|^2``.
    The splitting iteration need not decrease this monotonically.
    """
    u = np.asarray(u, dtype=np.float64)
    kspace = np.asarray(kspace, dtype=np.complex128)
    mask = np.asarray(mask, dtype=bool)
    _check_same_shape(u, kspace, "image vs kspace")
    _check_same_shape(u, mask, "image vs mask")
    du = forward_diff(u)
    tv = float(np.sum(np.sqrt(du.dx**2 + du.dy**2)))
    u_hat = np.fft.fftshift(np.fft.fft2(u, norm="ortho"))
    misfit = np.abs(u_hat - kspace)[mask]
    return tv + 0.5 * params.mu * float(np.sum(misfit**2))


def map_ordered(fn, items, threads: int = 1) -> list:
    """Apply a pure function to items, preserving order.

    With ``threads > 1`` the calls run in a thread pool; results are
    returned in input order either way, so downstream accumulation is
    schedule-independent.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
