"""Resampling error-bar images for masked-frequency reconstructions.

Given measurements ``x`` and the line set ``S`` they were reconstructed
from, two estimators produce full signed images gauging the pixelwise
reconstruction error without access to ground truth:

* :func:`jackknife_map` sums doubled leave-one-out differences,
  ``2c * sum_i (recon(x, S minus line i) - recon(x, S))`` over every
  removable (non-fixed) line;
* :func:`bootstrap_map` synthesizes full-grid data from the
  reconstruction, redraws ``k`` hypothetical line sets the same way
  ``S`` was drawn, and scales the mean replicate deviation by 3.

Both accept any reconstruction operator with the signature
``op(kspace, mask, params) -> image``; the default is the TV solver.
Replicates may be computed in parallel, but accumulation always runs
in a fixed order with compensated summation, so results are identical
under any schedule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateTrainingError,
    EmptyStackError,
    EmptySumWarning,
    PlanMismatchError,
)
from .kspace import forward_transform
from .sampling import (
    LineSet,
    SamplingPlan,
    draw_bootstrap_sets,
    full_mask,
    leave_one_out,
    mask_from_set,
)
from .solver import SolverParams, map_ordered, reconstruct

# The estimator scale factors, fixed by construction.  The jackknife's
# opt-in calibration constant multiplies its factor; the bootstrap is
# never calibrated.
JACKKNIFE_FACTOR = 2.0
BOOTSTRAP_FACTOR = 3.0


@dataclass(frozen=True)
class JackknifeConfig:
    """Leave-one-out estimator settings; the default calibration of 1
    is found to need no adjustment in practice."""

    calibration: float = 1.0

    def __post_init__(self):
        if self.calibration <= 0:
            raise ValueError(f"calibration must be > 0, got {self.calibration}")


class FullReconMode(str, Enum):
    """How the bootstrap obtains its full-grid reference reconstruction:
    ``SOLVE`` runs the operator on the synthesized data with the full
    mask, ``SHORTCUT`` reuses the base reconstruction (one solve fewer;
    the two agree to solver accuracy at the default fidelity weight)."""

    SOLVE = "solve"
    SHORTCUT = "shortcut"


@dataclass(frozen=True)
class BootstrapConfig:
    """Resampled-measurement estimator settings.

    ``seed`` may be left ``None`` when a caller (e.g. the experiment
    harness) derives it from a master seed before use.
    """

    resamples: int = 1000
    seed: int | None = None
    full_recon_mode: FullReconMode = FullReconMode.SOLVE

    def __post_init__(self):
        if self.resamples < 1:
            raise ValueError(f"resamples must be >= 1, got {self.resamples}")
        object.__setattr__(
            self, "full_recon_mode", FullReconMode(self.full_recon_mode)
        )


class _CompensatedSum:
    """Elementwise Neumaier (compensated) summation over arrays.

    Keeps a running error term so long accumulations lose no precision
    and repeated identical terms sum exactly; the add order is the only
    thing that matters, and callers fix it.
    """

    def __init__(self, shape):
        self._sum = np.zeros(shape)
        self._comp = np.zeros(shape)

    def add(self, values: np.ndarray):
        total = self._sum + values
        swap = np.abs(self._sum) >= np.abs(values)
        self._comp += np.where(
            swap,
            (self._sum - total) + values,
            (values - total) + self._sum,
        )
        self._sum = total

    def total(self) -> np.ndarray:
        return self._sum + self._comp


def jackknife_map(
    kspace: np.ndarray,
    line_set: LineSet,
    params: SolverParams = SolverParams(),
    config: JackknifeConfig = JackknifeConfig(),
    *,
    reconstruct_fn=None,
    threads: int = 1,
) -> np.ndarray:
    """Leave-one-out error-bar image for the reconstruction from ``S``.

    Needs ``|S \\ T| + 1`` reconstructions.  If every line of ``S`` is
    fixed there is nothing to leave out: the estimator warns and returns
    the all-zero map (the sum over an empty set).

    Parameters
    ----------
    kspace : (m, n) complex ndarray
        Measured data, centered layout.
    line_set : LineSet
        The sampling set the base reconstruction uses.
    params : SolverParams
        Passed through to the reconstruction operator.
    config : JackknifeConfig
    reconstruct_fn : callable, optional
        ``op(kspace, mask, params) -> image``; defaults to the TV solver.
    threads : int
        Worker cap for the replicate reconstructions; the result does
        not depend on it.
    """
    op = reconstruct_fn if reconstruct_fn is not None else reconstruct
    base = op(kspace, mask_from_set(line_set), params)
    pairs = leave_one_out(line_set)
    if not pairs:
        warnings.warn(
            "no removable lines (all draws landed in the fixed subset); "
            "jackknife map is identically zero",
            EmptySumWarning,
            stacklevel=2,
        )
        return np.zeros_like(base)
    replicas = map_ordered(
        lambda reduced: op(kspace, mask_from_set(reduced), params),
        [reduced for _, reduced in pairs],
        threads=threads,
    )
    acc = _CompensatedSum(base.shape)
    for replica in replicas:
        acc.add(replica - base)
    return (JACKKNIFE_FACTOR * config.calibration) * acc.total()


def synthesize_full_data(recon: np.ndarray) -> np.ndarray:
    """Full-grid frequency data consistent with a reconstruction.

    Returns the forward transform of the reconstruction: at the default
    fidelity weight the solver pins every measured frequency, so
    reconstructing this data on the full grid reproduces the input
    image to solver accuracy.  That consistency is the defining
    property, and is what :class:`FullReconMode.SOLVE` re-verifies.
    """
    return forward_transform(recon)


def bootstrap_map(
    kspace: np.ndarray,
    line_set: LineSet,
    plan: SamplingPlan,
    params: SolverParams = SolverParams(),
    config: BootstrapConfig = BootstrapConfig(),
    *,
    reconstruct_fn=None,
    resample_sets: list | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Resampled-measurement error-bar image.

    Reconstructs from ``S``, synthesizes full-grid data from the
    result, redraws ``k`` line sets per ``plan`` (same draw count and
    fixed subset as ``S``), and returns ``3/k`` times the accumulated
    deviation of each replicate reconstruction from the full-grid one.
    Needs ``k + 2`` reconstructions (``k + 1`` in shortcut mode).

    ``plan`` must describe the same scheme and grid as ``line_set``;
    its draw count is taken at face value rather than inferred from
    ``len(S)``, which deduplication makes an underestimate.

    ``resample_sets`` substitutes explicit line sets for the seeded
    draws (a determinism and testing hook); otherwise ``config.seed``
    must be set.
    """
    if plan.scheme is not line_set.scheme or plan.dims != line_set.dims:
        raise PlanMismatchError(
            f"plan is {plan.scheme.value} on {plan.dims.shape}, line set is "
            f"{line_set.scheme.value} on {line_set.dims.shape}"
        )
    op = reconstruct_fn if reconstruct_fn is not None else reconstruct
    base = op(kspace, mask_from_set(line_set), params)
    synthesized = synthesize_full_data(base)
    if config.full_recon_mode is FullReconMode.SOLVE:
        full = op(synthesized, full_mask(line_set.dims), params)
    else:
        full = base
    if resample_sets is None:
        if config.seed is None:
            raise ValueError("config.seed is required when resample_sets is not given")
        resample_sets = draw_bootstrap_sets(plan, config.resamples, config.seed)
    replicas = map_ordered(
        lambda s: op(synthesized, mask_from_set(s), params),
        resample_sets,
        threads=threads,
    )
    acc = _CompensatedSum(base.shape)
    for replica in replicas:
        acc.add(replica - full)
    return (BOOTSTRAP_FACTOR / len(resample_sets)) * acc.total()


@dataclass
class ModeStack:
    """Principal error modes: unit-norm maps with their singular values,
    ordered by non-increasing singular value."""

    singular_values: np.ndarray  # (r,)
    modes: np.ndarray  # (r, m, n)

    def __len__(self) -> int:
        return len(self.singular_values)

    def __iter__(self):
        return iter(zip(self.singular_values, self.modes))


def error_modes(differences, top_r: int) -> ModeStack:
    """Principal component analysis of a family of difference maps.

    The inputs are the per-replicate differences either estimator sums
    (leave-one-out or resampled); this decomposes the whole space of
    error shapes they span, beyond the single summed map.  The stack is
    centered by its mean map, and the top ``top_r`` right singular
    vectors of the (replicates x pixels) matrix come back as unit-norm
    maps.  Mode signs are canonicalized so the entry of largest
    magnitude is positive.
    """
    maps = [np.asarray(d, dtype=np.float64) for d in differences]
    if not maps:
        raise EmptyStackError("need at least one difference map")
    if top_r < 1:
        raise ValueError(f"top_r must be >= 1, got {top_r}")
    shape = maps[0].shape
    for d in maps:
        if d.shape != shape:
            raise EmptyStackError(f"difference maps disagree in shape: {d.shape} vs {shape}")
    stack = np.stack([d.ravel() for d in maps])
    stack = stack - stack.mean(axis=0)
    _, singular_values, vt = np.linalg.svd(stack, full_matrices=False)
    r = min(top_r, vt.shape[0])
    modes = vt[:r]
    for i in range(r):
        anchor = np.argmax(np.abs(modes[i]))
        if modes[i][anchor] < 0:
            modes[i] = -modes[i]
    return ModeStack(
        singular_values=singular_values[:r].copy(),
        modes=modes.reshape(r, *shape),
    )


def calibrate(training) -> float:
    """Least-squares scale matching estimated to actual error sizes.

    Over pairs ``(actual, estimated)`` this minimizes
    ``sum (||actual|| - c * ||estimated||)^2``, giving
    ``c = sum(a*b) / sum(b*b)`` with ``a = ||actual||_2`` and
    ``b = ||estimated||_2``.  Opt-in: the default calibration of 1 is
    already a good match, so nothing in the pipeline calls this
    implicitly.
    """
    pairs = list(training)
    if not pairs:
        raise DegenerateTrainingError("empty training set")
    a = []
    b = []
    for actual, estimated in pairs:
        actual = np.asarray(actual, dtype=np.float64)
        estimated = np.asarray(estimated, dtype=np.float64)
        if actual.shape != estimated.shape:
            raise DegenerateTrainingError(
                f"paired maps disagree in shape: {actual.shape} vs {estimated.shape}"
            )
        a.append(np.linalg.norm(actual))
        b.append(np.linalg.norm(estimated))
    denom = float(np.dot(b, b))
    if denom == 0.0:
        raise DegenerateTrainingError("every estimated map has zero norm")
    return float(np.dot(a, b) / denom)
