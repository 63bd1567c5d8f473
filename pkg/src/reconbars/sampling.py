"""Retained-line sampling of the frequency grid.

A measurement index is a *line*: either a ray leaving the origin of the
centered grid at some angle (radial scheme), or one full row of the
grid (horizontal scheme).  A sampling set ``S`` is the union of a fixed
low-frequency subset ``T`` (empty for radial, a band of rows around DC
for horizontal) and a number of uniformly random draws.  This module
generates those sets, expands them to boolean pixel masks, and produces
the derived families the error estimators consume: leave-one-out
reductions of ``S`` and independent resampled sets ``R_1..R_k``.

Draw layout (a published contract, relied on for replay): a set's
draws are one generator call on its PCG64 stream -- ``uniform(0, 2*pi,
num_draws)`` angles for radial, ``integers`` over the centered row
range for horizontal -- after which they are deduplicated, purged of
fixed lines, and sorted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .grids import GridDims, as_dims
from .seeds import rng_for


class SamplingScheme(str, Enum):
    RADIAL = "radial"
    HORIZONTAL = "horizontal"


#: A line identifier: a float angle in [0, 2*pi) for the radial scheme,
#: or an int centered row frequency for the horizontal scheme.
LineId = float | int

_DENSITY_MULTIPLIER = {"1x": 1, "2x": 2}

# Ray rasterization marches from the origin in steps of half a pixel;
# at grid resolutions this step size cannot skip over any 8-connected
# pixel the ray crosses.
_RAY_STEP = 0.5


def round_half_away(x):
    """Round to the nearest integer, resolving .5 ties away from zero.

    Works elementwise on arrays; scalars come back as Python ints.
    This is the single rounding rule used for draw counts, the fixed
    low-frequency band, and ray rasterization.
    """
    x = np.asarray(x, dtype=np.float64)
    rounded = np.trunc(x + np.copysign(0.5, x)).astype(np.int64)
    if rounded.ndim == 0:
        return int(rounded)
    return rounded


def default_num_draws(scheme, dims, density: str = "1x") -> int:
    """Default number of random line draws for a scheme and grid size.

    Radial draws ``(m + n) / 5`` angles and horizontal draws ``m / 4``
    rows, rounded to the nearest integer; the "2x" density doubles the
    quantity before rounding.
    """
    scheme = SamplingScheme(scheme)
    dims = as_dims(dims)
    try:
        mult = _DENSITY_MULTIPLIER[density]
    except KeyError:
        raise ValueError(f"density must be '1x' or '2x', got {density!r}") from None
    if scheme is SamplingScheme.RADIAL:
        return round_half_away(mult * (dims.rows + dims.cols) / 5.0)
    return round_half_away(mult * dims.rows / 4.0)


def fixed_subset(scheme, dims) -> tuple:
    """The always-retained line set ``T``.

    Empty for the radial scheme.  For the horizontal scheme it is every
    row ``r`` with ``|r| <= round(sqrt(2m))``, clipped to the valid
    centered row range (the clip only matters for very small grids).
    """
    scheme = SamplingScheme(scheme)
    dims = as_dims(dims)
    if scheme is SamplingScheme.RADIAL:
        return ()
    band = round_half_away(np.sqrt(2.0 * dims.rows))
    lo = max(-band, -(dims.rows // 2))
    hi = min(band, dims.rows - dims.rows // 2 - 1)
    return tuple(range(lo, hi + 1))


def line_pixels(scheme, line, dims) -> set:
    """Frequency coordinates ``(row, col)`` covered by one line.

    A horizontal line is all ``n`` pixels of its row.  A radial line is
    rasterized by marching ``t`` from 0 to the grid's corner radius in
    half-pixel steps, rounding ``(t*sin(angle), t*cos(angle))`` to the
    nearest grid point and dropping points that land outside the grid.
    Every radial line contains the DC pixel (the ``t = 0`` step).
    """
    scheme = SamplingScheme(scheme)
    dims = as_dims(dims)
    if scheme is SamplingScheme.HORIZONTAL:
        row = int(line)
        if not -(dims.rows // 2) <= row <= dims.rows - dims.rows // 2 - 1:
            raise ValueError(f"row {row} outside the centered range for m={dims.rows}")
        return {(row, int(c)) for c in dims.col_freqs()}

    angle = float(line)
    if not 0.0 <= angle < 2.0 * np.pi:
        raise ValueError(f"angle must lie in [0, 2*pi), got {angle}")
    half_m = dims.rows - dims.rows // 2
    half_n = dims.cols - dims.cols // 2
    r_max = np.hypot(half_m, half_n)
    t = _RAY_STEP * np.arange(int(np.floor(r_max / _RAY_STEP)) + 1)
    rows = round_half_away(t * np.sin(angle))
    cols = round_half_away(t * np.cos(angle))
    inside = (
        (rows >= -(dims.rows // 2))
        & (rows <= dims.rows - dims.rows // 2 - 1)
        & (cols >= -(dims.cols // 2))
        & (cols <= dims.cols - dims.cols // 2 - 1)
    )
    return set(zip(rows[inside].tolist(), cols[inside].tolist()))


@dataclass(frozen=True)
class LineSet:
    """A concrete sampling set ``S = fixed ∪ drawn``.

    ``fixed`` is the scheme's always-retained subset ``T``; ``drawn``
    holds the deduplicated random draws, sorted, with any member of
    ``fixed`` removed.  ``seed`` records the draw seed when the set came
    from :func:`draw_sampling_set`, purely as provenance.
    """

    scheme: SamplingScheme
    dims: GridDims
    fixed: tuple = ()
    drawn: tuple = ()
    seed: int | None = None

    @property
    def lines(self) -> tuple:
        """All distinct lines of ``S``, fixed first."""
        fixed_set = set(self.fixed)
        return self.fixed + tuple(l for l in self.drawn if l not in fixed_set)

    @property
    def num_lines(self) -> int:
        return len(self.lines)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "dims": [self.dims.rows, self.dims.cols],
            "fixed": list(self.fixed),
            "drawn": list(self.drawn),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LineSet":
        scheme = SamplingScheme(doc["scheme"])
        dims = GridDims(*doc["dims"])
        cast = float if scheme is SamplingScheme.RADIAL else int
        return cls(
            scheme=scheme,
            dims=dims,
            fixed=tuple(cast(x) for x in doc["fixed"]),
            drawn=tuple(cast(x) for x in doc["drawn"]),
            seed=None if doc.get("seed") is None else int(doc["seed"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LineSet":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SamplingPlan:
    """How to draw a sampling set: scheme, grid, draw count, and seed.

    ``density`` records whether ``num_draws`` came from the regular or
    the doubled ("2x") default; it is provenance, not a multiplier
    applied on top of ``num_draws``.
    """

    scheme: SamplingScheme
    dims: GridDims
    num_draws: int
    density: str = "1x"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "scheme", SamplingScheme(self.scheme))
        object.__setattr__(self, "dims", as_dims(self.dims))
        if self.num_draws < 1:
            raise ValueError(f"num_draws must be >= 1, got {self.num_draws}")
        if self.density not in _DENSITY_MULTIPLIER:
            raise ValueError(f"density must be '1x' or '2x', got {self.density!r}")

    @classmethod
    def with_default_draws(cls, scheme, dims, density: str = "1x", seed: int = 0):
        """Plan with the scheme's default draw count for this grid."""
        return cls(
            scheme=SamplingScheme(scheme),
            dims=as_dims(dims),
            num_draws=default_num_draws(scheme, dims, density),
            density=density,
            seed=seed,
        )


def _draw_lines(rng: np.random.Generator, scheme: SamplingScheme, dims: GridDims, count: int):
    """One fixed-layout batch of ``count`` i.i.d. line draws."""
    if scheme is SamplingScheme.RADIAL:
        return [float(a) for a in rng.uniform(0.0, 2.0 * np.pi, size=count)]
    lo = -(dims.rows // 2)
    hi = dims.rows - dims.rows // 2  # exclusive
    return [int(r) for r in rng.integers(lo, hi, size=count)]


def _assemble(scheme: SamplingScheme, dims: GridDims, raw_draws, seed) -> LineSet:
    fixed = fixed_subset(scheme, dims)
    fixed_set = set(fixed)
    drawn = tuple(sorted(set(raw_draws) - fixed_set))
    return LineSet(scheme=scheme, dims=dims, fixed=fixed, drawn=drawn, seed=seed)


def draw_sampling_set(plan: SamplingPlan) -> LineSet:
    """Draw a sampling set per the plan, deterministically from its seed.

    The ``num_draws`` i.i.d. draws are deduplicated (and deduplicated
    against the fixed subset), so the effective line count can be below
    ``len(fixed) + num_draws``.
    """
    rng = rng_for(plan.seed)
    raw = _draw_lines(rng, plan.scheme, plan.dims, plan.num_draws)
    return _assemble(plan.scheme, plan.dims, raw, plan.seed)


def mask_from_set(line_set: LineSet) -> np.ndarray:
    """Boolean retained-frequency mask: the union of all line pixels.

    The mask uses the centered layout; ``mask[i, j]`` covers frequency
    ``(i - m//2, j - n//2)``.
    """
    dims = line_set.dims
    mask = np.zeros(dims.shape, dtype=bool)
    for line in line_set.lines:
        for row, col in line_pixels(line_set.scheme, line, dims):
            mask[dims.row_index(row), dims.col_index(col)] = True
    return mask


def full_mask(dims) -> np.ndarray:
    """Mask retaining every frequency of the grid."""
    return np.ones(as_dims(dims).shape, dtype=bool)


def leave_one_out(line_set: LineSet) -> list:
    """All single-line reductions of ``S`` that keep the fixed subset.

    Returns ``(removed, reduced)`` pairs, one per line of
    ``drawn \\ fixed`` in sorted order, where ``reduced`` is the set
    with exactly that line removed.  Fixed lines are never removed; a
    set whose draws all landed in the fixed subset yields an empty list.
    """
    removable = sorted(set(line_set.drawn) - set(line_set.fixed))
    out = []
    for line in removable:
        reduced = replace(
            line_set, drawn=tuple(l for l in line_set.drawn if l != line)
        )
        out.append((line, reduced))
    return out


def draw_bootstrap_sets(plan: SamplingPlan, k: int, seed: int) -> list:
    """``k`` independent sampling sets drawn exactly like the original.

    Resample ``j`` (0-based) uses the generator at spawn-key path
    ``(j,)`` of ``seed``, so the sets are mutually independent and each
    is individually re-derivable.  The plan's own seed is not used.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sets = []
    for j in range(k):
        rng = rng_for(seed, j)
        raw = _draw_lines(rng, plan.scheme, plan.dims, plan.num_draws)
        sets.append(_assemble(plan.scheme, plan.dims, raw, None))
    return sets
