import math

import numpy as np
import pytest

from reconbars import (
    GridDims,
    LineSet,
    SamplingPlan,
    SamplingScheme,
    default_num_draws,
    draw_bootstrap_sets,
    draw_sampling_set,
    fixed_subset,
    full_mask,
    leave_one_out,
    line_pixels,
    mask_from_set,
    round_half_away,
    rng_for,
)


def ray_pixels_naive(angle, m, n):
    """Scalar-loop ray rasterization, independent of the vectorized one."""
    r_max = math.hypot(m - m // 2, n - n // 2)
    pts = set()
    for step in range(int(math.floor(r_max / 0.5)) + 1):
        t = 0.5 * step
        row = _round_naive(t * math.sin(angle))
        col = _round_naive(t * math.cos(angle))
        if -(m // 2) <= row <= m - m // 2 - 1 and -(n // 2) <= col <= n - n // 2 - 1:
            pts.add((row, col))
    return pts


def _round_naive(x):
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


class TestRounding:
    def test_ties_away_from_zero(self):
        assert round_half_away(0.5) == 1
        assert round_half_away(-0.5) == -1
        assert round_half_away(2.5) == 3
        assert round_half_away(94.5) == 95
        assert round_half_away(1.4) == 1

    def test_elementwise(self):
        out = round_half_away(np.array([0.5, -1.5, 2.4]))
        assert out.tolist() == [1, -2, 2]


class TestDefaultNumDraws:
    def test_radial_stated_resolution(self):
        assert default_num_draws("radial", GridDims(378, 284)) == 132

    def test_horizontal_tie_rounds_up(self):
        # m/4 = 94.5: the tie resolves away from zero.
        assert default_num_draws("horizontal", GridDims(378, 284)) == 95

    def test_radial_double_density(self):
        assert default_num_draws("radial", GridDims(10, 10), "2x") == 8

    def test_horizontal_double_density_rounds_after_doubling(self):
        # round(m/2), not 2*round(m/4).
        assert default_num_draws("horizontal", GridDims(378, 284), "2x") == 189

    def test_bad_density(self):
        with pytest.raises(ValueError):
            default_num_draws("radial", GridDims(8, 8), "3x")


class TestFixedSubset:
    def test_radial_is_empty(self):
        assert fixed_subset("radial", GridDims(64, 64)) == ()
        assert fixed_subset("radial", GridDims(378, 284)) == ()

    def test_horizontal_band(self):
        rows = fixed_subset("horizontal", GridDims(378, 284))
        assert rows == tuple(range(-27, 28))  # round(sqrt(756)) = 27
        assert len(rows) == 55

    def test_small_grid_clips_to_index_range(self):
        rows = fixed_subset("horizontal", GridDims(8, 8))
        assert rows == tuple(range(-4, 4))  # round(sqrt(16)) = 4, top clipped


class TestLinePixels:
    def test_horizontal_row_zero(self):
        pts = line_pixels("horizontal", 0, GridDims(8, 6))
        assert pts == {(0, c) for c in range(-3, 3)}
        assert len(pts) == 6

    def test_horizontal_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            line_pixels("horizontal", 4, GridDims(8, 8))

    def test_ray_at_angle_zero_is_nonnegative_half_row(self):
        pts = line_pixels("radial", 0.0, GridDims(8, 8))
        assert pts == {(0, c) for c in range(0, 4)}

    def test_every_ray_contains_dc(self, rng):
        for angle in rng.uniform(0.0, 2 * np.pi, size=40):
            assert (0, 0) in line_pixels("radial", float(angle), GridDims(9, 13))

    def test_matches_naive_march(self, rng):
        for m, n in [(8, 8), (9, 13), (16, 10)]:
            for angle in rng.uniform(0.0, 2 * np.pi, size=25):
                assert line_pixels("radial", float(angle), GridDims(m, n)) == (
                    ray_pixels_naive(float(angle), m, n)
                )

    def test_opposite_rays_differ(self):
        a = line_pixels("radial", 0.0, GridDims(8, 8))
        b = line_pixels("radial", np.pi, GridDims(8, 8))
        assert a != b
        assert a & b == {(0, 0)}

    def test_angle_domain_enforced(self):
        with pytest.raises(ValueError):
            line_pixels("radial", -0.1, GridDims(8, 8))
        with pytest.raises(ValueError):
            line_pixels("radial", 2 * np.pi, GridDims(8, 8))


class TestDrawSamplingSet:
    def test_single_radial_draw(self):
        s = draw_sampling_set(SamplingPlan("radial", GridDims(8, 8), num_draws=1, seed=3))
        assert len(s.drawn) == 1
        assert s.fixed == ()
        assert 0.0 <= s.drawn[0] < 2 * np.pi

    def test_deterministic(self):
        plan = SamplingPlan("horizontal", GridDims(16, 16), num_draws=4, seed=11)
        assert draw_sampling_set(plan) == draw_sampling_set(plan)

    def test_dedup_bound(self):
        m = 16
        plan = SamplingPlan("horizontal", GridDims(m, m), num_draws=m, seed=2)
        s = draw_sampling_set(plan)
        assert s.num_lines <= len(s.fixed) + plan.num_draws
        assert s.num_lines <= m

    def test_fixed_subset_always_included(self):
        plan = SamplingPlan("horizontal", GridDims(64, 64), num_draws=5, seed=0)
        s = draw_sampling_set(plan)
        assert s.fixed == fixed_subset("horizontal", GridDims(64, 64))
        assert set(s.fixed) <= set(s.lines)

    def test_drawn_disjoint_from_fixed_and_sorted(self):
        plan = SamplingPlan("horizontal", GridDims(32, 32), num_draws=20, seed=5)
        s = draw_sampling_set(plan)
        assert not set(s.drawn) & set(s.fixed)
        assert list(s.drawn) == sorted(set(s.drawn))

    def test_draw_frequencies_uniform(self):
        # Pool single draws across seeds so deduplication cannot bias
        # the tally; every row should sit within 5 standard errors.
        m = 64
        counts = np.zeros(m)
        trials = 10_000
        for seed in range(trials):
            rng = rng_for(seed)
            row = rng.integers(-(m // 2), m - m // 2, size=1)[0]
            counts[row + m // 2] += 1
        p = 1.0 / m
        se = np.sqrt(trials * p * (1 - p))
        assert np.abs(counts - trials * p).max() < 5 * se

    def test_num_draws_validated(self):
        with pytest.raises(ValueError):
            SamplingPlan("radial", GridDims(8, 8), num_draws=0)


class TestMaskFromSet:
    def test_empty_set_all_false(self):
        s = LineSet(SamplingScheme.RADIAL, GridDims(8, 8))
        assert not mask_from_set(s).any()

    def test_union_is_idempotent(self):
        one = LineSet(SamplingScheme.RADIAL, GridDims(8, 8), drawn=(1.0,))
        two = LineSet(SamplingScheme.RADIAL, GridDims(8, 8), drawn=(1.0, 1.0))
        assert np.array_equal(mask_from_set(one), mask_from_set(two))

    def test_full_horizontal_set_is_all_true(self):
        dims = GridDims(8, 6)
        s = LineSet(
            SamplingScheme.HORIZONTAL, dims, drawn=tuple(int(r) for r in dims.row_freqs())
        )
        assert mask_from_set(s).all()
        assert np.array_equal(mask_from_set(s), full_mask(dims))

    def test_horizontal_mask_retains_fixed_band(self):
        dims = GridDims(64, 48)
        s = draw_sampling_set(SamplingPlan("horizontal", dims, num_draws=3, seed=9))
        mask = mask_from_set(s)
        band = round_half_away(np.sqrt(2.0 * dims.rows))
        for r in range(-band, band + 1):
            assert mask[dims.row_index(r)].all()

    def test_radial_mask_keeps_dc(self):
        dims = GridDims(16, 16)
        s = draw_sampling_set(SamplingPlan("radial", dims, num_draws=1, seed=4))
        assert mask_from_set(s)[dims.row_index(0), dims.col_index(0)]

    def test_monotone_in_the_line_set(self):
        dims = GridDims(16, 16)
        small = draw_sampling_set(SamplingPlan("radial", dims, num_draws=3, seed=8))
        big = LineSet(small.scheme, dims, drawn=small.drawn + (2.0, 4.0))
        assert np.all(mask_from_set(small) <= mask_from_set(big))


class TestLeaveOneOut:
    def test_two_drawn_lines(self):
        s = LineSet(SamplingScheme.RADIAL, GridDims(8, 8), drawn=(0.3, 1.7))
        pairs = leave_one_out(s)
        assert [line for line, _ in pairs] == [0.3, 1.7]
        assert pairs[0][1].drawn == (1.7,)
        assert pairs[1][1].drawn == (0.3,)

    def test_all_draws_in_fixed_gives_empty(self):
        s = LineSet(
            SamplingScheme.HORIZONTAL, GridDims(16, 16), fixed=(-1, 0, 1), drawn=(0, 1)
        )
        assert leave_one_out(s) == []

    def test_length_matches_removable(self):
        s = LineSet(
            SamplingScheme.HORIZONTAL,
            GridDims(32, 32),
            fixed=(0,),
            drawn=(-5, -2, 3, 7, 11),
        )
        assert len(leave_one_out(s)) == 5

    def test_fixed_lines_never_removed(self):
        s = LineSet(
            SamplingScheme.HORIZONTAL, GridDims(16, 16), fixed=(-1, 0, 1), drawn=(3, 5)
        )
        for _, reduced in leave_one_out(s):
            assert reduced.fixed == s.fixed

    def test_order_is_sorted(self):
        s = LineSet(SamplingScheme.RADIAL, GridDims(8, 8), drawn=(2.5, 0.1, 1.9))
        assert [line for line, _ in leave_one_out(s)] == [0.1, 1.9, 2.5]


class TestBootstrapSets:
    def test_k_sets_with_same_structure(self):
        plan = SamplingPlan("horizontal", GridDims(16, 16), num_draws=4, seed=1)
        sets = draw_bootstrap_sets(plan, 5, seed=77)
        assert len(sets) == 5
        for s in sets:
            assert s.fixed == fixed_subset("horizontal", GridDims(16, 16))
            assert len(s.drawn) <= 4

    def test_substreams_are_independent(self):
        plan = SamplingPlan("radial", GridDims(32, 32), num_draws=6, seed=1)
        sets = draw_bootstrap_sets(plan, 3, seed=5)
        assert sets[0].drawn != sets[1].drawn != sets[2].drawn

    def test_deterministic(self):
        plan = SamplingPlan("radial", GridDims(32, 32), num_draws=6, seed=1)
        assert draw_bootstrap_sets(plan, 4, seed=5) == draw_bootstrap_sets(plan, 4, seed=5)

    def test_plan_seed_not_consumed(self):
        a = SamplingPlan("radial", GridDims(32, 32), num_draws=6, seed=1)
        b = SamplingPlan("radial", GridDims(32, 32), num_draws=6, seed=2)
        assert draw_bootstrap_sets(a, 2, seed=9) == draw_bootstrap_sets(b, 2, seed=9)

    def test_k_validated(self):
        plan = SamplingPlan("radial", GridDims(8, 8), num_draws=2, seed=0)
        with pytest.raises(ValueError):
            draw_bootstrap_sets(plan, 0, seed=1)


class TestSerialization:
    def test_json_round_trip_radial(self):
        s = draw_sampling_set(SamplingPlan("radial", GridDims(16, 12), num_draws=5, seed=3))
        assert LineSet.from_json(s.to_json()) == s

    def test_json_round_trip_horizontal(self):
        s = draw_sampling_set(
            SamplingPlan("horizontal", GridDims(16, 12), num_draws=5, seed=3)
        )
        assert LineSet.from_json(s.to_json()) == s

    def test_plan_default_factory(self):
        plan = SamplingPlan.with_default_draws("radial", GridDims(64, 64), seed=6)
        assert plan.num_draws == 26
        assert plan.density == "1x"
