from fractions import Fraction

import numpy as np
import pytest
from django.test import SimpleTestCase
from hypothesis import given
from hypothesis import strategies as st

from codec.exceptions import ContractViolation, InfeasibleStepError, StructuralError
from codec.pwc import (
    compute_merge_stats,
    coset_decode,
    feasible_mask,
    feasible_shift_range,
    fixed_target_params,
    fixed_target_shift,
    fixed_target_step,
    pwc_apply,
    pwc_apply_doubled,
)

X_RANGE = range(-40, 41)


class MergeOperatorTests(SimpleTestCase):
    """Tests for the piecewise-constant merge operator"""

    def test_even_step(self):
        """floor((5 + 0) / 4) * 4 + 2 = 6"""
        self.assertEqual(pwc_apply(5, 4, 0), 6)

    def test_odd_step_gives_half(self):
        """Odd W lands on half-integers"""
        self.assertEqual(pwc_apply(0, 3, 1), Fraction(1, 2))

    def test_negative_input(self):
        """Floor division rounds toward minus infinity"""
        self.assertEqual(pwc_apply(-1, 4, 0), -2)

    def test_doubled_matches_exact(self):
        """The doubled integer form is twice the exact value"""
        for W in (1, 2, 3, 7, 8):
            for c in range(W):
                for x in range(-10, 11):
                    self.assertEqual(pwc_apply_doubled(x, W, c), 2 * pwc_apply(x, W, c))

    def test_step_one_is_identity_plus_half(self):
        """W = 1 maps x to x + 1/2"""
        self.assertEqual(pwc_apply(7, 1, 0), Fraction(15, 2))

    def test_bad_step(self):
        """W must be positive"""
        with self.assertRaises(ContractViolation):
            pwc_apply(0, 0, 0)


class MergeStatTests(SimpleTestCase):
    """Tests for merge statistics"""

    def test_example(self):
        """Spread and target distance per frequency"""
        stats = compute_merge_stats([[3, 0], [5, 1], [4, -2]])
        np.testing.assert_array_equal(stats.x_min, [3, -2])
        np.testing.assert_array_equal(stats.x_max, [5, 1])
        np.testing.assert_array_equal(stats.z_star, [2, 3])
        np.testing.assert_array_equal(stats.z_target, [2, 2])

    def test_frame_shaped_input(self):
        """(N+1, blocks, K) arrays reduce over the first axis"""
        x = np.random.default_rng(0).integers(-5, 5, size=(4, 6, 16))
        stats = compute_merge_stats(x)
        self.assertEqual(stats.z_star.shape, (6, 16))

    def test_needs_two_vectors(self):
        """A lone vector has nothing to merge"""
        with self.assertRaises(StructuralError):
            compute_merge_stats([[1, 2, 3]])

    def test_ragged_vectors(self):
        """Vectors must have one length"""
        with self.assertRaises(StructuralError):
            compute_merge_stats([[1, 2], [1, 2, 3]])


class FeasibleRangeTests(SimpleTestCase):
    """Tests for feasible shift ranges"""

    def test_count(self):
        """W - (x_max - x_min) shifts are feasible"""
        self.assertEqual(len(feasible_shift_range(3, 5, 4)), 2)
        self.assertEqual(len(feasible_shift_range(0, 0, 6)), 6)

    def test_wrapping_interval(self):
        """Ranges can wrap around W"""
        feasible = feasible_shift_range(3, 5, 4)
        np.testing.assert_array_equal(feasible.canonical(), [1, 2])
        self.assertIn(5, feasible)
        self.assertNotIn(0, feasible)

    def test_step_too_small(self):
        """W must exceed the spread"""
        with self.assertRaises(InfeasibleStepError):
            feasible_shift_range(0, 4, 4)
        with self.assertRaises(InfeasibleStepError):
            feasible_mask([0, 0], [1, 5], 4)


class FixedTargetTests(SimpleTestCase):
    """Tests for fixed-target parameters"""

    def test_step(self):
        """W = 2 Z + 2"""
        self.assertEqual(fixed_target_step(0), 2)
        self.assertEqual(fixed_target_step(3), 8)

    def test_odd_step_rejected(self):
        """Fixed-target merging needs an even W"""
        with self.assertRaises(ContractViolation):
            fixed_target_shift(3, 5)

    def test_reconstructs_target(self):
        """Every input within W/2 of X0 maps to X0"""
        X0, W = -7, 6
        c = fixed_target_params(X0, W)
        for x in range(X0 - W // 2, X0 + W // 2):
            self.assertEqual(pwc_apply(x, W, c), X0)


def _brute_force_mask(x_min, x_max, W):
    """Shifts under which every integer of [x_min, x_max] has one image"""
    xs = np.arange(x_min, x_max + 1)
    return np.array(
        [len(set(pwc_apply_doubled(xs, W, c).tolist())) == 1 for c in range(W)]
    )


def test_feasible_range_matches_enumeration():
    """Feasible ranges equal exhaustive enumeration over the whole grid"""
    for W in range(1, 33):
        x_mins, x_maxs, expected = [], [], []
        for x_min in X_RANGE:
            for spread in range(W):
                brute = _brute_force_mask(x_min, x_min + spread, W)
                found = feasible_shift_range(x_min, x_min + spread, W)
                np.testing.assert_array_equal(found.mask(), brute)
                assert len(found) == W - spread
                x_mins.append(x_min)
                x_maxs.append(x_min + spread)
                expected.append(brute)
        np.testing.assert_array_equal(feasible_mask(x_mins, x_maxs, W), np.array(expected))


def test_fixed_target_equals_coset_decode():
    """Fixed-target merging agrees with nearest-coset decoding"""
    for W in range(2, 33, 2):
        for X0 in X_RANGE:
            c = fixed_target_params(X0, W)
            xs = np.arange(X0 - W // 2, X0 + W // 2)
            merged = pwc_apply_doubled(xs, W, c)
            np.testing.assert_array_equal(merged, 2 * X0)
            for x in xs:
                assert coset_decode(int(x), X0 % W, W) == X0


def test_coset_decode_tie_goes_up():
    """Equidistant candidates resolve to the larger one"""
    assert coset_decode(2, 0, 4) == 4
    assert coset_decode(-2, 0, 4) == 0


def test_coset_tie_at_lower_endpoint():
    """The equidistant SI value at the bottom of the interval still merges onto X0"""
    for W in range(2, 33, 2):
        for X0 in X_RANGE:
            x = X0 - W // 2
            assert pwc_apply_doubled(x, W, fixed_target_params(X0, W)) == 2 * X0
            assert coset_decode(x, X0 % W, W) == X0


def test_coset_index_checked():
    with pytest.raises(ContractViolation):
        coset_decode(0, 4, 4)


@given(
    xs=st.lists(st.integers(-200, 200), min_size=2, max_size=8),
    extra=st.integers(1, 10),
    data=st.data(),
)
def test_feasible_shift_merges_everything(xs, extra, data):
    """Any feasible shift maps all SI q-coeffs to one value"""
    W = max(xs) - min(xs) + extra
    feasible = feasible_shift_range(min(xs), max(xs), W).canonical()
    c = data.draw(st.sampled_from(feasible.tolist()))
    assert len(set(pwc_apply_doubled(np.array(xs), W, c).tolist())) == 1
