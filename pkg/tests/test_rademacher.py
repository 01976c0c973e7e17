import math

import numpy as np
import pytest

from kkmlab import (
    coordinate_rad,
    finite_class_rad,
    khintchine_check,
    lower_bound_construction,
    signed_scatter_supremum,
    theorem_bound_value,
)
from oracle_utils import grid_supremum

from kkmlab.errors import (
    EnumerationTooLarge,
    InvalidLogArgument,
    NormViolation,
    NotDivisible,
)


class TestClosedFormSupremum:
    def test_mixed_signs_on_basis_pair(self):
        data = np.eye(2)
        val = signed_scatter_supremum(data, np.array([1.0, -1.0]))
        assert val == pytest.approx(2.0 * math.sqrt(2.0), abs=1e-12)
        assert grid_supremum(data, np.array([1.0, -1.0])) == pytest.approx(val, abs=1e-3)

    def test_all_negative_on_basis_pair(self):
        data = np.eye(2)
        val = signed_scatter_supremum(data, np.array([-1.0, -1.0]))
        assert val == pytest.approx(-1.0, abs=1e-12)
        assert grid_supremum(data, np.array([-1.0, -1.0])) == pytest.approx(val, abs=1e-3)

    def test_degenerate_negative_sum_zero_vector(self):
        # s < 0 with v = 0: supremum 0 at c = 0, so total is just the base
        data = np.array([[1.0, 0.0], [-1.0, 0.0]])
        sigma = np.array([-1.0, -1.0])
        assert signed_scatter_supremum(data, sigma) == pytest.approx(-2.0, abs=1e-12)
        assert grid_supremum(data, sigma) == pytest.approx(-2.0, abs=1e-3)

    def test_matches_grid_oracle_on_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            d = int(rng.integers(1, 5))
            data = rng.normal(size=(n, d))
            data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
            sigma = 2.0 * rng.integers(0, 2, size=n) - 1.0
            closed = signed_scatter_supremum(data, sigma)
            assert grid_supremum(data, sigma) == pytest.approx(closed, abs=1e-3)


class TestCoordinateRad:
    def test_norm_violation(self):
        with pytest.raises(NormViolation):
            coordinate_rad(np.array([[2.0, 0.0]]))

    def test_exact_auto_selected_for_small_n(self):
        est = coordinate_rad(np.eye(3))
        assert est.exact and est.std_error == 0.0 and est.trials == 8

    def test_exact_value_on_basis_pair(self):
        # mean over the four sign patterns: (4 + 2 sqrt 2) + 2 sqrt 2
        # + 2 sqrt 2 + (-1), divided by 4
        est = coordinate_rad(np.eye(2))
        expect = (3.0 + 6.0 * math.sqrt(2.0)) / 4.0
        assert est.value == pytest.approx(expect, abs=1e-12)

    def test_monte_carlo_agrees_with_exact(self):
        rng = np.random.default_rng(1)
        data = rng.normal(size=(10, 3))
        data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
        exact = coordinate_rad(data)
        mc = coordinate_rad(data, trials=20_000, rng=rng, exact=False)
        assert not mc.exact and mc.std_error > 0
        assert abs(mc.value - exact.value) <= 5.0 * mc.std_error

    def test_three_sqrt_n_bound(self):
        rng = np.random.default_rng(2)
        for n in (4, 9, 16):
            data = rng.normal(size=(n, 4))
            data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
            est = coordinate_rad(data, trials=10_000, rng=rng)
            assert est.value <= 3.0 * math.sqrt(n) + 3.0 * est.std_error


class TestLowerBoundConstruction:
    def test_k2_n4_pattern(self):
        inst = lower_bound_construction(2, 4)
        expect = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        assert np.array_equal(inst.data, expect)
        assert inst.class_size == 4

    def test_k1_n3(self):
        inst = lower_bound_construction(1, 3)
        assert np.array_equal(inst.data, np.ones((3, 1)))
        sets = inst.center_sets()
        assert sets.shape == (2, 1, 1)
        assert sorted(s.item() for s in sets[:, 0, 0]) == [-1.0, 1.0]

    def test_not_divisible(self):
        with pytest.raises(NotDivisible):
            lower_bound_construction(3, 5)

    def test_center_sets_cover_all_sign_patterns(self):
        inst = lower_bound_construction(3, 6)
        sets = inst.center_sets()
        assert sets.shape == (8, 3, 3)
        signs = {tuple(np.diagonal(s).astype(int)) for s in sets}
        assert len(signs) == 8


class TestFiniteClassRad:
    def test_single_member_class_is_exactly_zero(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=(6, 2))
        data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
        centers = rng.normal(size=(1, 2, 2))
        est = finite_class_rad(data, centers, exact=True)
        assert est.value == 0.0
        assert est.exact

    def test_construction_k2_n2_exact_value(self):
        inst = lower_bound_construction(2, 2)
        est = finite_class_rad(inst.data, inst.center_sets(), exact=True)
        assert est.value == pytest.approx(2.0, abs=1e-12)
        assert est.value >= math.sqrt(2.0 * 2.0 / 2.0)

    def test_construction_k2_n4_meets_lower_bound(self):
        inst = lower_bound_construction(2, 4)
        est = finite_class_rad(inst.data, inst.center_sets(), exact=True)
        assert est.value >= math.sqrt(2.0 * 4.0 / 2.0)

    def test_exact_matches_direct_enumeration(self):
        # independent oracle: loop over all sign vectors and class members
        from itertools import product

        rng = np.random.default_rng(4)
        data = rng.normal(size=(5, 2))
        data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
        centers = rng.normal(size=(3, 2, 2))
        est = finite_class_rad(data, centers, exact=True)
        total = 0.0
        for signs in product((1.0, -1.0), repeat=5):
            best = -np.inf
            for c in centers:
                dmin = np.min(
                    np.sum((data[:, None, :] - c[None, :, :]) ** 2, axis=2), axis=1
                )
                best = max(best, float(np.dot(signs, dmin)))
            total += best
        assert est.value == pytest.approx(total / 32.0, abs=1e-12)

    def test_superclass_dominates_subclass(self):
        rng = np.random.default_rng(5)
        data = rng.normal(size=(6, 2))
        data /= np.maximum(np.linalg.norm(data, axis=1, keepdims=True), 1.0)
        centers = rng.normal(size=(5, 2, 2))
        small = finite_class_rad(data, centers[:2], exact=True)
        big = finite_class_rad(data, centers, exact=True)
        assert big.value >= small.value - 1e-12

    def test_monte_carlo_mode(self):
        inst = lower_bound_construction(2, 8)
        exact = finite_class_rad(inst.data, inst.center_sets(), exact=True)
        mc = finite_class_rad(
            inst.data, inst.center_sets(), trials=20_000, rng=np.random.default_rng(6)
        )
        assert abs(mc.value - exact.value) <= 5.0 * mc.std_error

    def test_enumeration_guard(self):
        data = np.zeros((21, 1))
        with pytest.raises(EnumerationTooLarge):
            finite_class_rad(data, np.zeros((1, 1, 1)), exact=True)


class TestKhintchine:
    def test_block_one(self):
        res = khintchine_check(1)
        assert res.lhs == 0.5
        assert res.rhs == pytest.approx(math.sqrt(1 / 8), abs=1e-15)
        assert res.lhs >= res.rhs

    def test_block_two_equality(self):
        res = khintchine_check(2)
        assert res.lhs == 0.5 and res.rhs == 0.5

    def test_block_four(self):
        res = khintchine_check(4)
        assert res.lhs == 0.75
        assert res.lhs >= res.rhs

    def test_all_blocks_to_twenty(self):
        for block in range(1, 21):
            res = khintchine_check(block)
            assert res.lhs >= res.rhs

    def test_monte_carlo_beyond_twenty(self):
        res = khintchine_check(100, trials=20_000, rng=np.random.default_rng(7))
        # E|S| ~ sqrt(2 b / pi); half of it must beat sqrt(b/8)
        assert res.lhs >= res.rhs
        assert res.lhs == pytest.approx(0.5 * math.sqrt(2 * 100 / math.pi), rel=0.05)


class TestTheoremBoundValue:
    def test_unit_log_point(self):
        n = 100.0
        val = theorem_bound_value(1, 100, n / math.e, delta_exponent=0.3, c_const=1.0)
        assert val == pytest.approx(n / math.e, abs=1e-9)

    def test_sqrt_k_scaling(self):
        v1 = theorem_bound_value(1, 256, 10.0, 0.01, 1.0)
        v4 = theorem_bound_value(4, 256, 10.0, 0.01, 1.0)
        assert v4 == pytest.approx(2.0 * v1, abs=1e-9)

    def test_formula_point(self):
        expect = 2.0 * 48.0 * math.log(16.0 / 3.0) ** 1.51
        assert theorem_bound_value(4, 256, 48.0, 0.01, 1.0) == pytest.approx(expect, abs=1e-9)

    def test_invalid_log_argument(self):
        with pytest.raises(InvalidLogArgument):
            theorem_bound_value(2, 10, 10.0, 0.0, 1.0)
        with pytest.raises(InvalidLogArgument):
            theorem_bound_value(2, 10, 0.0, 0.0, 1.0)


def test_min_is_one_lipschitz_in_sup_norm():
    rng = np.random.default_rng(8)
    for _ in range(200):
        k = int(rng.integers(1, 8))
        u = rng.normal(size=k) * rng.uniform(0.1, 100)
        v = rng.normal(size=k) * rng.uniform(0.1, 100)
        assert abs(np.min(u) - np.min(v)) <= np.max(np.abs(u - v))
