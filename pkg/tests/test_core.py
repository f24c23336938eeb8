import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqprox import bench
from eqprox.core import (
    AffineSubspace,
    DimensionError,
    EquilibriumProblem,
    Interval,
    WholeSpace,
    as_point,
    eval_bifunction,
    identity_a,
    identity_b,
    identity_c,
    identity_holds,
    membership_residual,
)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
coef = st.floats(min_value=-2.0, max_value=2.0)


def vectors(dim):
    return st.lists(finite, min_size=dim, max_size=dim).map(np.array)


class TestAsPoint:
    def test_scalar_becomes_vector(self):
        assert as_point(3.0).shape == (1,)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            as_point([1.0, 2.0], dim=3)

    @pytest.mark.parametrize("bad", [[np.nan], [1.0, np.inf]])
    def test_non_finite(self, bad):
        with pytest.raises(ValueError):
            as_point(bad)


class TestFeasibleSets:
    def test_whole_space(self):
        assert membership_residual(WholeSpace(2), [1e6, -3.0]) == 0.0

    @pytest.mark.parametrize("x,expected", [(79.2, 0.0), (105.0, 5.0), (-2.0, 2.0)])
    def test_interval_residual(self, x, expected):
        assert membership_residual(Interval(0, 100), [x]) == pytest.approx(expected)

    def test_interval_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            Interval(1.0, 1.0)
        with pytest.raises(ValueError):
            Interval(0.0, math.inf)

    def test_unbounded_interval_has_no_bracket(self):
        assert Interval(0.0, math.inf, allow_unbounded=True).bracket is None

    def test_affine_projection_lands_on_set(self, rng):
        s = AffineSubspace([[1.0, 1.0, 0.0]], [2.0])
        for x in rng.normal(size=(20, 3)):
            assert s.residual(s.project(x)) <= 1e-10
        for x in s.sample(rng, 10):
            assert s.residual(x) <= 1e-8

    def test_affine_inconsistent(self):
        with pytest.raises(ValueError):
            AffineSubspace([[1.0, 0.0], [1.0, 0.0]], [0.0, 1.0])


class TestEquilibriumProblem:
    def test_linear_monotone_value(self):
        assert eval_bifunction(bench.build_linear_monotone(), [2.0], [5.0]) == 6.0

    def test_max_type_value(self):
        p = bench.build_max_type()
        assert eval_bifunction(p, [0.0], [99.0]) == pytest.approx(2 * math.sqrt(99) - 2 * 9702)
        assert eval_bifunction(p, [123.4], [123.4]) == 0.0

    def test_diagonal_violation_rejected(self):
        with pytest.raises(ValueError, match="diagonal"):
            EquilibriumProblem(f=lambda x, y: 1.0, feasible_set=WholeSpace(1), eta=1.0, gamma=1.0)

    @pytest.mark.parametrize("eta,gamma", [(0.0, 1.0), (1.0, -1.0), (math.nan, 1.0)])
    def test_constants_must_be_positive(self, eta, gamma):
        with pytest.raises(ValueError):
            EquilibriumProblem(f=lambda x, y: 0.0, feasible_set=WholeSpace(1), eta=eta, gamma=gamma)

    def test_dimension_checked(self):
        with pytest.raises(DimensionError):
            eval_bifunction(bench.build_quadratic(2), [1.0], [1.0, 2.0])


class TestIdentities:
    def test_coincident_points(self):
        x = np.array([1.5, -2.0])
        lhs, rhs = identity_a(x, x, x, 0.7, -1.3)
        assert lhs == pytest.approx(float(x @ x)) and rhs == pytest.approx(lhs)

    def test_b_on_diagonal(self):
        assert identity_b([1.0], [1.0], [4.0]) == pytest.approx((0.0, 0.0))

    @pytest.mark.parametrize("beta,expected", [(0.0, 1.0), (1.0, 9.0)])
    def test_c_endpoints(self, beta, expected):
        lhs, rhs = identity_c([3.0], [-1.0], beta)
        assert lhs == pytest.approx(expected) and rhs == pytest.approx(expected)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda d: st.tuples(vectors(d), vectors(d), vectors(d))), coef, coef)
    def test_a_property(self, xyz, a, b):
        assert identity_holds(*identity_a(*xyz, a, b))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda d: st.tuples(vectors(d), vectors(d), vectors(d))))
    def test_b_property(self, xyz):
        lhs, rhs = identity_b(*xyz)
        # the right side cancels squared norms up to ~1e6
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs) + float(sum(v @ v for v in xyz)))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 4).flatmap(lambda d: st.tuples(vectors(d), vectors(d))), coef)
    def test_c_property(self, xy, beta):
        x, y = xy
        lhs, rhs = identity_c(x, y, beta)
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs) + float(x @ x + y @ y))

    def test_mismatched_dimensions(self):
        with pytest.raises(DimensionError):
            identity_b([1.0], [1.0, 2.0], [0.0])
