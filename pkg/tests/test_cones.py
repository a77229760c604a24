"""Cone calculus: patterns, polars, critical cones, density evidence."""

import numpy as np
import pytest

from kkt2.cones import (
    FREE,
    NONNEG,
    NONPOS,
    ZERO,
    SignPatternCone,
    critical_cone,
    normal_cone_box,
    radial_density_gap,
    tangent_cone_K,
    tangent_cone_box,
)
from kkt2.cones import random_directions
from kkt2.errors import InfeasiblePoint
from kkt2.examples import build_example1, build_example2
from kkt2.examples.example2 import Example2Set, GAMMA, DELTA
from kkt2.model import BoxSet, ProblemSpec, check_feasible, quadratic


def example2_cones(truncs=(5, 10, 20)):
    return [Example2Set(N, GAMMA, DELTA).cone_set() for N in truncs]


class TestBoxCones:
    def test_example1_tangent_pattern(self):
        ex = build_example1(12)
        pat = tangent_cone_box(ex.problem.abstract_set, ex.xbar)
        codes = pat.codes
        assert all(codes[i] == NONNEG for i in range(4))       # (0, 1/3)
        assert all(codes[i] == FREE for i in range(4, 8))      # (1/3, 2/3)
        assert all(codes[i] == NONPOS for i in range(8, 12))   # (2/3, 1)

    def test_interior_point_free_and_normal_zero(self):
        box = BoxSet(np.full(3, -1.0), np.full(3, 1.0))
        pat = tangent_cone_box(box, np.zeros(3))
        assert all(c == FREE for c in pat.codes)
        normal = normal_cone_box(box, np.zeros(3))
        assert all(c == ZERO for c in normal.codes)

    def test_fixed_component(self):
        box = BoxSet(np.array([0.0, -1.0]), np.array([0.0, 1.0]))
        pat = tangent_cone_box(box, np.array([0.0, 0.5]))
        assert pat.codes[0] == ZERO and pat.codes[1] == FREE

    def test_outside_box_raises(self):
        box = BoxSet(np.zeros(1), np.ones(1))
        with pytest.raises(InfeasiblePoint):
            tangent_cone_box(box, np.array([2.0]))

    def test_example1_normal_pattern(self):
        """<=0 at lower-active, =0 on the free middle, >=0 at upper-active."""
        ex = build_example1(12)
        codes = normal_cone_box(ex.problem.abstract_set, ex.xbar).codes
        assert all(codes[i] == NONPOS for i in range(4))
        assert all(codes[i] == ZERO for i in range(4, 8))
        assert all(codes[i] == NONNEG for i in range(8, 12))

    def test_polar_of_polar_is_tangent(self):
        ex = build_example1(12)
        pat = tangent_cone_box(ex.problem.abstract_set, ex.xbar)
        assert np.array_equal(pat.polar().polar().codes, pat.codes)

    def test_bipolar_on_random_patterns(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            codes = rng.integers(0, 4, size=rng.integers(1, 12)).astype(np.int8)
            pat = SignPatternCone(codes)
            assert np.array_equal(pat.polar().polar().codes, codes)

    def test_membership_consistency(self):
        """h and -h both tangent forces box-active components to vanish."""
        ex = build_example1(12)
        pat = tangent_cone_box(ex.problem.abstract_set, ex.xbar)
        rng = np.random.default_rng(19)
        for _ in range(50):
            h = rng.standard_normal(12)
            if pat.contains(h) and pat.contains(-h):
                active = list(range(4)) + list(range(8, 12))
                assert np.max(np.abs(h[active])) <= 1e-9


class TestKTangent:
    def test_all_equalities(self):
        p = ProblemSpec(
            quadratic(0.0, np.zeros(2), np.zeros((2, 2))),
            tuple(quadratic(0.0, np.eye(2)[i], np.zeros((2, 2))) for i in range(2)),
            2, BoxSet(np.full(2, -1.0), np.full(2, 1.0)), np.ones(2))
        info = check_feasible(p, np.zeros(2)).info
        rows = tangent_cone_K(p, info)
        assert rows.eq == (0, 1) and rows.leq == () and rows.free == ()

    def test_single_active_inequality(self):
        p = ProblemSpec(
            quadratic(0.0, np.zeros(2), np.zeros((2, 2))),
            (quadratic(0.0, np.array([1.0, 0.0]), np.zeros((2, 2))),
             quadratic(-1.0, np.array([0.0, 1.0]), np.zeros((2, 2)))),
            0, BoxSet(np.full(2, -2.0), np.full(2, 2.0)), np.ones(2))
        info = check_feasible(p, np.zeros(2)).info
        rows = tangent_cone_K(p, info)
        assert rows.eq == () and rows.leq == (0,) and rows.free == (1,)

    def test_example2_single_equality_row(self):
        ex = build_example2(4)
        info = check_feasible(ex.problem, ex.xbar).info
        rows = tangent_cone_K(ex.problem, info)
        assert rows.eq == (0,) and rows.leq == () and rows.free == ()


class TestCriticalCone:
    def test_example1_display_cone_members(self):
        ex = build_example1(12)
        cone = ex.display_critical_cone()
        assert cone.contains(ex.direction_lower_indicator())
        assert cone.contains(ex.direction_upper_indicator())
        codes = cone.base_pattern.codes
        assert all(codes[i] == ZERO for i in range(8, 9))   # (2/3, 3/4) pinned
        assert all(codes[i] == NONPOS for i in range(9, 12))

    def test_example1_full_cone_excludes_h1(self):
        """With the constraint row, chi_(0,1/3) is no longer critical."""
        ex = build_example1(12)
        cone = critical_cone(ex.problem, ex.xbar, 0.0)
        assert not cone.contains(ex.direction_lower_indicator())
        assert cone.contains(ex.direction_upper_indicator())

    def test_example2_member(self):
        ex = build_example2(6)
        cone = critical_cone(ex.problem, ex.xbar, 0.0)
        assert cone.contains(np.array([0.0, 1.0, 0.0]))
        assert not cone.contains(np.array([0.0, 0.0, -1.0]))

    def test_zero_objective_gradient(self):
        """With f'(x)=0 the objective cut is vacuous: K = tangent cap rows."""
        p = ProblemSpec(
            quadratic(0.0, np.zeros(2), np.eye(2)),
            (quadratic(0.0, np.array([1.0, 1.0]), np.zeros((2, 2))),),
            1, BoxSet(np.zeros(2), np.ones(2)), np.ones(2))
        cone = critical_cone(p, np.zeros(2), 0.0)
        assert cone.contains(np.array([1.0, -1.0])) is False  # pattern >=0
        assert cone.contains(np.array([0.0, 0.0]))
        h = np.array([1.0, 1.0])
        assert not cone.contains(h)  # violates g' row
        # direction in the pattern with g'.h = 0
        assert cone.contains(np.zeros(2))

    def test_infeasible_point_rejected(self):
        ex = build_example1(12)
        with pytest.raises(InfeasiblePoint):
            critical_cone(ex.problem, np.full(12, 2.0), 0.0)

    def test_eta_zero_contained_in_eta_positive(self):
        ex = build_example1(12)
        cone0 = critical_cone(ex.problem, ex.xbar, 0.0)
        cone_eta = critical_cone(ex.problem, ex.xbar, 0.5)
        rng = np.random.default_rng(23)
        members = random_directions(cone0, 40, rng)
        assert members
        for h in members:
            assert cone_eta.contains(h, 1e-7)

    def test_objective_annihilated_on_display_cone(self):
        """Stationary point, strictly positive multiplier: critical
        directions have zero objective derivative."""
        ex = build_example1(12)
        cone = ex.display_critical_cone()
        rng = np.random.default_rng(29)
        fgrad = ex.f_grad
        for h in random_directions(cone, 60, rng):
            assert abs(ex.problem.inner(fgrad, h)) <= 1e-9


class TestRadialDensityGap:
    def test_box_always_dense(self):
        box = BoxSet(np.zeros(2), np.ones(2))
        rep = radial_density_gap(box, np.zeros(2), [])
        assert rep.dense

    def test_two_functional_gap(self):
        """Cutting with both derivative rows leaves only the zero radial
        direction, distance 1 from the tangent direction at every
        truncation."""
        h = np.array([0.0, 1.0, 0.0])
        rows = [(np.array([1.0, 0.0, 0.0]), "eq"), (np.array([0.0, 0.0, -1.0]), "le")]
        rep = radial_density_gap(example2_cones(), np.zeros(3), rows, h)
        assert not rep.dense
        assert rep.witness is not None
        assert all(d >= 0.1 for d in rep.distances)
        assert rep.distances == pytest.approx((1.0, 1.0, 1.0), abs=1e-8)

    def test_single_functional_dense(self):
        """One row keeps mixed generator combinations available; the
        distance decays with the truncation."""
        h = np.array([0.0, 1.0, 0.0])
        rows = [(np.array([1.0, 0.0, 0.0]), "eq")]
        rep = radial_density_gap(example2_cones(), np.zeros(3), rows, h)
        assert rep.dense
        assert rep.distances[0] > rep.distances[1] > rep.distances[2]
        assert rep.distances[-1] < 0.05
