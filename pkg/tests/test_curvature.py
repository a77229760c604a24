"""Second-order checks: maximized Hessian, searches, growth sampling."""

import numpy as np
import pytest

from kkt2.curvature import (
    check_snc,
    check_snc_fixed_multiplier,
    check_ssc,
    curvature_oracle,
    q_of_h,
    q_of_h_lp,
    sample_growth,
)
from kkt2.errors import UsageError
from kkt2.examples import DELTA, build_example1, build_example2
from kkt2.kkt import MultiplierSet, multiplier_set
from kkt2.model import BoxSet, ProblemSpec, quadratic

from helpers import random_stationary_problem


@pytest.fixture(scope="module")
def ex1():
    ex = build_example1(12)
    return ex, multiplier_set(ex.problem, ex.xbar)


@pytest.fixture(scope="module")
def ex2():
    ex = build_example2(8)
    return ex, multiplier_set(ex.problem, ex.xbar)


class TestQofH:
    def test_example1_first_direction(self, ex1):
        """max over [0,1] of (1 - 3 mu): value 1 at mu = 0."""
        ex, mset = ex1
        oracle = curvature_oracle(ex.problem, ex.xbar, mset)
        val, mu = q_of_h(oracle, ex.direction_lower_indicator())
        assert val == pytest.approx(1.0, abs=1e-12)
        assert mu[0] == pytest.approx(0.0, abs=1e-9)

    def test_example1_second_direction(self, ex1):
        """max over [0,1] of (-1 + 2 mu): value 1 at mu = 1."""
        ex, mset = ex1
        oracle = curvature_oracle(ex.problem, ex.xbar, mset)
        val, mu = q_of_h(oracle, ex.direction_upper_indicator())
        assert val == pytest.approx(1.0, abs=1e-12)
        assert mu[0] == pytest.approx(1.0, abs=1e-9)

    def test_example2_negative_curvature(self, ex2):
        ex, mset = ex2
        oracle = curvature_oracle(ex.problem, ex.xbar, mset)
        val, _ = q_of_h(oracle, np.array([0.0, 1.0, 0.0]))
        assert val == pytest.approx(-2.0 * DELTA, abs=1e-12)
        assert val == pytest.approx(-0.92820, abs=1e-5)

    def test_homogeneity_and_lp_agreement(self):
        rng = np.random.default_rng(43)
        pairs = 0
        while pairs < 60:
            p, xbar, _, _ = random_stationary_problem(rng)
            mset = multiplier_set(p, xbar)
            if mset.empty or not mset.bounded or not mset.vertices:
                continue
            oracle = curvature_oracle(p, xbar, mset)
            for _ in range(4):
                h = rng.standard_normal(p.dim)
                v1, _ = q_of_h(oracle, h)
                v2, _ = q_of_h(oracle, 2.0 * h)
                assert v2 == pytest.approx(4.0 * v1, rel=1e-9, abs=1e-12)
                assert q_of_h_lp(oracle, h) == pytest.approx(v1, abs=1e-8 * (1 + abs(v1)))
                pairs += 1

    def test_weak_duality_over_sampled_multipliers(self, ex1):
        """Every fixed multiplier's Hessian value is dominated by q."""
        ex, mset = ex1
        oracle = curvature_oracle(ex.problem, ex.xbar, mset)
        rng = np.random.default_rng(47)
        for _ in range(30):
            h = rng.standard_normal(12)
            qv, _ = q_of_h(oracle, h)
            for mu in rng.uniform(0.0, 1.0, 5):
                assert oracle.fixed_mu_value(h, np.array([mu])) <= qv + 1e-9

    def test_monotone_in_multiplier_set(self, ex1):
        """Enlarging the multiplier polytope never decreases q."""
        ex, mset = ex1
        oracle = curvature_oracle(ex.problem, ex.xbar, mset)
        enlarged = MultiplierSet(
            mset.x, mset.f_grad, mset.g_grads, mset.polytope,
            empty=False, bounded=True,
            vertices=(np.array([-0.2]), np.array([1.3])), info=mset.info)
        oracle_big = curvature_oracle(ex.problem, ex.xbar, enlarged)
        rng = np.random.default_rng(53)
        for _ in range(40):
            h = rng.standard_normal(12)
            assert q_of_h(oracle_big, h)[0] >= q_of_h(oracle, h)[0] - 1e-12


class TestSNC:
    def test_example1_sup_form_holds(self, ex1):
        ex, mset = ex1
        verdict = check_snc(ex.problem, ex.xbar, mset, cone=ex.display_critical_cone())
        assert verdict.kind == "snc_holds"
        assert verdict.sampled_min >= 1.0 - 1e-6

    def test_example2_violated_at_limit_ray(self, ex2):
        ex, mset = ex2
        verdict = check_snc(ex.problem, ex.xbar, mset)
        assert verdict.kind == "snc_violated"
        assert np.allclose(verdict.witness, [0.0, 1.0, 0.0], atol=1e-12)
        assert verdict.witness_value == pytest.approx(-2.0 * DELTA, abs=1e-12)

    def test_convex_quadratic_holds(self):
        p = ProblemSpec(
            quadratic(0.0, np.zeros(2), np.array([[2.0, 0.3], [0.3, 1.0]])), (), 0,
            BoxSet(np.full(2, -1.0), np.full(2, 1.0)), np.ones(2))
        mset = multiplier_set(p, np.zeros(2))
        verdict = check_snc(p, np.zeros(2), mset)
        assert verdict.kind == "snc_holds"
        assert verdict.sampled_min >= 0.0

    def test_witness_replays_from_cold_start(self, ex2):
        ex, _ = ex2
        mset1 = multiplier_set(ex.problem, ex.xbar)
        v1 = check_snc(ex.problem, ex.xbar, mset1)
        ex_again = build_example2(8)
        mset2 = multiplier_set(ex_again.problem, ex_again.xbar)
        v2 = check_snc(ex_again.problem, ex_again.xbar, mset2)
        assert v1.kind == v2.kind == "snc_violated"
        assert np.array_equal(v1.witness, v2.witness)
        assert v1.witness_value == v2.witness_value


class TestFixedMultiplier:
    def test_endpoints(self, ex1):
        """mu = 0 is violated by the upper-tail direction (value -1), mu = 1
        by the lower indicator (value -2)."""
        ex, mset = ex1
        cone = ex.display_critical_cone()
        v0 = check_snc_fixed_multiplier(ex.problem, ex.xbar, np.array([0.0]), mset, cone=cone)
        assert v0.kind == "snc_violated"
        assert v0.witness_value == pytest.approx(-1.0, abs=1e-12)
        assert np.allclose(v0.witness, ex.direction_upper_indicator())
        v1 = check_snc_fixed_multiplier(ex.problem, ex.xbar, np.array([1.0]), mset, cone=cone)
        assert v1.kind == "snc_violated"
        assert v1.witness_value == pytest.approx(-2.0, abs=1e-12)
        assert np.allclose(v1.witness, ex.direction_lower_indicator())

    def test_every_multiplier_violated(self, ex1):
        ex, mset = ex1
        cone = ex.display_critical_cone()
        for mu in np.linspace(0.0, 1.0, 11):
            v = check_snc_fixed_multiplier(ex.problem, ex.xbar, np.array([mu]), mset, cone=cone)
            assert v.kind == "snc_violated"
            assert v.witness_value == pytest.approx(min(1 - 3 * mu, -1 + 2 * mu), abs=1e-9)

    def test_mu_outside_set_rejected(self, ex1):
        ex, mset = ex1
        with pytest.raises(UsageError):
            check_snc_fixed_multiplier(ex.problem, ex.xbar, np.array([1.5]), mset)


class TestSSC:
    def test_example1_coercive(self, ex1):
        ex, mset = ex1
        verdict = check_ssc(ex.problem, ex.xbar, mset, eta=0.1, alpha_target=1.0)
        assert verdict.kind == "ssc_holds"
        assert verdict.alpha_est == pytest.approx(1.0, abs=1e-6)
        assert verdict.positivity_consistent

    def test_example2_violated(self, ex2):
        ex, mset = ex2
        verdict = check_ssc(ex.problem, ex.xbar, mset, eta=0.1, alpha_target=0.1)
        assert verdict.kind == "ssc_violated"
        assert np.allclose(verdict.witness, [0.0, 1.0, 0.0], atol=1e-12)
        assert verdict.positivity_consistent

    def test_unconstrained_alpha_is_smallest_eigenvalue(self):
        p = ProblemSpec(
            quadratic(0.0, np.zeros(2), np.diag([1.0, 3.0])), (), 0,
            BoxSet(np.full(2, -np.inf), np.full(2, np.inf)), np.ones(2))
        mset = multiplier_set(p, np.zeros(2))
        verdict = check_ssc(p, np.zeros(2), mset, eta=0.5, alpha_target=1.0)
        assert verdict.kind == "ssc_holds"
        assert verdict.alpha_est == pytest.approx(1.0, abs=1e-9)

    def test_eta_must_be_positive(self, ex1):
        ex, mset = ex1
        with pytest.raises(UsageError):
            check_ssc(ex.problem, ex.xbar, mset, eta=0.0, alpha_target=1.0)


class TestGrowth:
    def test_example1_monte_carlo(self, ex1):
        """Seeded Monte-Carlo over 1e4 feasible grid perturbations."""
        ex, _ = ex1
        res = sample_growth(ex.problem, ex.xbar, alpha=0.5, eps=0.05, n_samples=10_000)
        assert res.consistent
        assert res.samples_accepted == 10_000
        assert res.worst_margin >= -1e-9

    def test_example2_local_minimum(self, ex2):
        ex, _ = ex2
        res = sample_growth(ex.problem, ex.xbar, alpha=0.1, eps=0.05, n_samples=2000)
        assert res.consistent
        assert res.samples_accepted > 0

    def test_linear_descent_counterexample(self):
        """A linear objective with a feasible descent direction violates
        every growth inequality."""
        p = ProblemSpec(
            quadratic(0.0, np.array([1.0, 0.0]), np.zeros((2, 2))), (), 0,
            BoxSet(np.full(2, -1.0), np.full(2, 1.0)), np.ones(2))
        res = sample_growth(p, np.zeros(2), alpha=0.1, eps=0.5, n_samples=500)
        assert not res.consistent
        assert res.counterexample is not None
        # re-verify the counterexample
        x = res.counterexample
        assert p.objective.value(x) < 0.0 - 0.05 * p.norm(x) ** 2 + 1e-12
