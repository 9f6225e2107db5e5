import numpy as np
import pytest
from numpy.testing import assert_allclose

from poolrate.exceptions import DomainError, RangeError
from poolrate.instance import build_selection_problem
from poolrate.rd import (
    SolverConfig,
    blahut_arimoto_reference,
    invert_to_distortion,
    lambda_star,
    point_from_kernel,
    rate_at_distortion,
    solve_at_distortion,
    solve_lagrangian,
    sweep_lambda,
)


def random_feasible_kernel(problem, rng):
    kernel = np.zeros((problem.n_pools, problem.n_datasets))
    for i, columns in enumerate(problem.feasible):
        kernel[i, columns] = rng.dirichlet(np.ones(columns.size))
    return kernel


class TestLagrangian:
    def test_zero_multiplier_is_zero_rate(self, t1_any_problem):
        point = solve_lagrangian(t1_any_problem, 0.0)
        assert point.rate == pytest.approx(0.0, abs=1e-12)
        assert point.avg_distortion == pytest.approx(t1_any_problem.bounds.d_max, abs=1e-9)

    def test_large_multiplier_reaches_d_min(self, t1_any_problem):
        point = solve_lagrangian(t1_any_problem, 1e4)
        assert point.avg_distortion - t1_any_problem.bounds.d_min < 1e-6

    def test_kernel_respects_feasibility(self, t1_any_problem):
        kernel = solve_lagrangian(t1_any_problem, 3.0).selection_kernel.rows
        assert_allclose(kernel.sum(axis=1), 1.0)
        assert np.all(kernel[~t1_any_problem.feasibility_mask()] == 0)

    def test_no_feasible_kernel_does_better(self, t1_asym_problem):
        rng = np.random.default_rng(12345)
        for lam in (0.5, 4.0):
            best = solve_lagrangian(t1_asym_problem, lam).objective
            uniform = point_from_kernel(t1_asym_problem, t1_asym_problem.uniform_subset_kernel(), lam)
            assert uniform.objective >= best - 1e-9
            for _ in range(20):
                kernel = random_feasible_kernel(t1_asym_problem, rng)
                assert point_from_kernel(t1_asym_problem, kernel, lam).objective >= best - 1e-9

    def test_warm_start_reaches_same_objective(self, t1_asym_problem):
        cold = solve_lagrangian(t1_asym_problem, 2.0)
        warm_from = solve_lagrangian(t1_asym_problem, 1.0).selection_kernel.rows
        warm = solve_lagrangian(t1_asym_problem, 2.0, init=warm_from)
        assert warm.objective == pytest.approx(cold.objective, abs=1e-8)

    @pytest.mark.parametrize("lam", [-1.0, np.inf, np.nan])
    def test_bad_multiplier(self, t1_any_problem, lam):
        with pytest.raises(DomainError):
            solve_lagrangian(t1_any_problem, lam)

    def test_rate_floor_without_zero_rate_selection(self, t1):
        problem = build_selection_problem(t1)
        point = solve_lagrangian(problem, 0.0)
        assert problem.bounds.d_max is None
        assert point.rate > 1e-3


class TestReferenceIteration:
    @pytest.mark.parametrize("lam", [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0])
    def test_matches_lagrangian_solver(self, identity_inst, lam):
        problem = build_selection_problem(identity_inst)
        reference = blahut_arimoto_reference(problem, lam)
        point = solve_lagrangian(problem, lam)
        assert point.rate == pytest.approx(reference.rate, abs=1e-6)
        assert point.avg_distortion == pytest.approx(reference.avg_distortion, abs=1e-6)


class TestCurve:
    def test_envelope_shape(self, t1_any_curve):
        assert t1_any_curve.is_convex()
        assert np.all(np.diff(t1_any_curve.knots_r) <= 0)
        assert np.all(np.diff(t1_any_curve.knots_d) > 0)

    def test_endpoints(self, t1_any_curve):
        assert t1_any_curve.d_min == pytest.approx(0.212, abs=1e-9)
        assert t1_any_curve.d_max == pytest.approx(0.5, abs=1e-8)
        assert t1_any_curve.rate_floor == 0.0
        assert rate_at_distortion(t1_any_curve, t1_any_curve.d_max) == pytest.approx(0.0, abs=1e-12)
        assert rate_at_distortion(t1_any_curve, t1_any_curve.d_min) == pytest.approx(t1_any_curve.max_rate)

    def test_rate_is_bounded_by_pool_entropy(self, t1_any_problem, t1_any_curve):
        p_u = t1_any_problem.p_u
        assert 0 < t1_any_curve.max_rate <= -np.sum(p_u * np.log(p_u)) + 1e-9

    def test_outside_range(self, t1_any_curve):
        with pytest.raises(RangeError):
            rate_at_distortion(t1_any_curve, 0.1)
        with pytest.raises(RangeError):
            rate_at_distortion(t1_any_curve, 0.6)

    def test_slope_only_inside_range(self, t1_any_curve):
        with pytest.raises(RangeError):
            lambda_star(t1_any_curve, t1_any_curve.d_min)
        with pytest.raises(RangeError):
            lambda_star(t1_any_curve, t1_any_curve.d_max)
        assert lambda_star(t1_any_curve, 0.3) > 0

    def test_inverse(self, t1_any_curve):
        for d in (0.25, 0.3, 0.4):
            inversion = invert_to_distortion(t1_any_curve, rate_at_distortion(t1_any_curve, d))
            assert inversion.distortion == pytest.approx(d, abs=1e-9)
            assert inversion.derivative < 0

    def test_inverse_outside_range(self, t1_any_curve):
        with pytest.raises(RangeError):
            invert_to_distortion(t1_any_curve, t1_any_curve.max_rate + 1.0)

    def test_frame(self, t1_any_curve):
        frame = t1_any_curve.to_frame()
        assert list(frame.columns) == ["lambda", "distortion", "rate_nats", "rate_bits"]
        assert_allclose(frame["rate_bits"], frame["rate_nats"] / np.log(2.0))
        diagnostics = t1_any_curve.diagnostics_frame()
        assert {"lambda", "distortion", "outer_iterations", "on_envelope"} <= set(diagnostics.columns)
        assert diagnostics["on_envelope"].any()

    def test_pool_size(self, t1_any_curve):
        assert t1_any_curve.m == 2

    @pytest.mark.filterwarnings("error::RuntimeWarning")
    def test_sweep_is_free_of_numeric_warnings(self, t1):
        curve = sweep_lambda(build_selection_problem(t1), [0.0, 0.1, 1.0, 10.0, 100.0])
        assert np.all(np.isfinite(curve.knots_r))

    def test_rate_floor(self, t1):
        curve = sweep_lambda(build_selection_problem(t1), [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0])
        assert curve.rate_floor > 0
        assert curve.d_min == pytest.approx(0.224, abs=1e-6)
        assert curve.d_max > curve.d_min

    @pytest.mark.parametrize("grid", [[], [1.0, -0.5]])
    def test_bad_grid(self, t1_any_problem, grid):
        with pytest.raises(DomainError):
            sweep_lambda(t1_any_problem, grid)


class TestSolveAtDistortion:
    def test_point_lies_under_the_chords(self, t1_any_problem, t1_any_curve):
        point = solve_at_distortion(t1_any_problem, 0.3)
        assert t1_any_curve.d_min - 1e-9 <= point.avg_distortion <= t1_any_curve.d_max + 1e-9
        assert point.rate <= rate_at_distortion(t1_any_curve, point.avg_distortion) + 1e-6

    def test_d_max_needs_no_bisection(self, t1_any_problem):
        point = solve_at_distortion(t1_any_problem, 0.5)
        assert point.lam == 0.0

    def test_outside_range(self, t1_any_problem):
        with pytest.raises(RangeError):
            solve_at_distortion(t1_any_problem, 0.2, config=SolverConfig())


@pytest.fixture(scope="module")
def refined_curve(t1_asym_problem, t1_asym_curve):
    """The asymmetric benchmark curve with 41 extra multipliers around the
    slope at mid-range distortion.
    """
    d = 0.5 * (t1_asym_curve.d_min + t1_asym_curve.d_max)
    local = lambda_star(t1_asym_curve, d) * np.logspace(-0.5, 0.5, 41)
    grid = np.concatenate([[p.lam for p in t1_asym_curve.points], local])
    return sweep_lambda(t1_asym_problem, grid)


class TestRefinement:
    def test_dense_multipliers_confirm_the_rate(self, t1_asym_curve, refined_curve):
        d = 0.5 * (t1_asym_curve.d_min + t1_asym_curve.d_max)
        coarse = rate_at_distortion(t1_asym_curve, d)
        fine = rate_at_distortion(refined_curve, d)
        assert fine <= coarse + 1e-6
        assert fine >= coarse * (1.0 - 2e-2)
        assert refined_curve.is_convex()

    def test_slope_is_a_fixed_point(self, t1_asym_problem, refined_curve):
        d = 0.5 * (refined_curve.d_min + refined_curve.d_max)
        point = solve_lagrangian(t1_asym_problem, lambda_star(refined_curve, d))
        assert abs(point.avg_distortion - d) <= 2e-2 * d
