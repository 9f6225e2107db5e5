import numpy as np
import pytest

from poolrate.dispersion import (
    dispersion_report,
    iid_counterpart_report,
    iota_split_check,
    joint_for_kernel,
    mi_identity_check,
    tilted_information,
)
from poolrate.exceptions import BudgetError, RangeError
from poolrate.instance import build_selection_problem, random_instance
from poolrate.prob import FiniteDist, StochKernel, joint_from_kernels
from poolrate.rd import rate_at_distortion, solve_lagrangian


def solved_joint(problem, lam):
    point = solve_lagrangian(problem, lam)
    return point, joint_for_kernel(problem, point.selection_kernel)


class TestInducedJoint:
    def test_mass_and_marginals(self, t1_asym_problem):
        point, joint = solved_joint(t1_asym_problem, 2.0)
        assert joint.prob.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(joint.prob > 0)
        np.testing.assert_allclose(joint.h_marginal, point.h_marginal.weights, atol=1e-12)
        assert joint.avg_distortion == pytest.approx(point.avg_distortion, abs=1e-12)

    def test_dense_table_budget(self, t1_asym_problem):
        _, joint = solved_joint(t1_asym_problem, 2.0)
        with pytest.raises(BudgetError):
            joint.table(budget=10)


class TestTiltedInformation:
    def test_mean_is_the_rate(self, t1_asym_dispersion):
        point, tilted = t1_asym_dispersion.point, t1_asym_dispersion.tilted
        expected = point.rate + tilted.lambda_star * (point.avg_distortion - tilted.d)
        assert tilted.mean == pytest.approx(expected, abs=1e-9)
        assert t1_asym_dispersion.report.mean_identity_residual == pytest.approx(0.0, abs=1e-9)

    def test_mean_matches_the_curve_at_the_attained_distortion(self, t1_asym_curve, t1_asym_dispersion):
        point, tilted = t1_asym_dispersion.point, t1_asym_dispersion.tilted
        rate = rate_at_distortion(t1_asym_curve, point.avg_distortion)
        assert abs(tilted.mean - rate) / rate < 2e-2

    def test_frame_carries_a_distribution(self, t1_asym_dispersion):
        frame = t1_asym_dispersion.tilted.to_frame()
        assert list(frame.columns) == ["w", "u", "h", "probability", "j_tilde"]
        assert frame["probability"].sum() == pytest.approx(1.0)

    def test_slope_needs_interior_distortion(self, t1_asym_curve, t1_asym_problem):
        _, joint = solved_joint(t1_asym_problem, 2.0)
        with pytest.raises(RangeError):
            tilted_information(joint, t1_asym_curve, t1_asym_curve.d_min)
        with pytest.raises(RangeError):
            tilted_information(joint, None, 0.3)


class TestDispersionReport:
    def test_benchmark_decomposition(self, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        assert report.V > 0
        assert report.lambda_star > 0
        assert abs(report.total_residual) < 1e-9
        assert abs(report.in_residual) < 1e-9
        assert abs(report.bet_residual) < 1e-9
        assert report.berry_esseen_B == pytest.approx(6.0 * report.third_abs_moment / report.V**1.5)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_instances(self, seed):
        problem = build_selection_problem(random_instance(seed))
        point, joint = solved_joint(problem, 2.0)
        report = dispersion_report(joint, tilted_information(joint, None, point.avg_distortion, 2.0))
        assert abs(report.total_residual) < 1e-9
        assert abs(report.in_residual) < 1e-9
        assert abs(report.bet_residual) < 1e-9
        assert report.R_check == pytest.approx(point.rate, abs=1e-9)

    def test_constant_tilted_information(self, t1_any_problem):
        point, joint = solved_joint(t1_any_problem, 0.0)
        report = dispersion_report(joint, tilted_information(joint, None, point.avg_distortion, 0.0))
        assert report.zero_dispersion
        assert report.berry_esseen_B is None
        assert report.V == pytest.approx(0.0, abs=1e-15)

    def test_export(self, t1_asym_dispersion):
        frame = t1_asym_dispersion.report.to_frame()
        assert frame.shape[0] == 1
        assert {"V", "V_in", "V_bet", "berry_esseen_B"} <= set(frame.columns)


class TestIdentities:
    def test_random_markov_chains(self):
        rng = np.random.default_rng(12345)
        for _ in range(100):
            n_u, n_t, n_h = rng.integers(2, 5, size=3)
            joint = joint_from_kernels(
                FiniteDist(rng.dirichlet(np.ones(n_u))),
                [
                    StochKernel(rng.dirichlet(np.ones(n_t), size=n_u)),
                    StochKernel(rng.dirichlet(np.ones(n_h), size=n_t)),
                ],
                ("U", "T", "H"),
            )
            check = mi_identity_check(joint)
            assert abs(check.pool_side_residual) < 1e-12
            assert abs(check.algorithm_side_residual) < 1e-12

    def test_solved_joint(self, t1_asym_problem):
        point, joint = solved_joint(t1_asym_problem, 2.0)
        check = mi_identity_check(joint)
        assert check.I_UH == pytest.approx(point.rate, abs=1e-12)
        assert abs(check.pool_side_residual) < 1e-12
        assert abs(check.algorithm_side_residual) < 1e-12

    def test_density_split(self, t1_asym_problem):
        _, joint = solved_joint(t1_asym_problem, 2.0)
        split = iota_split_check(joint)
        assert split.max_residual < 1e-12
        assert abs(split.variance_residual) < 1e-12


class TestIIDCounterpart:
    @pytest.mark.parametrize("k", [1, 2])
    def test_markov_chain(self, t1_iid, k):
        report = iid_counterpart_report(t1_iid, k)
        assert report.markov_residual == pytest.approx(0.0, abs=1e-12)
        assert 0 <= report.I_TH <= np.log(len(t1_iid.h_alphabet)) + 1e-12
        assert report.var_iota_TH >= 0

    def test_budget(self, t1_iid):
        with pytest.raises(BudgetError):
            iid_counterpart_report(t1_iid, 3, budget=10)
