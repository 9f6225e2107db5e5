import dataclasses
import math

import numpy as np
import pytest

from poolrate.converse import (
    CONVERSE_COLUMNS,
    epsilon_objective,
    label_bound,
    q_function,
    q_inverse,
    reports_to_frame,
    tail_probability,
    theorem1_curve,
    theorem1_epsilon_bound,
    theorem1_report,
    theorem2_rate_bound,
    theorem3_distortion_bound,
)
from poolrate.exceptions import DomainError, RangeError
from poolrate.rd import invert_to_distortion, rate_at_distortion

LN2 = math.log(2.0)


@pytest.fixture
def zero_dispersion_report(t1_asym_dispersion):
    return dataclasses.replace(
        t1_asym_dispersion.report, V=0.0, zero_dispersion=True, berry_esseen_B=None
    )


class TestGaussianTail:
    @pytest.mark.parametrize("eps", [1e-6, 0.01, 0.1, 0.5, 0.9, 1 - 1e-6])
    def test_round_trip(self, eps):
        assert q_function(q_inverse(eps)) == pytest.approx(eps, abs=1e-12)

    def test_known_values(self):
        assert q_function(0.0) == 0.5
        assert q_inverse(0.5) == pytest.approx(0.0, abs=1e-15)
        assert q_inverse(0.1) == pytest.approx(1.2815515655446004, abs=1e-12)
        assert q_inverse(0.9) == pytest.approx(-q_inverse(0.1), abs=1e-12)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, eps):
        with pytest.raises(DomainError):
            q_inverse(eps)


class TestExcessProbabilityBound:
    def test_tail(self, t1_asym_dispersion):
        tilted = t1_asym_dispersion.tilted
        for threshold in (-1.0, 0.0, 0.5, tilted.values.max(), tilted.values.max() + 1):
            expected = tilted.prob[tilted.values >= threshold].sum()
            assert tail_probability(tilted, threshold) == pytest.approx(expected, abs=1e-14)

    def test_supremum_over_gamma(self, t1_asym_dispersion):
        tilted = t1_asym_dispersion.tilted
        for n in range(3):
            bound = theorem1_epsilon_bound(tilted, n, 2.0)
            grid = np.linspace(0.0, 10.0, 20001)
            objective = epsilon_objective(tilted, bound.bn_nats, grid)
            assert bound.raw_value >= objective.max() - 1e-12
            assert 0.0 <= bound.eps_lower <= 1.0

    def test_non_increasing_in_labels(self, t1_asym_dispersion):
        bounds = theorem1_curve(t1_asym_dispersion.tilted, range(5), 2.0)
        values = [b.eps_lower for b in bounds]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))
        assert bounds[0].bn_nats == 0.0
        assert bounds[1].bn_nats == pytest.approx(2.0 * LN2)

    def test_vacuous_for_many_labels(self, t1_asym_dispersion):
        bound = theorem1_epsilon_bound(t1_asym_dispersion.tilted, 50, 2.0)
        assert bound.vacuous
        assert bound.eps_lower == 0.0

    def test_negative_labels(self, t1_asym_dispersion):
        with pytest.raises(DomainError):
            theorem1_epsilon_bound(t1_asym_dispersion.tilted, -1, 2.0)


class TestRateBound:
    def test_median_asymptotic(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        for k in (1, 10, 100):
            bound = theorem2_rate_bound(t1_asym_curve, report, k, report.d, 0.5)
            rate = rate_at_distortion(t1_asym_curve, report.d)
            assert bound.bound_value == pytest.approx(rate - math.log(k) / (2 * k), abs=1e-12)
            assert bound.bound_without_o_term == pytest.approx(rate, abs=1e-12)

    def test_approaches_rate_distortion_function(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        values = [
            theorem2_rate_bound(t1_asym_curve, report, k, report.d, 0.1).bound_value
            for k in (10, 1000, 100000)
        ]
        rate = rate_at_distortion(t1_asym_curve, report.d)
        assert abs(values[-1] - rate) < abs(values[0] - rate)

    def test_explicit_infeasible_for_single_block(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        bound = theorem2_rate_bound(t1_asym_curve, report, 1, report.d, 0.1, variant="explicit")
        assert "explicit-infeasible" in bound.flags
        assert bound.variant == "asymptotic"

    def test_zero_dispersion_branch(self, t1_asym_curve, zero_dispersion_report):
        d = zero_dispersion_report.d
        bound = theorem2_rate_bound(
            t1_asym_curve, zero_dispersion_report, 1, d, 1 - math.exp(-1.0), variant="explicit"
        )
        assert bound.bound_value == pytest.approx(rate_at_distortion(t1_asym_curve, d) - 1.0, abs=1e-12)
        assert "zero-dispersion" in bound.flags

    def test_label_bound(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        bound = theorem2_rate_bound(t1_asym_curve, report, 100, report.d, 0.1, b=2.0)
        assert bound.n == label_bound(bound.bound_value, 100, 2.0)
        assert label_bound(2.0 * LN2, 3, 2.0) == 3
        assert label_bound(-1.0, 3, 2.0) == 0

    def test_pool_size_comes_from_the_curve(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        assert theorem2_rate_bound(t1_asym_curve, report, 10, report.d, 0.1).m == 2
        assert theorem2_rate_bound(t1_asym_curve, report, 10, report.d, 0.1, m=3).m == 3
        bare = dataclasses.replace(t1_asym_curve, m=None)
        with pytest.raises(DomainError, match="pool size"):
            theorem2_rate_bound(bare, report, 10, report.d, 0.1)

    def test_distortion_mismatch_is_flagged(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        d = 0.5 * (report.d + t1_asym_curve.d_max)
        assert "dispersion-d-mismatch" in theorem2_rate_bound(t1_asym_curve, report, 10, d, 0.1).flags

    def test_domain(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        with pytest.raises(DomainError):
            theorem2_rate_bound(t1_asym_curve, report, 10, report.d, 1.0)
        with pytest.raises(DomainError):
            theorem2_rate_bound(t1_asym_curve, report, 0, report.d, 0.1)
        with pytest.raises(RangeError):
            theorem2_rate_bound(t1_asym_curve, report, 10, t1_asym_curve.d_max, 0.1)


class TestDistortionBound:
    def test_single_block_median(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        rate = rate_at_distortion(t1_asym_curve, report.d)
        bound = theorem3_distortion_bound(t1_asym_curve, report, 1, rate, 0.5)
        assert bound.bound_value == pytest.approx(report.d, abs=1e-9)
        assert bound.intermediates["D_prime"] < 0

    @pytest.mark.parametrize("k", [2, 10, 100])
    def test_median_approaches_the_distortion_rate_function(self, t1_asym_curve, t1_asym_dispersion, k):
        report = t1_asym_dispersion.report
        rate = rate_at_distortion(t1_asym_curve, report.d)
        inversion = invert_to_distortion(t1_asym_curve, rate)
        bound = theorem3_distortion_bound(t1_asym_curve, report, k, rate, 0.5)
        c = abs(inversion.derivative) / 2.0
        assert bound.bound_value == pytest.approx(inversion.distortion - c * math.log(k) / k, abs=1e-6)
        assert bound.bound_value < inversion.distortion

    def test_statement_term(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        rate = rate_at_distortion(t1_asym_curve, report.d)
        plain = theorem3_distortion_bound(t1_asym_curve, report, 10, rate, 0.1)
        with_term = theorem3_distortion_bound(t1_asym_curve, report, 10, rate, 0.1, include_statement_term=True)
        assert with_term.bound_value == pytest.approx(plain.bound_value + plain.intermediates["D_prime"])
        assert "statement-term" in with_term.flags

    def test_rate_range(self, t1_asym_curve, t1_asym_dispersion):
        with pytest.raises(RangeError):
            theorem3_distortion_bound(t1_asym_curve, t1_asym_dispersion.report, 10, t1_asym_curve.max_rate, 0.1)

    def test_frame(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        rows = [
            theorem2_rate_bound(t1_asym_curve, report, k, report.d, 0.1, variant=variant)
            for k in (10, 100)
            for variant in ("asymptotic", "explicit")
        ]
        frame = reports_to_frame(rows)
        assert len(frame) == 4
        assert set(frame["theorem"]) == {"2"}
        assert list(frame.columns[: len(CONVERSE_COLUMNS)]) == CONVERSE_COLUMNS

    def test_row_layout(self, t1_asym_curve, t1_asym_dispersion):
        report = t1_asym_dispersion.report
        rate_row = theorem2_rate_bound(t1_asym_curve, report, 10, report.d, 0.1, b=2.0).to_row()
        assert list(rate_row)[: len(CONVERSE_COLUMNS)] == CONVERSE_COLUMNS
        assert rate_row["m"] == 2
        assert rate_row["n"] == label_bound(rate_row["bound_value"], 10, 2.0)
        assert "bound_without_o_term" in list(rate_row)[len(CONVERSE_COLUMNS):]

        rate = rate_at_distortion(t1_asym_curve, report.d)
        distortion_row = theorem3_distortion_bound(t1_asym_curve, report, 10, rate, 0.1, b=2.0).to_row()
        assert distortion_row["n"] == label_bound(rate, 10, 2.0)
        assert theorem3_distortion_bound(t1_asym_curve, report, 10, rate, 0.1).to_row()["n"] is None

    def test_label_budget_rows(self, t1_asym_curve, t1_asym_dispersion):
        tilted, report = t1_asym_dispersion.tilted, t1_asym_dispersion.report
        bounds = theorem1_curve(tilted, range(3), 2.0)
        rows = [theorem1_report(t1_asym_curve, report, bound).to_row() for bound in bounds]
        assert [row["n"] for row in rows] == [0, 1, 2]
        assert all(row["theorem"] == "1" and row["eps"] is None for row in rows)
        assert rows[0]["bound_value"] >= rows[2]["bound_value"]
        assert {row["m"] for row in rows} == {2}
