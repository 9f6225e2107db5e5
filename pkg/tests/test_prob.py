import numpy as np
import pytest
from numpy.testing import assert_allclose

from poolrate.exceptions import AlphabetError, AxisError, SupportError, ValidationError
from poolrate.prob import (
    FiniteDist,
    JointTable,
    StochKernel,
    conditional_mutual_information,
    entropy,
    information_density,
    information_density_table,
    joint_from_kernels,
    kl_divergence,
    mutual_information,
    posterior_kernel,
)


def random_kernel(rng, n_in, n_out):
    return StochKernel(rng.dirichlet(np.ones(n_out), size=n_in))


class TestFiniteDist:
    def test_rejects_mass_other_than_one(self):
        with pytest.raises(ValidationError, match="sum to 0.9"):
            FiniteDist(np.array([0.5, 0.4]))

    def test_rejects_negative_entries(self):
        with pytest.raises(ValidationError):
            FiniteDist(np.array([1.2, -0.2]))

    def test_renormalises_rounding_noise(self):
        p = FiniteDist(np.array([0.5, 0.5 + 1e-11]))
        assert p.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_is_read_only(self):
        p = FiniteDist(np.array([0.25, 0.75]), ("a", "b"))
        with pytest.raises(ValueError):
            p.weights[0] = 1.0
        assert p.prob("b") == 0.75

    def test_label_count_must_match(self):
        with pytest.raises(AlphabetError):
            FiniteDist(np.array([0.5, 0.5]), ("a",))


class TestDivergence:
    def test_identical_distributions(self):
        p = FiniteDist(np.array([0.5, 0.5]))
        assert kl_divergence(p, p) == 0.0

    def test_point_mass_against_uniform(self):
        value = kl_divergence(FiniteDist(np.array([1.0, 0.0])), FiniteDist(np.array([0.5, 0.5])))
        assert value == pytest.approx(np.log(2.0), abs=1e-12)

    def test_matches_term_by_term_sum(self):
        p, q = [0.8, 0.2], [0.2, 0.8]
        expected = sum(a * np.log(a / b) for a, b in zip(p, q))
        assert kl_divergence(FiniteDist(np.array(p)), FiniteDist(np.array(q))) == pytest.approx(
            expected, abs=1e-14
        )

    def test_infinite_outside_support(self):
        value = kl_divergence(FiniteDist(np.array([0.5, 0.5])), FiniteDist(np.array([1.0, 0.0])))
        assert np.isinf(value)

    def test_alphabet_mismatch(self):
        with pytest.raises(AlphabetError):
            kl_divergence(FiniteDist(np.array([1.0])), FiniteDist(np.array([0.5, 0.5])))

    def test_entropy_of_uniform(self):
        assert entropy(FiniteDist(np.full(4, 0.25))) == pytest.approx(np.log(4.0))


class TestMutualInformation:
    def test_product_joint(self):
        mass = np.outer([0.3, 0.7], [0.1, 0.5, 0.4])
        assert mutual_information(JointTable(("A", "B"), mass), "A", "B") == pytest.approx(0.0, abs=1e-15)

    def test_identity_coupling(self):
        joint = JointTable(("A", "B"), np.diag([0.5, 0.5]))
        assert mutual_information(joint, "A", "B") == pytest.approx(np.log(2.0))

    def test_other_axes_are_marginalised(self):
        rng = np.random.default_rng(3)
        mass = rng.dirichlet(np.ones(12)).reshape(2, 3, 2)
        joint = JointTable(("A", "B", "C"), mass)
        pair = JointTable(("A", "C"), mass.sum(axis=1))
        assert mutual_information(joint, "A", "C") == pytest.approx(mutual_information(pair, "A", "C"))

    def test_matches_double_loop(self):
        rng = np.random.default_rng(11)
        mass = rng.dirichlet(np.ones(6)).reshape(2, 3)
        expected = 0.0
        for a in range(2):
            for b in range(3):
                expected += mass[a, b] * np.log(mass[a, b] / (mass[a].sum() * mass[:, b].sum()))
        assert mutual_information(JointTable(("A", "B"), mass), "A", "B") == pytest.approx(expected, abs=1e-14)

    def test_same_axis_twice(self):
        with pytest.raises(AxisError):
            mutual_information(JointTable(("A", "B"), np.diag([0.5, 0.5])), "A", "A")

    def test_conditioning_on_a_constant(self):
        rng = np.random.default_rng(5)
        mass = rng.dirichlet(np.ones(6)).reshape(2, 3, 1)
        joint = JointTable(("A", "B", "C"), mass)
        assert conditional_mutual_information(joint, "A", "B", "C") == pytest.approx(
            mutual_information(joint, "A", "B"), abs=1e-14
        )

    def test_markov_chain_has_no_conditional_information(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            joint = joint_from_kernels(
                FiniteDist(rng.dirichlet(np.ones(3))),
                [random_kernel(rng, 3, 4), random_kernel(rng, 4, 2)],
                ("U", "T", "H"),
            )
            assert conditional_mutual_information(joint, "U", "H", "T") == pytest.approx(0.0, abs=1e-12)

    def test_conditionally_independent(self):
        rng = np.random.default_rng(8)
        p_c = rng.dirichlet(np.ones(3))
        mass = np.stack(
            [np.outer(rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))) * p for p in p_c], axis=2
        )
        joint = JointTable(("A", "B", "C"), mass)
        assert conditional_mutual_information(joint, "A", "B", "C") == pytest.approx(0.0, abs=1e-12)


class TestInformationDensity:
    def test_independent_atom(self):
        joint = JointTable(("A", "B"), np.outer([0.4, 0.6], [0.5, 0.5]))
        assert information_density(joint, "A", "B", (1, 0)) == pytest.approx(0.0, abs=1e-15)

    def test_identity_diagonal(self):
        joint = JointTable(("A", "B"), np.diag([0.5, 0.5]))
        assert information_density(joint, "A", "B", (0, 0)) == pytest.approx(np.log(2.0))

    def test_zero_mass_atom(self):
        joint = JointTable(("A", "B"), np.diag([0.5, 0.5]))
        with pytest.raises(SupportError):
            information_density(joint, "A", "B", (0, 1))

    def test_mean_is_mutual_information(self):
        rng = np.random.default_rng(13)
        mass = rng.dirichlet(np.ones(8)).reshape(2, 4)
        mass[0, 1] = 0.0
        joint = JointTable(("A", "B"), mass / mass.sum())
        table = information_density_table(joint, "A", "B")
        support = joint.mass > 0
        assert np.isnan(table[0, 1])
        assert joint.mass[support] @ table[support] == pytest.approx(
            mutual_information(joint, "A", "B"), abs=1e-10
        )


class TestJointTable:
    def test_marginal_follows_requested_order(self):
        rng = np.random.default_rng(17)
        mass = rng.dirichlet(np.ones(24)).reshape(2, 3, 4)
        joint = JointTable(("A", "B", "C"), mass)
        assert_allclose(joint.marginal("C", "A").mass, mass.sum(axis=1).T)

    def test_conditional_drops_empty_rows(self):
        mass = np.array([[0.2, 0.3], [0.0, 0.0], [0.1, 0.4]])
        kernel = JointTable(("A", "B"), mass, (("a", "b", "c"), (0, 1))).conditional("B", "A")
        assert kernel.row_labels == ("a", "c")
        assert_allclose(kernel.rows, [[0.4, 0.6], [0.2, 0.8]])

    def test_rejects_repeated_axes(self):
        with pytest.raises(AxisError):
            JointTable(("A", "A"), np.diag([0.5, 0.5]))

    def test_chain_builder_checks_sizes(self):
        with pytest.raises(AlphabetError):
            joint_from_kernels(
                FiniteDist(np.array([0.5, 0.5])),
                [StochKernel(np.full((3, 2), 0.5))],
                ("A", "B"),
            )


class TestPosteriorKernel:
    def test_disjoint_supports_give_point_masses(self):
        likelihood = StochKernel(np.array([[0.5, 0.5, 0.0, 0.0], [0.0, 0.0, 0.3, 0.7]]))
        posterior = posterior_kernel(likelihood, FiniteDist(np.array([0.4, 0.6])))
        assert_allclose(posterior.rows, [[1, 0], [1, 0], [0, 1], [0, 1]])

    def test_symmetric_case(self):
        likelihood = StochKernel(np.array([[0.8, 0.2], [0.2, 0.8]]))
        posterior = posterior_kernel(likelihood, FiniteDist(np.array([0.5, 0.5])))
        assert_allclose(posterior.rows, [[0.8, 0.2], [0.2, 0.8]])

    def test_matches_bayes_loop(self):
        rng = np.random.default_rng(19)
        prior = rng.dirichlet(np.ones(3))
        likelihood = rng.dirichlet(np.ones(5), size=3)
        posterior = posterior_kernel(StochKernel(likelihood), FiniteDist(prior))
        for u in range(5):
            evidence = sum(prior[w] * likelihood[w, u] for w in range(3))
            for w in range(3):
                assert posterior.rows[u, w] == pytest.approx(prior[w] * likelihood[w, u] / evidence)

    def test_zero_probability_output_is_skipped(self):
        likelihood = StochKernel(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
        posterior = posterior_kernel(likelihood, FiniteDist(np.array([0.5, 0.5])))
        assert posterior.n_in == 2
        with pytest.raises(SupportError):
            posterior_kernel(likelihood, FiniteDist(np.array([0.5, 0.5])), columns=[2])
