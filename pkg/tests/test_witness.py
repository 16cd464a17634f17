import itertools
import math

import numpy as np
import pytest

from gslab.graphs import StabilizerSet, stabilizers_of_c6
from gslab.qalgebra import (
    MixedState,
    Observable,
    PauliString,
    basis_state,
    cluster6,
    cluster6_tilde,
    expectation,
    ghz_state,
    m_operator,
    min_eigenvalue,
)
from gslab.witness import (
    MeasurementSetting,
    NoSignChangeError,
    NotMeasurableError,
    WitnessPlan,
    WitnessReport,
    WitnessValidationError,
    cluster_witness_matrix,
    cluster_witness_plan,
    fidelity_from_witness,
    ghz_decomposition,
    ghz_witness_plan,
    max_bipartition_weight,
    noise_threshold,
    parity_signs,
    plan_by_name,
    product_state_minimum,
    random_density_matrix,
    random_product_states,
    validate_witness,
    white_noise_state,
)


@pytest.fixture(scope="module")
def ghz_plan():
    return ghz_witness_plan()


@pytest.fixture(scope="module")
def cluster_plan():
    return cluster_witness_plan()


def cluster_fidelity_witness() -> np.ndarray:
    """W_C = I/2 - |C6><C6|."""
    return np.eye(64) / 2 - cluster6().projector().matrix


class TestMeasurementSetting:
    def test_labels(self):
        assert MeasurementSetting.split("Z", "X").label == "ZZZXXX"
        assert MeasurementSetting.uniform("M-1").label == "[M-1]" * 6

    def test_rejects_unknown(self):
        with pytest.raises(ValueError):
            MeasurementSetting(("Z",) * 5)
        with pytest.raises(ValueError):
            MeasurementSetting.uniform("Y")
        with pytest.raises(ValueError):
            MeasurementSetting.uniform("M4")

    def test_basis_is_unitary(self):
        b = MeasurementSetting(("Z", "X", "M1", "M-2", "M3", "M0")).basis_matrix()
        assert np.allclose(b @ b.conj().T, np.eye(64), atol=1e-12)

    def test_outcome_zero_is_plus_one(self):
        s = MeasurementSetting.uniform("M2")
        kets = s.basis_matrix().conj()  # rows are bras
        obs = s.observable_matrix()
        assert np.vdot(kets[0], obs @ kets[0]).real == pytest.approx(1, abs=1e-12)
        assert np.vdot(kets[1], obs @ kets[1]).real == pytest.approx(-1, abs=1e-12)

    def test_parity_weights_match_observable(self):
        s = MeasurementSetting.uniform("M1")
        assert np.allclose(s.outcome_weights(s.observable_matrix()), parity_signs(), atol=1e-12)

    def test_not_measurable(self):
        with pytest.raises(NotMeasurableError):
            MeasurementSetting.uniform("Z").outcome_weights(
                MeasurementSetting.uniform("X").observable_matrix())

    def test_parity_signs_subset(self):
        signs = parity_signs(qubits=[1])
        assert signs[0] == 1 and signs[0b100000] == -1 and signs[0b011111] == 1


class TestGhzPlan:
    def test_decomposition_reassembles_projector(self):
        total = sum(op for _, op in ghz_decomposition())
        assert np.abs(total - ghz_state().projector().matrix).max() <= 1e-12

    def test_seven_settings(self, ghz_plan):
        assert len(ghz_plan.settings) == 7
        assert ghz_plan.settings[0].label == "Z^6"

    def test_on_ghz(self, ghz_plan):
        assert ghz_plan.evaluate(ghz_state()) == pytest.approx(-0.5, abs=1e-12)

    def test_on_maximally_mixed(self, ghz_plan):
        assert ghz_plan.evaluate(MixedState.maximally_mixed(6)) == pytest.approx(0.5 - 1 / 64, abs=1e-12)

    @pytest.mark.parametrize("n", range(-2, 4))
    def test_m_fringe(self, n):
        s = MeasurementSetting.uniform(f"M{n}")
        value = s.probabilities(ghz_state()) @ parity_signs()
        assert value == pytest.approx((-1) ** n, abs=1e-12)

    def test_m_operator_angle(self):
        assert np.allclose(m_operator(3), [[0, -1j], [1j, 0]], atol=1e-15)


class TestClusterPlan:
    def test_on_cluster(self, cluster_plan):
        assert cluster_plan.evaluate(cluster6()) == pytest.approx(-0.5, abs=1e-12)

    def test_on_cluster_tilde(self, cluster_plan):
        assert cluster_plan.evaluate(cluster6_tilde()) == pytest.approx(1.5, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 0.77, 1.0])
    def test_white_noise_family(self, cluster_plan, p):
        rho = white_noise_state(cluster6(), p)
        assert cluster_plan.evaluate(rho) == pytest.approx(0.5 - p, abs=1e-12)

    def test_six_settings(self, cluster_plan):
        labels = [s.label for s in cluster_plan.settings]
        assert labels == ["Z^3 X^3", "X^3 Z^3", "Z^3 M(1)^3", "Z^3 M(-1)^3", "M(1)^3 Z^3", "M(-1)^3 Z^3"]

    def test_positivity_against_fidelity_witness(self):
        gap = min_eigenvalue(cluster_witness_matrix() - cluster_fidelity_witness())
        assert gap >= -1e-10

    def test_dominates_fidelity_witness_on_samples(self, cluster_plan):
        rng = np.random.default_rng(5)
        wc = Observable(cluster_fidelity_witness())
        for _ in range(20):
            rho = random_density_matrix(rng)
            assert cluster_plan.evaluate(rho) >= expectation(rho, wc) - 1e-12

    def test_mixed_setting_weights_are_a1_times_parity(self, cluster_plan):
        # Z-outcome sign on triple 1 (+1 for VVV, -1 for HHH) times M parity on triple 2
        weights = cluster_plan.weights[2]
        first = np.arange(64) >> 3
        a1 = np.where(first == 7, 1.0, np.where(first == 0, -1.0, 0.0))
        parity = parity_signs(qubits=[4, 5, 6])
        assert np.allclose(weights, -a1 * parity / (2 * math.sqrt(3)), atol=1e-12)

    def test_invariant_under_generator_relabeling(self, cluster_plan):
        gens = list(stabilizers_of_c6())
        rng = np.random.default_rng(9)
        states = [random_density_matrix(rng) for _ in range(5)]
        reference = [cluster_plan.evaluate(r) for r in states]
        for order in itertools.islice(itertools.permutations(gens), 0, None, 97):
            plan = cluster_witness_plan(StabilizerSet(tuple(order)))
            values = [plan.evaluate(r) for r in states]
            assert np.allclose(values, reference, atol=1e-12)

    def test_unmeasurable_generators(self):
        bad = StabilizerSet((PauliString("XZIIII"),))
        with pytest.raises(NotMeasurableError):
            cluster_witness_plan(bad)


class TestOracle:
    @pytest.mark.parametrize("name", ["ghz", "cluster"])
    def test_plan_matches_matrix(self, name):
        plan = plan_by_name(name)
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(100):
            rho = random_density_matrix(rng)
            worst = max(worst, abs(plan.evaluate(rho) - expectation(rho, plan.observable)))
        assert worst <= 1e-9

    def test_cluster_matrix_agrees_with_rhs(self, cluster_plan):
        rhs = (np.eye(64) / 2 - cluster6().projector().matrix + cluster6_tilde().projector().matrix)
        assert np.allclose(cluster_plan.observable.matrix, rhs, atol=1e-15)

    @pytest.mark.parametrize("name", ["ghz", "cluster"])
    def test_linearity(self, name):
        plan = plan_by_name(name)
        rng = np.random.default_rng(4)
        r1, r2 = random_density_matrix(rng), random_density_matrix(rng)
        for alpha in (0.0, 0.3, 0.9):
            mix = r1.mix(r2, alpha)
            expected = alpha * plan.evaluate(r1) + (1 - alpha) * plan.evaluate(r2)
            assert plan.evaluate(mix) == pytest.approx(expected, abs=1e-13)

    @pytest.mark.parametrize("name", ["ghz", "cluster"])
    def test_nonnegative_on_product_states(self, name):
        plan = plan_by_name(name)
        states = random_product_states(np.random.default_rng(77), 10_000)
        assert product_state_minimum(plan.observable, states) >= -1e-12

    def test_combine_rejects_wrong_length(self, ghz_plan):
        with pytest.raises(ValueError):
            ghz_plan.combine([np.ones(64) / 64])

    def test_plan_by_name_unknown(self):
        with pytest.raises(KeyError):
            plan_by_name("star")


class TestValidation:
    def test_ghz_passes(self, ghz_plan):
        diag = validate_witness(ghz_plan)
        assert diag.ok
        assert diag.max_schmidt_weight == pytest.approx(0.5, abs=1e-12)
        assert diag.oracle_residual <= 1e-9

    def test_cluster_passes(self, cluster_plan):
        diag = validate_witness(cluster_plan)
        assert diag.ok
        assert diag.positivity_gap >= -1e-10

    def test_corrupted_combiner_fails(self, ghz_plan):
        weights = ghz_plan.weights[:3] + (-ghz_plan.weights[3],) + ghz_plan.weights[4:]
        broken = WitnessPlan(ghz_plan.name, ghz_plan.observable, ghz_plan.target,
                             ghz_plan.settings, weights, ghz_plan.constant, False)
        with pytest.raises(WitnessValidationError) as info:
            validate_witness(broken)
        assert "oracle_residual" in info.value.failures
        diag = validate_witness(broken, strict=False)
        assert diag.oracle_residual > 1e-3

    def test_schmidt_weight_of_product_state(self):
        assert max_bipartition_weight(basis_state("HVHVHV")) == pytest.approx(1)


class TestFidelity:
    def test_ghz(self):
        est = fidelity_from_witness("ghz", -0.093)
        assert est.value == pytest.approx(0.593, abs=1e-12)
        assert not est.lower_bound

    def test_cluster(self):
        est = fidelity_from_witness("cluster", -0.095)
        assert est.value == pytest.approx(0.595, abs=1e-12)
        assert est.lower_bound

    def test_perfect(self):
        assert fidelity_from_witness("W_G", -0.5).value == pytest.approx(1)

    def test_ghz_is_exact(self, ghz_plan):
        rho = random_density_matrix(np.random.default_rng(8))
        f = fidelity_from_witness("ghz", ghz_plan.evaluate(rho)).value
        assert f == pytest.approx(expectation(rho, ghz_state().projector()), abs=1e-12)


class TestThreshold:
    def test_cluster(self, cluster_plan):
        assert noise_threshold(cluster_plan, cluster6()) == pytest.approx(0.5, abs=1e-9)

    def test_ghz(self, ghz_plan):
        assert noise_threshold(ghz_plan, ghz_state()) == pytest.approx(31 / 63, abs=1e-9)

    def test_no_sign_change(self, ghz_plan):
        with pytest.raises(NoSignChangeError):
            noise_threshold(ghz_plan, MixedState.maximally_mixed(6))

    def test_dimension_mismatch(self, ghz_plan):
        with pytest.raises(ValueError):
            noise_threshold(ghz_plan, ghz_state(4))


class TestReport:
    def test_json(self):
        report = WitnessReport.from_value("W_G", -0.093, 0.025)
        data = report.to_dict()
        assert set(data) == {"schema", "witness", "value", "stderr", "fidelity_bound",
                             "genuine_multipartite", "sigmas_below_zero"}
        assert data["sigmas_below_zero"] == pytest.approx(3.72)
        assert data["genuine_multipartite"] is True
        assert data["fidelity_bound"] == pytest.approx(0.593)

    def test_zero_stderr(self):
        assert WitnessReport.from_value("W_G", -0.5, 0.0).to_dict()["sigmas_below_zero"] is None
        assert WitnessReport.from_value("W_G", 0.0, 0.0).sigmas_below_zero == 0.0
