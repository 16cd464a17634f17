import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gslab.qalgebra import (
    SIGMA_Z,
    DimensionError,
    HermiticityError,
    MixedState,
    Observable,
    PauliString,
    PureState,
    basis_state,
    cluster6,
    cluster6_tilde,
    embed,
    equal_up_to_phase,
    expectation,
    ghz_state,
    m_operator,
    min_eigenvalue,
    partial_trace,
    permute_qubits,
    phi_plus,
    tensor,
)


def random_state(seed, n=6):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState(v / np.linalg.norm(v))


def random_mixed(seed, n=6, rank=4):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(1 << n, rank)) + 1j * rng.normal(size=(1 << n, rank))
    rho = g @ g.conj().T
    return MixedState(rho / np.trace(rho).real)


class TestTypes:
    def test_pure_state_rejects_bad_length(self):
        with pytest.raises(DimensionError):
            PureState(np.ones(3) / np.sqrt(3))

    def test_pure_state_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            PureState(np.array([1.0, 1.0]))
        assert PureState(np.array([1.0, 1.0]), normalized=False).n_qubits == 1

    def test_arrays_are_read_only(self):
        psi = phi_plus()
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0

    def test_mixed_state_checks(self):
        with pytest.raises(HermiticityError):
            MixedState(np.array([[0.5, 0.1], [0.2, 0.5]]))
        with pytest.raises(ValueError):
            MixedState(np.diag([0.7, 0.7]))
        with pytest.raises(ValueError):
            MixedState(np.diag([1.5, -0.5]))

    def test_observable_must_be_hermitian(self):
        with pytest.raises(HermiticityError):
            Observable(np.array([[0, 1], [0, 0]]))

    @pytest.mark.parametrize("letters", ["X", "YZ", "ZZIIII", "XYZXYZ", "IIY"])
    def test_pauli_string_is_hermitian_unitary_involution(self, letters):
        m = PauliString(letters, -1).matrix()
        assert np.allclose(m, m.conj().T, atol=1e-15)
        assert np.allclose(m @ m, np.eye(m.shape[0]), atol=1e-15)

    def test_pauli_string_validation(self):
        with pytest.raises(ValueError):
            PauliString("XQ")
        with pytest.raises(ValueError):
            PauliString("XX", 2)

    def test_pauli_commutation_matches_dense(self):
        for a, b in itertools.product(["XX", "XZ", "ZY", "YY", "IZ"], repeat=2):
            pa, pb = PauliString(a), PauliString(b)
            comm = pa.matrix() @ pb.matrix() - pb.matrix() @ pa.matrix()
            assert pa.commutes_with(pb) == np.allclose(comm, 0)


class TestTensor:
    def test_hh_is_basis_zero(self):
        out = tensor([basis_state("H"), basis_state("H")])
        assert np.array_equal(out.amplitudes, [1, 0, 0, 0])

    def test_three_epr_pairs_support(self):
        # expand (|HH>+|VV>)^3 / sqrt 8: qubit pairs (1,2), (3,4), (5,6) equal
        expected = {
            int("".join(str(b) for b in (a, a, c, c, d, d)), 2)
            for a, c, d in itertools.product((0, 1), repeat=3)
        }
        assert expected == {0b000000, 0b001100, 0b110000, 0b110011,
                            0b000011, 0b001111, 0b111100, 0b111111}
        amps = tensor([phi_plus()] * 3).amplitudes
        assert set(np.flatnonzero(np.abs(amps) > 1e-12)) == expected
        assert np.allclose(amps[list(expected)], 1 / np.sqrt(8), atol=1e-15)

    def test_zz_stabilizes_phi_plus(self):
        zz = tensor([Observable(SIGMA_Z, "Z"), Observable(SIGMA_Z, "Z")])
        assert np.allclose(zz.matrix @ phi_plus().amplitudes, phi_plus().amplitudes)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(TypeError):
            tensor([phi_plus(), Observable(SIGMA_Z)])

    def test_size_overflow(self):
        with pytest.raises(DimensionError):
            tensor([ghz_state(6), ghz_state(6), phi_plus()])

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_associative(self, seed):
        a, b, c = random_state(seed, 1), random_state(seed + 1, 2), random_state(seed + 2, 2)
        left = tensor([tensor([a, b]), c]).amplitudes
        right = tensor([a, tensor([b, c])]).amplitudes
        assert np.abs(left - right).max() <= 1e-15


class TestExpectation:
    @pytest.mark.parametrize("n", range(-2, 4))
    def test_ghz_m_fringe(self, n):
        m6 = m_operator(n)
        for _ in range(5):
            m6 = np.kron(m6, m_operator(n))
        value = expectation(ghz_state(6), Observable(m6))
        assert value == pytest.approx(np.cos(6 * n * np.pi / 6), abs=1e-12)
        assert value == pytest.approx((-1) ** n, abs=1e-12)

    def test_ghz_witness_on_ghz(self):
        w = Observable(np.eye(64) / 2 - ghz_state().projector().matrix)
        assert expectation(ghz_state(), w) == pytest.approx(-0.5, abs=1e-12)

    def test_maximally_mixed_overlap(self):
        assert expectation(MixedState.maximally_mixed(6), ghz_state().projector()) == pytest.approx(1 / 64)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            expectation(phi_plus(), PauliString("ZZZ"))

    @given(st.integers(0, 2**32 - 1),
           st.text(alphabet="IXYZ", min_size=6, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_pauli_expectation_bounded(self, seed, letters):
        value = expectation(random_state(seed), PauliString(letters))
        assert -1 - 1e-10 <= value <= 1 + 1e-10


class TestPartialTrace:
    def test_ghz_single_qubit_marginal(self):
        red = partial_trace(ghz_state(), {1})
        assert np.allclose(red.matrix, np.eye(2) / 2, atol=1e-12)

    def test_cluster_four_qubit_marginal(self):
        red = partial_trace(cluster6(), {1, 2, 3, 4})
        evals = np.sort(np.linalg.eigvalsh(red.matrix))[::-1]
        assert np.allclose(evals[:2], [0.5, 0.5], atol=1e-12)
        assert np.allclose(evals[2:], 0, atol=1e-12)

    def test_keep_all_is_identity(self):
        rho = random_mixed(3)
        assert partial_trace(rho, range(1, 7)) is rho

    def test_errors(self):
        with pytest.raises(ValueError):
            partial_trace(random_mixed(1), set())
        with pytest.raises(IndexError):
            partial_trace(random_mixed(1), {7})

    def test_matches_explicit_sum(self):
        rho = random_mixed(5, n=3)
        t = rho.matrix.reshape(2, 2, 2, 2, 2, 2)
        expected = np.einsum("abcdbf->acdf", t).reshape(4, 4)  # trace qubit 2
        assert np.allclose(partial_trace(rho, {1, 3}).matrix, expected, atol=1e-14)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=15, deadline=None)
    def test_composes(self, seed):
        rho = random_mixed(seed)
        two_step = partial_trace(partial_trace(rho, {1, 2, 3, 4}), {1, 2, 3})
        one_step = partial_trace(rho, {1, 2, 3})
        assert np.abs(two_step.matrix - one_step.matrix).max() <= 1e-12


class TestEigen:
    def test_sigma_z(self):
        assert min_eigenvalue(Observable(SIGMA_Z)) == pytest.approx(-1, abs=1e-10)

    def test_ghz_witness_spectrum(self):
        w = Observable(np.eye(64) / 2 - ghz_state().projector().matrix)
        assert min_eigenvalue(w) == pytest.approx(-0.5, abs=1e-10)

    def test_non_hermitian(self):
        with pytest.raises(HermiticityError):
            min_eigenvalue(np.array([[0, 1], [0, 0]], dtype=complex))

    @pytest.mark.parametrize("letters", ["X", "ZI", "IYZ", "XXXXXX", "IIIIIZ"])
    def test_non_identity_pauli(self, letters):
        assert min_eigenvalue(PauliString(letters).to_observable()) == pytest.approx(-1, abs=1e-10)


class TestHelpers:
    def test_cluster_tilde_orthogonal(self):
        assert abs(np.vdot(cluster6().amplitudes, cluster6_tilde().amplitudes)) < 1e-15

    def test_equal_up_to_phase(self):
        psi = random_state(11)
        assert equal_up_to_phase(psi, PureState(np.exp(0.7j) * psi.amplitudes))
        assert not equal_up_to_phase(psi, random_state(12))

    def test_embed_matches_kron(self):
        op = np.kron(SIGMA_Z, np.eye(2))
        assert np.allclose(embed(SIGMA_Z, [1], 2), op)
        # acting on qubits (3, 1) in that order
        cnot = np.eye(4)[[0, 1, 3, 2]]
        full = embed(cnot, [3, 1], 3)
        ket = basis_state("001").amplitudes  # qubit 3 = 1 is the control
        assert np.array_equal(np.flatnonzero(full @ ket), [0b101])

    def test_permute_qubits(self):
        psi = basis_state("110")
        out = permute_qubits(psi, [3, 1, 2])
        assert np.flatnonzero(out.amplitudes).tolist() == [0b011]
