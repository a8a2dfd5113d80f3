"""Pauli-basis algebra: decompositions, transfer matrices, expectations."""

import numpy as np
import pytest

from qmlbounds import (CapacityError, InvalidInputError, Observable,
                       PauliCoeffVector, PauliString, expectation_from_pauli,
                       layered_circuit, model_weight_vector, observable_vector,
                       pauli_string_from_index, purity, run_circuit,
                       state_to_pauli_vector, transfer_matrix)
from qmlbounds import expectation as sv_expectation
from qmlbounds.pauli import n_qubits_of_state

from conftest import dense_circuit_unitary, dense_pauli, random_state


class TestPauliString:
    def test_rejects_bad_letters(self):
        with pytest.raises(InvalidInputError):
            PauliString("ZQ")
        with pytest.raises(InvalidInputError):
            PauliString("")

    def test_basis_index_order_single_qubit(self):
        assert [PauliString(c).basis_index for c in "IZXY"] == [0, 1, 2, 3]

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_index_roundtrip_all_strings(self, n):
        for idx in range(4 ** n):
            assert pauli_string_from_index(idx, n).basis_index == idx

    def test_index_out_of_range(self):
        with pytest.raises(InvalidInputError):
            pauli_string_from_index(16, 1)


class TestStateDecomposition:
    def test_zero_state_one_qubit(self):
        alpha = state_to_pauli_vector(np.array([1.0, 0.0]))
        assert np.allclose(alpha.entries, [1, 1, 0, 0])

    def test_zero_state_two_qubits(self):
        alpha = state_to_pauli_vector(np.array([1.0, 0, 0, 0]))
        hot = {PauliString(c).basis_index for c in ("II", "IZ", "ZI", "ZZ")}
        for idx in range(16):
            assert alpha.entries[idx] == pytest.approx(1.0 if idx in hot else 0.0, abs=1e-14)

    def test_matches_bruteforce_traces(self, rng):
        psi = random_state(rng, 2)
        rho = np.outer(psi, psi.conj())
        alpha = state_to_pauli_vector(psi)
        for idx in range(16):
            expected = np.trace(dense_pauli(pauli_string_from_index(idx, 2).codes) @ rho).real
            assert alpha.entries[idx] == pytest.approx(expected, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(InvalidInputError):
            state_to_pauli_vector(np.array([1.0, 1.0]))

    def test_non_power_of_two_rejected(self):
        with pytest.raises(InvalidInputError):
            state_to_pauli_vector(np.ones(3) / np.sqrt(3))
        with pytest.raises(InvalidInputError):
            n_qubits_of_state(np.ones((2, 2)))

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_purity_identity(self, rng, n):
        alpha = state_to_pauli_vector(random_state(rng, n))
        assert alpha.entries @ alpha.entries == pytest.approx(2 ** n, abs=1e-9)


class TestObservableVector:
    def test_z1_single_qubit(self):
        assert np.array_equal(observable_vector(Observable(PauliString("Z"))).entries,
                              [0, 1, 0, 0])

    def test_z1_two_qubits(self):
        m = observable_vector(Observable(PauliString("ZI")))
        assert m.entries[PauliString("ZI").basis_index] == 1.0
        assert m.entries.sum() == 1.0

    def test_xyz_three_qubits_matches_enumeration(self):
        # oracle: enumerate the basis order explicitly
        order = [a + b + c for a in "IZXY" for b in "IZXY" for c in "IZXY"]
        m = observable_vector(Observable(PauliString("XYZ")))
        assert m.entries[order.index("XYZ")] == 1.0

    def test_spectral_norm_validated(self):
        with pytest.raises(InvalidInputError):
            Observable(PauliString("Z"), 0.0)
        with pytest.raises(InvalidInputError):
            Observable(PauliString("Z"), float("inf"))


class TestExpectationFromPauli:
    def test_z_on_zero_state(self):
        m = observable_vector(Observable(PauliString("Z")))
        alpha = state_to_pauli_vector(np.array([1.0, 0.0]))
        assert expectation_from_pauli(m, alpha, 1.0) == pytest.approx(1.0)

    def test_zero_norm_gives_zero(self, rng):
        n = 2
        m = observable_vector(Observable(PauliString("XY")))
        alpha = state_to_pauli_vector(random_state(rng, n))
        assert expectation_from_pauli(m, alpha, 0.0) == 0.0

    def test_matches_statevector_backend(self, rng):
        psi = random_state(rng, 2)
        for idx in range(16):
            obs = Observable(pauli_string_from_index(idx, 2), 1.0)
            via_pauli = expectation_from_pauli(
                observable_vector(obs), state_to_pauli_vector(psi), 1.0)
            assert via_pauli == pytest.approx(sv_expectation(psi, obs), abs=1e-10)

    def test_length_mismatch(self):
        m = observable_vector(Observable(PauliString("Z")))
        alpha = state_to_pauli_vector(np.array([1.0, 0, 0, 0]))
        with pytest.raises(InvalidInputError):
            expectation_from_pauli(m, alpha, 1.0)

    def test_bounded_by_one(self, rng):
        # |m^T alpha| <= 1 for every one-hot m and pure-state alpha
        for _ in range(20):
            n = int(rng.integers(1, 4))
            alpha = state_to_pauli_vector(random_state(rng, n))
            idx = int(rng.integers(0, 4 ** n))
            m = observable_vector(Observable(pauli_string_from_index(idx, n)))
            assert abs(expectation_from_pauli(m, alpha, 1.0)) <= 1.0 + 1e-12


class TestPurity:
    def test_pure_state(self, rng):
        assert purity(state_to_pauli_vector(random_state(rng, 2))) == pytest.approx(1.0)

    def test_maximally_mixed(self):
        entries = np.zeros(16)
        entries[0] = 1.0  # only the identity coefficient survives
        assert purity(PauliCoeffVector(entries, 2)) == pytest.approx(0.25)

    def test_equal_mixture(self):
        a0 = state_to_pauli_vector(np.array([1.0, 0.0])).entries
        a1 = state_to_pauli_vector(np.array([0.0, 1.0])).entries
        mixed = PauliCoeffVector(0.5 * a0 + 0.5 * a1, 1)
        assert purity(mixed) == pytest.approx(0.5)


class TestTransferMatrix:
    def test_empty_circuit_is_identity(self):
        t = transfer_matrix(layered_circuit(2, 0), np.zeros(0))
        assert np.array_equal(t.entries, np.eye(16))

    def test_single_rz_matches_dense_conjugation(self):
        from qmlbounds.circuits import CircuitSpec, Gate

        circ = CircuitSpec(1, 0, "none", (Gate("rz", (1,), param_slot=0),), 1, 0)
        theta = np.array([0.37])
        t = transfer_matrix(circ, theta)
        u = dense_circuit_unitary(circ, theta)
        for j in range(4):
            pj = dense_pauli(pauli_string_from_index(j, 1).codes)
            conj = u @ pj @ u.conj().T
            for i in range(4):
                pi = dense_pauli(pauli_string_from_index(i, 1).codes)
                expected = np.trace(pi @ conj).real / 2
                assert t.entries[i, j] == pytest.approx(expected, abs=1e-12)

    def test_orthogonality_random_circuits(self, rng):
        for _ in range(5):
            n = int(rng.integers(1, 5))
            circ = layered_circuit(n, int(rng.integers(1, 3)))
            t = transfer_matrix(circ, rng.normal(size=circ.n_params))
            dev = np.abs(t.entries.T @ t.entries - np.eye(4 ** n)).max()
            assert dev <= 1e-10

    def test_capacity_error_above_cap(self):
        circ = layered_circuit(3, 1)
        with pytest.raises(CapacityError):
            transfer_matrix(circ, np.zeros(circ.n_params), qubit_cap=2)


class TestModelWeightVector:
    def test_identity_circuit_returns_m(self):
        t = transfer_matrix(layered_circuit(2, 0), np.zeros(0))
        m = observable_vector(Observable(PauliString("XZ")))
        assert np.array_equal(model_weight_vector(t, m).entries, m.entries)

    def test_unit_norm_and_matches_simulator(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 4))
            circ = layered_circuit(n, int(rng.integers(1, 3)))
            theta = rng.normal(size=circ.n_params)
            t = transfer_matrix(circ, theta)
            obs = Observable(pauli_string_from_index(int(rng.integers(0, 4 ** n)), n), 1.7)
            m = observable_vector(obs)
            w = model_weight_vector(t, m)
            assert np.linalg.norm(w.entries) == pytest.approx(1.0, abs=1e-10)
            psi = random_state(rng, n)
            alpha = state_to_pauli_vector(psi)
            h_pauli = obs.spectral_norm * float(w.entries @ alpha.entries)
            h_sv = sv_expectation(run_circuit(circ, theta, psi), obs)
            assert h_pauli == pytest.approx(h_sv, abs=1e-10)

    def test_dimension_mismatch(self):
        t = transfer_matrix(layered_circuit(1, 0), np.zeros(0))
        m = observable_vector(Observable(PauliString("ZZ")))
        with pytest.raises(InvalidInputError):
            model_weight_vector(t, m)
