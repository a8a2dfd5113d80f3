"""Shared test oracles: dense-matrix constructions kept deliberately
independent of the package's mask/kernel machinery."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
ZM = np.array([[1, 0], [0, -1]], dtype=complex)
XM = np.array([[0, 1], [1, 0]], dtype=complex)
YM = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_BY_CHAR = {"I": I2, "Z": ZM, "X": XM, "Y": YM}


def kron_chain(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_pauli(codes: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, qubit 1 leftmost."""
    return kron_chain([PAULI_BY_CHAR[c] for c in codes])


def embed_1q(mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return kron_chain([mat if q == qubit else I2 for q in range(1, n + 1)])


def dense_cnot(control: int, target: int, n: int) -> np.ndarray:
    dim = 1 << n
    u = np.zeros((dim, dim), dtype=complex)
    for s in range(dim):
        if (s >> (n - control)) & 1:
            u[s ^ (1 << (n - target)), s] = 1.0
        else:
            u[s, s] = 1.0
    return u


def dense_gate(gate, n: int, theta, features) -> np.ndarray:
    """Matrix of one package Gate, built from expm / explicit permutations."""
    if gate.kind == "cnot":
        return dense_cnot(gate.qubits[0], gate.qubits[1], n)
    if gate.kind == "diag_exp":
        x = features[gate.data_slot]
        dim = 1 << n
        shift = n - gate.qubits[2]
        d = np.array([np.exp(-1j * x * gate.diag[(s >> shift) & 7]) for s in range(dim)])
        return np.diag(d)
    angle = theta[gate.param_slot] if gate.param_slot >= 0 else features[gate.data_slot]
    b = angle * (0.5 if gate.half_angle else 1.0)
    gen = ZM if gate.kind == "rz" else YM
    return embed_1q(expm(-1j * b * gen), gate.qubits[0], n)


def dense_circuit_unitary(circuit, theta, features=None) -> np.ndarray:
    u = np.eye(1 << circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        u = dense_gate(g, circuit.n_qubits, theta, features) @ u
    return u


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
