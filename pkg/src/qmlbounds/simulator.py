"""Exact statevector simulation: circuit runs, expectations, spin-chain
ground states, and analytic gradients.

Everything here is noise-free and double precision.  Gradients come from a
reverse (adjoint) sweep costing O(#gates) gate applications per call; the
parameter-shift rule is kept as an independent oracle for testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .circuits import CircuitSpec, Gate, Program, compile_program
from .errors import CapacityError, InvalidInputError, NumericError
from .pauli import Observable, n_qubits_of_state

ANNNI_QUBIT_CAP = 12

_EMPTY = np.zeros(0, dtype=np.float64)


def zero_state(n_qubits: int) -> np.ndarray:
    """|0...0> on n qubits."""
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def _as_state(state, n_qubits: int | None = None) -> np.ndarray:
    out = np.ascontiguousarray(state, dtype=np.complex128)
    n = n_qubits_of_state(out)
    if n_qubits is not None and n != n_qubits:
        raise InvalidInputError(f"state has {n} qubits, expected {n_qubits}")
    return out


def _coerce_args(circuit: CircuitSpec, theta, features):
    theta = np.ascontiguousarray(theta, dtype=np.float64) if theta is not None else _EMPTY
    if theta.shape != (circuit.n_params,):
        raise InvalidInputError(
            f"theta has shape {theta.shape}, circuit needs ({circuit.n_params},)"
        )
    if circuit.n_features:
        if features is None:
            raise InvalidInputError("circuit has encoding gates; features are required")
        features = np.ascontiguousarray(features, dtype=np.float64)
        if features.shape != (circuit.n_features,):
            raise InvalidInputError(
                f"features have shape {features.shape}, circuit needs ({circuit.n_features},)"
            )
    else:
        features = _EMPTY
    return theta, features


def apply_gate(state: np.ndarray, gate: Gate, angle: float = 0.0) -> np.ndarray:
    """Apply a single gate; ``angle`` feeds its parameter or data slot."""
    out = _as_state(state).copy()
    n = n_qubits_of_state(out)
    gate.validate(n)
    single = CircuitSpec(n, 0, "none", (_reslot(gate),), _n_params_of(gate), _n_data_of(gate))
    prog = compile_program(single)
    theta = np.array([angle]) if _n_params_of(gate) else _EMPTY
    xdata = np.array([angle]) if _n_data_of(gate) else _EMPTY
    kernels().run_program(
        out, prog.kinds, prog.tbits, prog.cbits, prog.slots, prog.sources,
        prog.scales, prog.diags, theta, xdata,
    )
    return out


def _reslot(gate: Gate) -> Gate:
    if gate.param_slot >= 0:
        return Gate(gate.kind, gate.qubits, param_slot=0, half_angle=gate.half_angle,
                    diag=gate.diag)
    if gate.data_slot >= 0:
        return Gate(gate.kind, gate.qubits, data_slot=0, half_angle=gate.half_angle,
                    diag=gate.diag)
    return gate


def _n_params_of(gate: Gate) -> int:
    return 1 if gate.param_slot >= 0 else 0


def _n_data_of(gate: Gate) -> int:
    return 1 if gate.data_slot >= 0 else 0


def run_circuit(
    circuit: CircuitSpec, theta, input_state, features=None
) -> np.ndarray:
    """Apply the encoding prefix (if any) and all layers; returns a new state."""
    state = _as_state(input_state, circuit.n_qubits).copy()
    theta, features = _coerce_args(circuit, theta, features)
    prog = compile_program(circuit)
    kernels().run_program(
        state, prog.kinds, prog.tbits, prog.cbits, prog.slots, prog.sources,
        prog.scales, prog.diags, theta, features,
    )
    return state


def expectation(state: np.ndarray, obs: Observable) -> float:
    """<state|O|state> for a single-Pauli-string observable."""
    st = _as_state(state, obs.n_qubits)
    zm, xm = obs.string.masks()
    return obs.spectral_norm * float(kernels().pauli_expectation(st, zm, xm))


def dense_unitary(circuit: CircuitSpec, theta, features=None) -> np.ndarray:
    """Full 2^N x 2^N matrix of the circuit (column by column)."""
    n = circuit.n_qubits
    dim = 1 << n
    theta, features = _coerce_args(circuit, theta, features)
    prog = compile_program(circuit)
    u = np.zeros((dim, dim), dtype=np.complex128)
    for s in range(dim):
        col = np.zeros(dim, dtype=np.complex128)
        col[s] = 1.0
        kernels().run_program(
            col, prog.kinds, prog.tbits, prog.cbits, prog.slots, prog.sources,
            prog.scales, prog.diags, theta, features,
        )
        u[:, s] = col
    return u


def expectation_and_gradient(
    circuit: CircuitSpec, theta, input_state, obs: Observable, features=None
) -> tuple[float, np.ndarray]:
    """Model output and its exact gradient w.r.t. every trainable angle."""
    state = _as_state(input_state, circuit.n_qubits)
    if obs.n_qubits != circuit.n_qubits:
        raise InvalidInputError("observable and circuit qubit counts differ")
    theta, features = _coerce_args(circuit, theta, features)
    prog = compile_program(circuit)
    zm, xm = obs.string.masks()
    grad = np.zeros(circuit.n_params, dtype=np.float64)
    ev = kernels().adjoint_gradient(
        state, prog.kinds, prog.tbits, prog.cbits, prog.slots, prog.sources,
        prog.scales, prog.diags, theta, features, zm, xm, grad,
    )
    b = obs.spectral_norm
    return b * float(ev), b * grad


def adjoint_gradient(
    circuit: CircuitSpec, theta, input_state, obs: Observable, features=None
) -> np.ndarray:
    """Gradient of ``expectation(run_circuit(...))`` via one reverse sweep."""
    return expectation_and_gradient(circuit, theta, input_state, obs, features)[1]


def states_matrix(states) -> np.ndarray:
    """Stack amplitude vectors into one contiguous (n_states, 2^N) block."""
    return np.ascontiguousarray(np.stack([np.asarray(s) for s in states]),
                                dtype=np.complex128)


def batch_expectations(
    circuit: CircuitSpec, theta, states: np.ndarray, obs: Observable
) -> np.ndarray:
    """Model output for each row of a pre-stacked state matrix."""
    theta, features = _coerce_args(circuit, theta, None)
    prog = compile_program(circuit)
    zm, xm = obs.string.masks()
    out = np.empty(states.shape[0])
    kernels().batch_expectations(
        states, prog.kinds, prog.tbits, prog.cbits, prog.slots, prog.sources,
        prog.scales, prog.diags, theta, features, zm, xm, out,
    )
    return obs.spectral_norm * out


def batch_gradients(
    circuit: CircuitSpec, theta, states: np.ndarray, obs: Observable
) -> tuple[np.ndarray, np.ndarray]:
    """Per-row expectations and gradients, one compiled call for the batch."""
    theta, features = _coerce_args(circuit, theta, None)
    prog = compile_program(circuit)
    zm, xm = obs.string.masks()
    evs = np.empty(states.shape[0])
    grads = np.zeros((states.shape[0], circuit.n_params))
    kernels().batch_gradients(
        states, prog.kinds, prog.tbits, prog.cbits, prog.slots, prog.sources,
        prog.scales, prog.diags, theta, features, zm, xm, evs, grads,
    )
    b = obs.spectral_norm
    return b * evs, b * grads


def parameter_shift_gradient(
    circuit: CircuitSpec, theta, input_state, obs: Observable, features=None
) -> np.ndarray:
    """Shift-rule gradient: entry k is [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2.

    Exact only for half-angle trainable rotations with unique slots; data
    encoding angles are not trainable and cannot be shifted.
    """
    seen: set[int] = set()
    for g in circuit.gates:
        if g.param_slot >= 0:
            if not g.half_angle:
                raise InvalidInputError(
                    "parameter-shift requires the half-angle convention; "
                    "full-angle slots are encoding data, not trainable parameters"
                )
            if g.param_slot in seen:
                raise InvalidInputError("parameter-shift needs one gate per slot")
            seen.add(g.param_slot)
    state = _as_state(input_state, circuit.n_qubits)
    theta = np.asarray(theta, dtype=np.float64).copy()
    grad = np.zeros(circuit.n_params)
    for k in range(circuit.n_params):
        orig = theta[k]
        theta[k] = orig + np.pi / 2
        plus = expectation(run_circuit(circuit, theta, state, features), obs)
        theta[k] = orig - np.pi / 2
        minus = expectation(run_circuit(circuit, theta, state, features), obs)
        theta[k] = orig
        grad[k] = 0.5 * (plus - minus)
    return grad


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense Hermitian Hamiltonian with its construction parameters."""

    matrix: np.ndarray
    n_qubits: int
    kappa: float
    h: float


def annni_hamiltonian(
    n_qubits: int, kappa: float, h: float, qubit_cap: int = ANNNI_QUBIT_CAP
) -> HamiltonianMatrix:
    """Axial next-nearest-neighbor Ising chain, open boundary conditions.

    H = -( sum_{i<N} X_i X_{i+1}  -  kappa * sum_{i<N-1} X_i X_{i+2}
           + h * sum_i Z_i ).

    X_i X_j is a bit-flip permutation in the computational basis and the Z
    term is diagonal, so the matrix is assembled by direct indexing.
    """
    if n_qubits < 2:
        raise InvalidInputError("the chain needs at least 2 qubits")
    if n_qubits > qubit_cap:
        raise CapacityError(f"N={n_qubits} exceeds the dense-solve cap of {qubit_cap}")
    dim = 1 << n_qubits
    bit = lambda q: 1 << (n_qubits - q)  # noqa: E731 - 1-based qubit -> bit position
    s = np.arange(dim)
    mat = np.zeros((dim, dim), dtype=np.float64)
    for i in range(1, n_qubits):
        mat[s ^ (bit(i) | bit(i + 1)), s] -= 1.0
    for i in range(1, n_qubits - 1):
        mat[s ^ (bit(i) | bit(i + 2)), s] += kappa
    diag = np.zeros(dim)
    for i in range(1, n_qubits + 1):
        diag -= h * (1.0 - 2.0 * ((s >> (n_qubits - i)) & 1))
    mat[s, s] += diag
    return HamiltonianMatrix(mat, n_qubits, kappa, h)


def ground_state(hamiltonian: HamiltonianMatrix) -> np.ndarray:
    """Normalized eigenvector of the smallest eigenvalue.

    Deterministic across runs: eigenvalues come sorted from the dense solver,
    ties resolve to the first column, and the global phase is fixed by making
    the largest-magnitude amplitude real and positive.
    """
    try:
        _, vecs = np.linalg.eigh(hamiltonian.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"eigensolver failed for N={hamiltonian.n_qubits}, "
            f"kappa={hamiltonian.kappa}, h={hamiltonian.h}: {exc}"
        ) from exc
    state = np.ascontiguousarray(vecs[:, 0], dtype=np.complex128)
    anchor = state[int(np.argmax(np.abs(state)))]
    state *= np.conj(anchor) / abs(anchor)
    state /= np.linalg.norm(state)
    return state
