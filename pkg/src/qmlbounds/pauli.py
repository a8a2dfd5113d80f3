"""Exact Pauli-basis algebra for states, observables, and circuits.

An N-qubit state rho decomposes as rho = (1/2^N) sum_i alpha_i P_i over the
4^N Pauli strings P_i, with alpha_i = Tr[rho P_i] real.  A unitary circuit
acts on the coefficient vector through a real orthogonal transfer matrix T,
and a single-Pauli-string observable is a one-hot coefficient vector m, so
every model output is B_O * m^T T alpha.

Basis order convention (fixed here once for the whole package): single-qubit
letters are ordered (I, Z, X, Y) and N-qubit strings are the lexicographic
tensor expansion of that alphabet with qubit 1 as the most significant
position.  Qubit 1 is likewise the most significant bit of computational
state indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CapacityError, InvalidInputError

CODE_CHARS = "IZXY"
_CODE_OF = {c: k for k, c in enumerate(CODE_CHARS)}

# Dense PTM construction is validation machinery; memory grows as 16^N.
PTM_QUBIT_CAP = 6

_PHASE_CYCLE = np.array([1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j])


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis, e.g. ``"ZIY"`` for Z1*I2*Y3."""

    codes: str
    coefficient: float = 1.0

    def __post_init__(self):
        if len(self.codes) < 1:
            raise InvalidInputError("Pauli string needs at least one qubit")
        bad = set(self.codes) - set(CODE_CHARS)
        if bad:
            raise InvalidInputError(f"invalid Pauli letters {sorted(bad)}; allowed: {CODE_CHARS}")

    @property
    def n_qubits(self) -> int:
        return len(self.codes)

    @property
    def basis_index(self) -> int:
        """Position of this string in the fixed (I,Z,X,Y)^(x)N basis order."""
        idx = 0
        for ch in self.codes:
            idx = 4 * idx + _CODE_OF[ch]
        return idx

    def masks(self) -> tuple[int, int]:
        """(z_mask, x_mask) bit masks; qubit 1 occupies the most significant bit.

        The string acts on basis states as
        P|s> = i^{|z&x|} * (-1)^{|z&s|} |s ^ x>.
        """
        n = self.n_qubits
        zm = xm = 0
        for k, ch in enumerate(self.codes):
            code = _CODE_OF[ch]
            bit = n - 1 - k
            zm |= (code & 1) << bit
            xm |= (code >> 1) << bit
        return zm, xm


@dataclass(frozen=True, eq=False)
class PauliCoeffVector:
    """Real coefficient vector of length 4^N in the fixed basis order."""

    entries: np.ndarray
    n_qubits: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 1 or entries.shape[0] != 4 ** self.n_qubits:
            raise InvalidInputError(
                f"coefficient vector must have length 4^{self.n_qubits}, got shape {entries.shape}"
            )


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Real 4^N x 4^N Pauli transfer matrix of a unitary circuit (orthogonal)."""

    entries: np.ndarray
    n_qubits: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)
        dim = 4 ** self.n_qubits
        if entries.shape != (dim, dim):
            raise InvalidInputError(f"transfer matrix must be {dim}x{dim}, got {entries.shape}")


@dataclass(frozen=True)
class Observable:
    """A single Pauli string scaled by its spectral norm B_O."""

    string: PauliString
    spectral_norm: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.spectral_norm) or self.spectral_norm <= 0:
            raise InvalidInputError("spectral norm must be finite and positive")

    @property
    def n_qubits(self) -> int:
        return self.string.n_qubits


def observable_z1(n_qubits: int, spectral_norm: float = 1.0) -> Observable:
    """Z on qubit 1, identity elsewhere."""
    return Observable(PauliString("Z" + "I" * (n_qubits - 1)), spectral_norm)


def observable_z_all(n_qubits: int, spectral_norm: float = 1.0) -> Observable:
    """Z on every qubit (parity readout)."""
    return Observable(PauliString("Z" * n_qubits), spectral_norm)


def pauli_string_from_index(index: int, n_qubits: int) -> PauliString:
    """Inverse of ``PauliString.basis_index`` for the given qubit count."""
    if not 0 <= index < 4 ** n_qubits:
        raise InvalidInputError(f"index {index} out of range for {n_qubits} qubits")
    codes = []
    for k in range(n_qubits):
        codes.append(CODE_CHARS[(index >> (2 * (n_qubits - 1 - k))) & 3])
    return PauliString("".join(codes))


def n_qubits_of_state(state: np.ndarray) -> int:
    """Qubit count of an amplitude vector; rejects non-power-of-two lengths."""
    state = np.asarray(state)
    if state.ndim != 1:
        raise InvalidInputError("state must be a 1-D amplitude vector")
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise InvalidInputError(f"state dimension {dim} is not a power of two")
    return n


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized fast transform: out[z] = sum_t (-1)^{|z&t|} v[t]."""
    v = v.copy()
    n = v.shape[0]
    h = 1
    while h < n:
        v = v.reshape(n // (2 * h), 2, h)
        top = v[:, 0, :] + v[:, 1, :]
        bot = v[:, 0, :] - v[:, 1, :]
        v = np.stack((top, bot), axis=1).reshape(n)
        h *= 2
    return v


@lru_cache(maxsize=None)
def _basis_tables(n_qubits: int):
    """Per-N lookup tables tying bit masks to basis indices.

    Returns (spread, zmasks, xmasks) where ``spread[m]`` places bit k of m at
    base-4 digit k, and ``zmasks[i]``/``xmasks[i]`` are the masks of basis
    index i (so i == 2*spread[x] + spread[z]).
    """
    dim = 1 << n_qubits
    spread = np.zeros(dim, dtype=np.int64)
    for k in range(n_qubits):
        spread[(np.arange(dim) >> k) & 1 == 1] += 4 ** k
    idx = 2 * spread[:, None] + spread[None, :]  # [x, z]
    zmasks = np.empty(4 ** n_qubits, dtype=np.int64)
    xmasks = np.empty(4 ** n_qubits, dtype=np.int64)
    m = np.arange(dim, dtype=np.int64)
    zmasks[idx] = np.broadcast_to(m[None, :], (dim, dim))
    xmasks[idx] = np.broadcast_to(m[:, None], (dim, dim))
    return spread, zmasks, xmasks


def _matrix_pauli_coeffs(mat: np.ndarray, n_qubits: int) -> np.ndarray:
    """Coefficients c_i = Tr[P_i mat] / 2^N for all 4^N strings at once.

    Uses one Walsh-Hadamard transform per X-mask: for fixed x,
    Tr[P_{z,x} mat] = i^{|z&x|} sum_t (-1)^{|z&t|} mat[t^x, t].
    """
    dim = 1 << n_qubits
    spread, _, _ = _basis_tables(n_qubits)
    t = np.arange(dim)
    out = np.empty(4 ** n_qubits, dtype=np.float64)
    z = np.arange(dim)
    for x in range(dim):
        diag = mat[t, t ^ x]
        w = _walsh_hadamard(diag)
        phases = _PHASE_CYCLE[np.bitwise_count(z & x) & 3]
        out[2 * spread[x] + spread[z]] = (phases * w).real / dim
    return out


def state_to_pauli_vector(state: np.ndarray) -> PauliCoeffVector:
    """Decompose a pure state |psi> into alpha_i = <psi|P_i|psi>.

    The squared norm of the result is exactly 2^N (purity identity).
    """
    state = np.asarray(state, dtype=np.complex128)
    n = n_qubits_of_state(state)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-12:
        raise InvalidInputError(f"state must be normalized, |psi| = {norm!r}")
    dim = 1 << n
    spread, _, _ = _basis_tables(n)
    t = np.arange(dim)
    z = np.arange(dim)
    out = np.empty(4 ** n, dtype=np.float64)
    for x in range(dim):
        v = np.conj(state[t ^ x]) * state
        w = _walsh_hadamard(v)
        phases = _PHASE_CYCLE[np.bitwise_count(z & x) & 3]
        out[2 * spread[x] + spread[z]] = (phases * w).real
    return PauliCoeffVector(out, n)


def observable_vector(obs: Observable) -> PauliCoeffVector:
    """One-hot coefficient vector of a single-Pauli-string observable."""
    n = obs.n_qubits
    entries = np.zeros(4 ** n, dtype=np.float64)
    entries[obs.string.basis_index] = 1.0
    return PauliCoeffVector(entries, n)


def expectation_from_pauli(
    m: PauliCoeffVector, alpha: PauliCoeffVector, spectral_norm: float = 1.0
) -> float:
    """Tr[O rho] = B_O * m^T alpha for one-hot m and state vector alpha."""
    if m.entries.shape != alpha.entries.shape:
        raise InvalidInputError(
            f"coefficient length mismatch: {m.entries.shape} vs {alpha.entries.shape}"
        )
    return float(spectral_norm * (m.entries @ alpha.entries))


def purity(alpha: PauliCoeffVector) -> float:
    """Tr[rho^2] = |alpha|^2 / 2^N."""
    return float(alpha.entries @ alpha.entries) / (1 << alpha.n_qubits)


def transfer_matrix(circuit, theta, features=None, qubit_cap: int = PTM_QUBIT_CAP) -> TransferMatrix:
    """Dense Pauli transfer matrix T with T_ij = Tr[P_i U P_j U^dag] / 2^N.

    Column j is obtained by conjugating P_j with the dense circuit unitary and
    re-decomposing; betas = T @ alphas for every input.  Capped by default at
    ``PTM_QUBIT_CAP`` qubits because the matrix is 4^N x 4^N; larger systems
    must use the statevector path instead.
    """
    from .simulator import dense_unitary

    n = circuit.n_qubits
    if n > qubit_cap:
        raise CapacityError(
            f"transfer matrix for N={n} exceeds the cap of {qubit_cap} qubits; "
            "use the statevector simulator for larger systems"
        )
    u = dense_unitary(circuit, theta, features)
    u_dag = u.conj().T
    dim = 1 << n
    _, zmasks, xmasks = _basis_tables(n)
    s = np.arange(dim)
    t_cols = np.empty((4 ** n, 4 ** n), dtype=np.float64)
    for j in range(4 ** n):
        zj, xj = int(zmasks[j]), int(xmasks[j])
        phase = _PHASE_CYCLE[int(np.bitwise_count(np.int64(zj & xj))) & 3]
        signs = 1.0 - 2.0 * (np.bitwise_count(s & zj) & 1)
        u_pj = u[:, s ^ xj] * (phase * signs)[None, :]
        conj = u_pj @ u_dag
        t_cols[:, j] = _matrix_pauli_coeffs(conj, n)
    return TransferMatrix(t_cols, n)


def model_weight_vector(t: TransferMatrix, m: PauliCoeffVector) -> PauliCoeffVector:
    """w = T^T m; unit norm because T is orthogonal."""
    if t.n_qubits != m.n_qubits:
        raise InvalidInputError(f"qubit mismatch: T has {t.n_qubits}, m has {m.n_qubits}")
    return PauliCoeffVector(t.entries.T @ m.entries, m.n_qubits)
