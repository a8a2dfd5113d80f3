"""Circuit descriptions and their compiled array form for the fast kernels.

The trained architecture is L layers of per-qubit Rz,Ry,Rz rotations followed
by a ring of CNOTs (control q -> target q+1, wrapping N -> 1).  Trainable
rotations use the half-angle generator convention exp(-i theta G / 2); data
encoding gates use full-angle forms and read from a separate feature vector,
so they never appear in the trainable parameter count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# op axis/type codes shared with the kernels
OP_RZ = 0
OP_RY = 1
OP_CNOT = 2
OP_DIAG_EXP = 3

# angle sources
SRC_NONE = -1
SRC_THETA = 0
SRC_DATA = 1

GATE_KINDS = ("rz", "ry", "cnot", "diag_exp")
ENCODINGS = ("none", "angle_ry", "special_diag")
DIAG_CONVENTIONS = ("minus", "plus")  # exp(-i x H) vs exp(+i x H)


@dataclass(frozen=True)
class Gate:
    """One circuit operation on 1-based qubit indices."""

    kind: str
    qubits: tuple[int, ...]
    param_slot: int = -1
    data_slot: int = -1
    half_angle: bool = True
    diag: tuple[float, ...] = ()

    def validate(self, n_qubits: int) -> None:
        if self.kind not in GATE_KINDS:
            raise InvalidInputError(f"unknown gate kind {self.kind!r}")
        for q in self.qubits:
            if not 1 <= q <= n_qubits:
                raise InvalidInputError(f"qubit {q} out of range 1..{n_qubits}")
        if self.param_slot >= 0 and self.data_slot >= 0:
            raise InvalidInputError("a gate cannot be both trainable and data-driven")
        if self.kind == "cnot":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise InvalidInputError("cnot needs distinct (control, target) qubits")
            if self.param_slot >= 0 or self.data_slot >= 0:
                raise InvalidInputError("cnot carries no angle")
        elif self.kind == "diag_exp":
            if len(self.qubits) != 3 or self.qubits[1] != self.qubits[0] + 1 \
                    or self.qubits[2] != self.qubits[0] + 2:
                raise InvalidInputError("diag_exp acts on a consecutive 3-qubit window")
            if len(self.diag) != 8:
                raise InvalidInputError("diag_exp needs 8 diagonal generator entries")
            if self.data_slot < 0:
                raise InvalidInputError("diag_exp is an encoding gate and needs a data slot")
        else:
            if len(self.qubits) != 1:
                raise InvalidInputError(f"{self.kind} acts on exactly one qubit")
            if self.param_slot < 0 and self.data_slot < 0:
                raise InvalidInputError("rotation gates need a parameter or data slot")


@dataclass(frozen=True)
class CircuitSpec:
    """Gate list plus bookkeeping: trainable slot count and feature count."""

    n_qubits: int
    layers: int
    encoding: str
    gates: tuple[Gate, ...]
    n_params: int
    n_features: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidInputError("need at least one qubit")
        if self.encoding not in ENCODINGS:
            raise InvalidInputError(f"unknown encoding {self.encoding!r}")
        for g in self.gates:
            g.validate(self.n_qubits)


def ring_cnot_pairs(n_qubits: int) -> list[tuple[int, int]]:
    """Ring entangler: (q, q+1) for q < N plus the wrap pair (N, 1)."""
    if n_qubits < 2:
        return []
    pairs = [(q, q + 1) for q in range(1, n_qubits)]
    pairs.append((n_qubits, 1))
    return pairs


def special_diag_entries(feature_index: int, convention: str = "minus") -> tuple[float, ...]:
    """Diagonal generator for encoding window i: entries (i+2)*k, k = 1..8.

    The kernel always applies exp(-i x * entry); the "plus" convention flips
    the stored sign so the gate becomes exp(+i x H).
    """
    if convention not in DIAG_CONVENTIONS:
        raise InvalidInputError(f"unknown diag convention {convention!r}")
    sign = 1.0 if convention == "minus" else -1.0
    base = feature_index + 2
    return tuple(sign * base * k for k in range(1, 9))


def layered_circuit(
    n_qubits: int,
    layers: int,
    encoding: str = "none",
    diag_convention: str = "minus",
) -> CircuitSpec:
    """Build the standard architecture: optional encoding prefix, then L layers."""
    if n_qubits < 1:
        raise InvalidInputError("need at least one qubit")
    if layers < 0:
        raise InvalidInputError("layer count must be non-negative")
    gates: list[Gate] = []
    n_features = 0
    if encoding == "angle_ry":
        n_features = n_qubits
        for q in range(1, n_qubits + 1):
            gates.append(Gate("ry", (q,), data_slot=q - 1, half_angle=False))
    elif encoding == "special_diag":
        if n_qubits < 3:
            raise InvalidInputError("special_diag encoding needs at least 3 qubits")
        n_features = n_qubits - 2
        for i in range(1, n_features + 1):
            gates.append(
                Gate(
                    "diag_exp",
                    (i, i + 1, i + 2),
                    data_slot=i - 1,
                    half_angle=False,
                    diag=special_diag_entries(i, diag_convention),
                )
            )

    slot = 0
    for _ in range(layers):
        for q in range(1, n_qubits + 1):
            gates.append(Gate("rz", (q,), param_slot=slot)); slot += 1
            gates.append(Gate("ry", (q,), param_slot=slot)); slot += 1
            gates.append(Gate("rz", (q,), param_slot=slot)); slot += 1
        for c, t in ring_cnot_pairs(n_qubits):
            gates.append(Gate("cnot", (c, t)))
    return CircuitSpec(
        n_qubits=n_qubits,
        layers=layers,
        encoding=encoding,
        gates=tuple(gates),
        n_params=slot,
        n_features=n_features,
    )


@dataclass(frozen=True, eq=False)
class Program:
    """Array form of a circuit, consumed by the numba/numpy kernels.

    ``tbits``/``cbits`` are bit positions (qubit q sits at bit n_qubits - q);
    for diag_exp, ``tbits`` holds the lowest bit of the 3-bit window.  Angles
    resolve as value[slot] * scale, where ``sources`` picks theta (0) or the
    feature vector (1) and ``scales`` is 0.5 for half-angle generators.
    """

    n_qubits: int
    kinds: np.ndarray
    tbits: np.ndarray
    cbits: np.ndarray
    slots: np.ndarray
    sources: np.ndarray
    scales: np.ndarray
    diags: np.ndarray
    n_params: int
    n_features: int


def compile_program(circuit: CircuitSpec) -> Program:
    """Flatten a CircuitSpec into contiguous arrays (cached on the instance).

    The cache avoids re-hashing long gate tuples in hot loops; CircuitSpec is
    frozen, so the compiled form can never go stale.
    """
    cached = getattr(circuit, "_program", None)
    if cached is not None:
        return cached
    program = _compile_uncached(circuit)
    object.__setattr__(circuit, "_program", program)
    return program


def _compile_uncached(circuit: CircuitSpec) -> Program:
    n = circuit.n_qubits
    n_ops = len(circuit.gates)
    kinds = np.zeros(n_ops, dtype=np.int64)
    tbits = np.zeros(n_ops, dtype=np.int64)
    cbits = np.full(n_ops, -1, dtype=np.int64)
    slots = np.full(n_ops, -1, dtype=np.int64)
    sources = np.full(n_ops, SRC_NONE, dtype=np.int64)
    scales = np.ones(n_ops, dtype=np.float64)
    diags = np.zeros((n_ops, 8), dtype=np.float64)
    for k, g in enumerate(circuit.gates):
        if g.kind in ("rz", "ry"):
            kinds[k] = OP_RZ if g.kind == "rz" else OP_RY
            tbits[k] = n - g.qubits[0]
            scales[k] = 0.5 if g.half_angle else 1.0
            if g.param_slot >= 0:
                sources[k] = SRC_THETA
                slots[k] = g.param_slot
            else:
                sources[k] = SRC_DATA
                slots[k] = g.data_slot
        elif g.kind == "cnot":
            kinds[k] = OP_CNOT
            cbits[k] = n - g.qubits[0]
            tbits[k] = n - g.qubits[1]
        else:  # diag_exp
            kinds[k] = OP_DIAG_EXP
            tbits[k] = n - g.qubits[2]  # lowest bit of the window
            sources[k] = SRC_DATA
            slots[k] = g.data_slot
            diags[k] = g.diag
    return Program(
        n_qubits=n,
        kinds=kinds,
        tbits=tbits,
        cbits=cbits,
        slots=slots,
        sources=sources,
        scales=scales,
        diags=diags,
        n_params=circuit.n_params,
        n_features=circuit.n_features,
    )
