"""Dataset generation: phase-labeled spin-chain ground states, random-label
variants, and synthetic regression data under two encodings.

Every dataset is regenerable bit-exactly from its ``GeneratorSpec``; sampling
uses one ``default_rng`` stream per dataset and states are assembled in draw
order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .circuits import layered_circuit
from .errors import InvalidInputError
from .simulator import annni_hamiltonian, ground_state, run_circuit, zero_state

DEFAULT_KAPPA_RANGE = (0.0, 1.0)
DEFAULT_H_RANGE = (0.0, 2.0)


def boundary_h_i(kappa: float) -> float:
    """Ising-side phase boundary h_I(kappa) = ((1-k)/k)(1 - sqrt((1-3k+4k^2)/(1-k)))."""
    if not 0.0 < kappa < 1.0:
        raise InvalidInputError(f"h_I is defined on 0 < kappa < 1, got {kappa}")
    return (1.0 - kappa) / kappa * (1.0 - math.sqrt((1.0 - 3.0 * kappa + 4.0 * kappa ** 2) / (1.0 - kappa)))


def boundary_h_c(kappa: float) -> float:
    """Commensurate boundary h_C(kappa) = 1.05 sqrt((k-0.5)(k-0.1))."""
    radicand = (kappa - 0.5) * (kappa - 0.1)
    if radicand < 0.0:
        raise InvalidInputError(f"h_C radicand is negative at kappa={kappa}")
    return 1.05 * math.sqrt(radicand)


def ordered_boundary(kappa: float) -> float:
    """Boundary below which the ground state is labeled ordered.

    h_I governs kappa < 0.5 and h_C governs kappa >= 0.5; at kappa = 0 the
    analytic limit of h_I is 1.
    """
    if kappa < 0.0:
        raise InvalidInputError(f"kappa must be non-negative, got {kappa}")
    if kappa == 0.0:
        return 1.0
    if kappa < 0.5:
        return boundary_h_i(kappa)
    return boundary_h_c(kappa)


def phase_label(kappa: float, h: float) -> int:
    """+1 (ordered) iff h is strictly below the boundary at this kappa, else -1."""
    return 1 if h < ordered_boundary(kappa) else -1


def regression_target(x: np.ndarray) -> float:
    """f(x) = 1 - x.x/d; maps [-1,1]^d into [0,1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise InvalidInputError("regression input must be a non-empty vector")
    return 1.0 - float(x @ x) / x.size


@dataclass(frozen=True)
class GeneratorSpec:
    """Everything needed to regenerate a dataset bit-exactly."""

    kind: str  # "annni" | "regression"
    n_qubits: int
    m: int
    seed: int
    d: int = 0
    encoding: str = "none"
    kappa_range: tuple[float, float] = DEFAULT_KAPPA_RANGE
    h_range: tuple[float, float] = DEFAULT_H_RANGE
    label_seed: int | None = None  # set when labels were re-randomized

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "GeneratorSpec":
        raw = json.loads(text)
        raw["kappa_range"] = tuple(raw["kappa_range"])
        raw["h_range"] = tuple(raw["h_range"])
        return GeneratorSpec(**raw)


@dataclass(frozen=True, eq=False)
class Sample:
    state: np.ndarray
    label: float
    features: np.ndarray | None = None
    params: tuple[float, float] | None = None  # (kappa, h) provenance


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    samples: tuple[Sample, ...]
    generator: GeneratorSpec

    @property
    def m(self) -> int:
        return len(self.samples)

    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.float64)


def sample_annni_dataset(
    m: int,
    n_qubits: int,
    kappa_range: tuple[float, float] = DEFAULT_KAPPA_RANGE,
    h_range: tuple[float, float] = DEFAULT_H_RANGE,
    seed: int = 0,
) -> LabeledDataset:
    """Uniform (kappa, h) draws; state = chain ground state, label = phase."""
    if m < 1:
        raise InvalidInputError("need at least one sample")
    rng = np.random.default_rng(seed)
    pairs = rng.uniform(size=(m, 2))
    kappas = kappa_range[0] + (kappa_range[1] - kappa_range[0]) * pairs[:, 0]
    hs = h_range[0] + (h_range[1] - h_range[0]) * pairs[:, 1]
    samples = []
    for kappa, h in zip(kappas, hs):
        state = ground_state(annni_hamiltonian(n_qubits, kappa, h))
        samples.append(Sample(state, float(phase_label(kappa, h)), params=(float(kappa), float(h))))
    spec = GeneratorSpec(
        kind="annni", n_qubits=n_qubits, m=m, seed=seed,
        kappa_range=tuple(kappa_range), h_range=tuple(h_range),
    )
    return LabeledDataset(tuple(samples), spec)


def randomize_labels(dataset: LabeledDataset, seed: int) -> LabeledDataset:
    """Fresh copy with labels drawn independently and uniformly from {-1, +1}."""
    for s in dataset.samples:
        if s.label not in (-1.0, 1.0):
            raise InvalidInputError("label randomization applies to classification datasets")
    rng = np.random.default_rng(seed)
    labels = 2.0 * rng.integers(0, 2, size=dataset.m) - 1.0
    samples = tuple(
        Sample(s.state, float(y), s.features, s.params)
        for s, y in zip(dataset.samples, labels)
    )
    return LabeledDataset(samples, replace(dataset.generator, label_seed=seed))


def sample_regression_dataset(
    m: int, d: int, seed: int = 0, encoding: str = "angle_ry"
) -> LabeledDataset:
    """Features uniform on [-1,1]^d, state = encoded |0...0>, label = f(x).

    angle_ry uses one qubit per feature; special_diag slides a 3-qubit window
    per feature, so it needs N = d + 2 qubits.
    """
    if m < 1:
        raise InvalidInputError("need at least one sample")
    if d < 1:
        raise InvalidInputError("need at least one feature dimension")
    if encoding == "angle_ry":
        n_qubits = d
    elif encoding == "special_diag":
        n_qubits = d + 2
    else:
        raise InvalidInputError(f"unknown encoding {encoding!r} for regression data")
    enc_circuit = layered_circuit(n_qubits, 0, encoding=encoding)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-1.0, 1.0, size=(m, d))
    base = zero_state(n_qubits)
    samples = []
    for x in xs:
        state = run_circuit(enc_circuit, None, base, features=x)
        samples.append(Sample(state, regression_target(x), features=x.copy()))
    spec = GeneratorSpec(kind="regression", n_qubits=n_qubits, m=m, seed=seed,
                         d=d, encoding=encoding)
    return LabeledDataset(tuple(samples), spec)


def regenerate(spec: GeneratorSpec) -> LabeledDataset:
    """Rebuild a dataset from its descriptor (bit-exact)."""
    if spec.kind == "annni":
        ds = sample_annni_dataset(spec.m, spec.n_qubits, spec.kappa_range,
                                  spec.h_range, spec.seed)
    elif spec.kind == "regression":
        ds = sample_regression_dataset(spec.m, spec.d, spec.seed, spec.encoding)
    else:
        raise InvalidInputError(f"unknown dataset kind {spec.kind!r}")
    if spec.label_seed is not None:
        ds = randomize_labels(ds, spec.label_seed)
    return ds
