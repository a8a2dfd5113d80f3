"""Losses, per-sample risks, optimizers, and the mini-batch training loop.

Training minimizes a loss (hinge, MSE, or the class-projector trace loss)
while errors are always reported through a per-sample risk function; the two
are deliberately separate.  Runs are bit-reproducible for a fixed
(TrainConfig, dataset): the parameter init draws from ``default_rng(seed)``
and each epoch's shuffle draws from ``default_rng((seed, epoch))``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .circuits import CircuitSpec
from .datasets import LabeledDataset, Sample
from .errors import InvalidInputError, NumericError
from .pauli import Observable
from .simulator import batch_expectations, batch_gradients, states_matrix

LOSSES = ("hinge", "mse", "caro")
OPTIMIZERS = ("sgd", "adam", "rmsprop", "adagrad", "lion")
CLASS_PROJECTOR_CHOICES = ("zero", "one")  # which basis state marks the +1 class


class RiskKind(enum.Enum):
    """Per-sample risk with its bound C and Lipschitz constant L."""

    ZERO_ONE = ("zero_one", 1.0, 0.5)
    ABSOLUTE = ("absolute", 1.0, 1.0)
    CARO_TRACE = ("caro_trace", 1.0, 1.0)

    def __init__(self, tag: str, bound_c: float, lipschitz: float):
        self.tag = tag
        self.bound_c = bound_c
        self.lipschitz = lipschitz

    @staticmethod
    def from_tag(tag: str) -> "RiskKind":
        for kind in RiskKind:
            if kind.tag == tag:
                return kind
        raise InvalidInputError(f"unknown risk kind {tag!r}")


def _samples(batch) -> tuple[Sample, ...]:
    if isinstance(batch, LabeledDataset):
        return batch.samples
    return tuple(batch)


def _projector_sign(y: float, positive_class_state: str) -> float:
    """Sign s with risk (1 - s*<Z1>)/2; +1 class targets |0> or |1> on qubit 1."""
    if positive_class_state not in CLASS_PROJECTOR_CHOICES:
        raise InvalidInputError(f"positive_class_state must be one of {CLASS_PROJECTOR_CHOICES}")
    return y if positive_class_state == "zero" else -y


def predictions(circuit: CircuitSpec, theta, batch, obs: Observable) -> np.ndarray:
    """Model output for every sample in order."""
    return batch_expectations(circuit, theta,
                              states_matrix([s.state for s in _samples(batch)]), obs)


def hinge_loss(theta, batch, circuit: CircuitSpec, obs: Observable) -> float:
    """mean max{0, 1 - y * <O>} over the batch; labels must be +-1."""
    samples = _samples(batch)
    labels = np.array([s.label for s in samples])
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise InvalidInputError("hinge loss needs labels in {-1, +1}")
    preds = predictions(circuit, theta, samples, obs)
    return float(np.mean(np.maximum(0.0, 1.0 - labels * preds)))


def mse_loss(theta, batch, circuit: CircuitSpec, obs: Observable) -> float:
    """mean (y - <O>)^2 over the batch."""
    samples = _samples(batch)
    labels = np.array([s.label for s in samples])
    preds = predictions(circuit, theta, samples, obs)
    return float(np.mean((labels - preds) ** 2))


def caro_loss(theta, batch, circuit: CircuitSpec, obs: Observable,
              positive_class_state: str = "zero") -> float:
    """mean (1 - Tr[rho_y . out]) with rho_y a qubit-1 basis projector.

    Tr[|0><0|_1 rho] = (1 + <Z1>)/2, so the per-sample value reduces to
    (1 - s*<Z1>)/2 with s the projector sign of the label.
    """
    samples = _samples(batch)
    labels = np.array([s.label for s in samples])
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise InvalidInputError("the trace loss needs labels in {-1, +1}")
    signs = np.array([_projector_sign(y, positive_class_state) for y in labels])
    preds = predictions(circuit, theta, samples, obs)
    return float(np.mean(0.5 * (1.0 - signs * preds)))


def risk(kind: RiskKind, prediction: float, y: float,
         positive_class_state: str = "zero") -> float:
    """Per-sample risk value; sign(0) counts as +1 for the 0-1 risk."""
    if kind is RiskKind.ZERO_ONE:
        predicted = 1.0 if prediction >= 0.0 else -1.0
        return 0.0 if predicted == y else 1.0
    if kind is RiskKind.ABSOLUTE:
        return abs(prediction - y)
    return 0.5 * (1.0 - _projector_sign(y, positive_class_state) * prediction)


def evaluate(theta, dataset, circuit: CircuitSpec, obs: Observable,
             kind: RiskKind, positive_class_state: str = "zero") -> float:
    """Mean per-sample risk over a dataset (training or test error)."""
    samples = _samples(dataset)
    if not samples:
        raise InvalidInputError("cannot evaluate on an empty dataset")
    preds = predictions(circuit, theta, samples, obs)
    vals = [risk(kind, p, s.label, positive_class_state)
            for p, s in zip(preds, samples)]
    return float(np.mean(vals))


def generalization_gap(train_error: float, test_error: float) -> float:
    """Test error minus training error (may be negative)."""
    return test_error - train_error


@dataclass(frozen=True)
class OptimizerSpec:
    """Optimizer choice plus hyperparameters (defaults are the common ones)."""

    kind: str = "adam"
    learning_rate: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    rms_decay: float = 0.99
    adagrad_eps: float = 1e-10
    lion_beta1: float = 0.9
    lion_beta2: float = 0.99

    def __post_init__(self):
        if self.kind not in OPTIMIZERS:
            raise InvalidInputError(f"unknown optimizer {self.kind!r}")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning rate must be positive")


class Optimizer:
    """Stateful update rule; ``step`` consumes one batch gradient."""

    def __init__(self, spec: OptimizerSpec, n_params: int):
        self.spec = spec
        self.t = 0
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(grad)):
            raise NumericError("non-finite gradient in optimizer step")
        s = self.spec
        eta = s.learning_rate
        self.t += 1
        if s.kind == "sgd":
            return theta - eta * grad
        if s.kind == "adam":
            self.m = s.beta1 * self.m + (1 - s.beta1) * grad
            self.v = s.beta2 * self.v + (1 - s.beta2) * grad ** 2
            m_hat = self.m / (1 - s.beta1 ** self.t)
            v_hat = self.v / (1 - s.beta2 ** self.t)
            return theta - eta * m_hat / (np.sqrt(v_hat) + s.eps)
        if s.kind == "rmsprop":
            self.v = s.rms_decay * self.v + (1 - s.rms_decay) * grad ** 2
            return theta - eta * grad / (np.sqrt(self.v) + s.eps)
        if s.kind == "adagrad":
            self.v = self.v + grad ** 2
            return theta - eta * grad / (np.sqrt(self.v) + s.adagrad_eps)
        # lion: sign of the interpolated momentum, then slow momentum update
        update = np.sign(s.lion_beta1 * self.m + (1 - s.lion_beta1) * grad)
        self.m = s.lion_beta2 * self.m + (1 - s.lion_beta2) * grad
        return theta - eta * update


def make_optimizer(spec: OptimizerSpec, n_params: int) -> Optimizer:
    return Optimizer(spec, n_params)


@dataclass(frozen=True)
class TrainConfig:
    loss: str = "hinge"
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    batch_size: int = 200
    epochs: int = 100
    seed: int = 0
    positive_class_state: str = "zero"
    risk: RiskKind | None = None  # defaults to the loss's natural risk
    eval_test_every: int = 0  # 0: only after the final epoch

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise InvalidInputError(f"unknown loss {self.loss!r}")
        if self.batch_size < 1 or self.epochs < 1:
            raise InvalidInputError("batch_size and epochs must be >= 1")

    def risk_kind(self) -> RiskKind:
        if self.risk is not None:
            return self.risk
        return {"hinge": RiskKind.ZERO_ONE,
                "mse": RiskKind.ABSOLUTE,
                "caro": RiskKind.CARO_TRACE}[self.loss]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    loss: float
    train_error: float
    test_error: float  # nan when not evaluated this epoch


@dataclass(frozen=True, eq=False)
class TrainHistory:
    records: tuple[EpochRecord, ...]
    final_theta: np.ndarray


def _loss_values_and_coefs(loss: str, preds, labels, signs):
    """Per-sample loss values and d(loss)/d(prediction) coefficients."""
    if loss == "hinge":
        margins = 1.0 - labels * preds
        active = margins > 0.0
        return np.maximum(margins, 0.0), np.where(active, -labels, 0.0)
    if loss == "mse":
        return (labels - preds) ** 2, 2.0 * (preds - labels)
    return 0.5 * (1.0 - signs * preds), -0.5 * signs


def train(
    config: TrainConfig,
    dataset: LabeledDataset,
    circuit: CircuitSpec,
    obs: Observable,
    test_dataset: LabeledDataset | None = None,
) -> TrainHistory:
    """Mini-batch training; the final partial batch is kept, never dropped."""
    samples = _samples(dataset)
    if not samples:
        raise InvalidInputError("cannot train on an empty dataset")
    labels = np.array([s.label for s in samples])
    if config.loss in ("hinge", "caro") and not np.all(np.isin(labels, (-1.0, 1.0))):
        raise InvalidInputError(f"{config.loss} loss needs labels in {{-1, +1}}")
    signs = np.array([_projector_sign(y, config.positive_class_state) for y in labels]) \
        if config.loss == "caro" else labels
    kind = config.risk_kind()
    m_total = len(samples)
    states = states_matrix([s.state for s in samples])
    test_states = None
    test_labels = None
    if test_dataset is not None:
        test_samples = _samples(test_dataset)
        test_states = states_matrix([s.state for s in test_samples])
        test_labels = np.array([s.label for s in test_samples])

    def mean_risk(preds, ys):
        vals = [risk(kind, p, y, config.positive_class_state) for p, y in zip(preds, ys)]
        return float(np.mean(vals))

    theta = np.random.default_rng(config.seed).normal(size=circuit.n_params)
    opt = make_optimizer(config.optimizer, circuit.n_params)
    records = []
    for epoch in range(1, config.epochs + 1):
        perm = np.random.default_rng((config.seed, epoch)).permutation(m_total)
        for start in range(0, m_total, config.batch_size):
            idx = perm[start:start + config.batch_size]
            evs, grads = batch_gradients(circuit, theta, states[idx], obs)
            _, coefs = _loss_values_and_coefs(config.loss, evs, labels[idx], signs[idx])
            theta = opt.step(theta, (coefs @ grads) / len(idx))

        preds = batch_expectations(circuit, theta, states, obs)
        loss_vals, _ = _loss_values_and_coefs(config.loss, preds, labels, signs)
        train_error = mean_risk(preds, labels)
        want_test = test_dataset is not None and (
            epoch == config.epochs
            or (config.eval_test_every and epoch % config.eval_test_every == 0)
        )
        test_error = (
            mean_risk(batch_expectations(circuit, theta, test_states, obs), test_labels)
            if want_test else float("nan")
        )
        records.append(EpochRecord(epoch, float(np.mean(loss_vals)), train_error, test_error))
    return TrainHistory(tuple(records), theta)
