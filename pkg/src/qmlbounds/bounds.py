"""Closed-form generalization bounds and an empirical complexity estimator.

The tight bound family evaluates 2 L B_O sqrt(1/M) + 3 C sqrt(log(2/d)/(2M))
and its task specializations.  Three competitor bounds are evaluated exactly
as published: a gate-count bound, an encoding-dependent bound (with its
integral term omitted, as in the published numerics), and an SGD-stability
bound whose value explodes exponentially in the epoch count and is therefore
computed in log space.

"log" means the natural logarithm throughout; pass ``log_base="two"`` to any
formula for a base-2 sensitivity check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import CircuitSpec
from .errors import InvalidInputError
from .pauli import Observable
from .simulator import batch_expectations, batch_gradients, states_matrix
from .training import OptimizerSpec, make_optimizer

_SQRT_PI = math.sqrt(math.pi)
_RSQRT_PI = 1.0 / math.sqrt(math.pi)

# Rational minimax coefficients for the error function (Cody 1969 style):
# |x| <= 0.46875 evaluates erf directly, 0.46875 < |x| <= 4 and |x| > 4
# evaluate erfc with an explicit exp(-x^2) factor.
_ERF_A = (3.16112374387056560e0, 1.13864154151050156e2, 3.77485237685302021e2,
          3.20937758913846947e3, 1.85777706184603153e-1)
_ERF_B = (2.36012909523441209e1, 2.44024637934444173e2, 1.28261652607737228e3,
          2.84423683343917062e3)
_ERF_C = (5.64188496988670089e-1, 8.88314979438837594e0, 6.61191906371416295e1,
          2.98635138197400131e2, 8.81952221241769090e2, 1.71204761263407058e3,
          2.05107837782607147e3, 1.23033935479799725e3, 2.15311535474403846e-8)
_ERF_D = (1.57449261107098347e1, 1.17693950891312499e2, 5.37181101862009858e2,
          1.62138957456669019e3, 3.29079923573345963e3, 4.36261909014324716e3,
          3.43936767414372164e3, 1.23033935480374942e3)
_ERF_P = (3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
          1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2)
_ERF_Q = (2.56852019228982242e0, 1.87295284992346047e0, 5.27905102951428412e-1,
          6.05183413124413191e-2, 2.33520497626869185e-3)


def _erfc_scaled_tail(y: float) -> float:
    """erfc(y) for y > 0.46875 with the split exp trick for accuracy."""
    if y <= 4.0:
        xnum = _ERF_C[8] * y
        xden = y
        for i in range(7):
            xnum = (xnum + _ERF_C[i]) * y
            xden = (xden + _ERF_D[i]) * y
        result = (xnum + _ERF_C[7]) / (xden + _ERF_D[7])
    else:
        ysq = 1.0 / (y * y)
        xnum = _ERF_P[5] * ysq
        xden = ysq
        for i in range(4):
            xnum = (xnum + _ERF_P[i]) * ysq
            xden = (xden + _ERF_Q[i]) * ysq
        result = ysq * (xnum + _ERF_P[4]) / (xden + _ERF_Q[4])
        result = (_RSQRT_PI - result) / y
    ytrunc = math.floor(y * 16.0) / 16.0
    delta = (y - ytrunc) * (y + ytrunc)
    return math.exp(-ytrunc * ytrunc) * math.exp(-delta) * result


def erf(x: float) -> float:
    """Error function via a rational approximation (abs error well below 1e-7)."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInputError("erf requires a finite argument")
    y = abs(x)
    if y <= 0.46875:
        ysq = y * y
        xnum = _ERF_A[4] * ysq
        xden = ysq
        for i in range(3):
            xnum = (xnum + _ERF_A[i]) * ysq
            xden = (xden + _ERF_B[i]) * ysq
        return x * (xnum + _ERF_A[3]) / (xden + _ERF_B[3])
    tail = _erfc_scaled_tail(y)
    return 1.0 - tail if x > 0 else tail - 1.0


def _log(value: float, log_base: str) -> float:
    if log_base == "natural":
        return math.log(value)
    if log_base == "two":
        return math.log2(value)
    raise InvalidInputError(f"log_base must be 'natural' or 'two', got {log_base!r}")


def _check_m_delta(m: int, delta: float) -> None:
    if int(m) != m or m < 1:
        raise InvalidInputError(f"sample count M must be a positive integer, got {m!r}")
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta!r}")


def bound_general(lipschitz: float, spectral_norm: float, risk_bound: float,
                  m: int, delta: float, log_base: str = "natural") -> float:
    """2 L B_O sqrt(1/M) + 3 C sqrt(log(2/delta) / (2M))."""
    _check_m_delta(m, delta)
    if lipschitz < 0 or spectral_norm < 0 or risk_bound < 0:
        raise InvalidInputError("L, B_O, and C must be non-negative")
    return (2.0 * lipschitz * spectral_norm * math.sqrt(1.0 / m)
            + 3.0 * risk_bound * math.sqrt(_log(2.0 / delta, log_base) / (2.0 * m)))


def bound_regression(m: int, delta: float, log_base: str = "natural") -> float:
    """Absolute risk on [0,1] targets: L = C = B_O = 1."""
    return bound_general(1.0, 1.0, 1.0, m, delta, log_base)


def bound_classification(m: int, delta: float, log_base: str = "natural") -> float:
    """0-1 risk with the effective L = 1/2: 1/sqrt(M) + 3 sqrt(log(2/d)/(2M))."""
    return bound_general(0.5, 1.0, 1.0, m, delta, log_base)


def bound_kclass(k_classes: int, m: int, delta: float, log_base: str = "natural") -> float:
    """One-vs-rest decomposition: K times the binary classification bound."""
    if int(k_classes) != k_classes or k_classes < 2:
        raise InvalidInputError(f"K must be an integer >= 2, got {k_classes!r}")
    return k_classes * bound_classification(m, delta, log_base)


def bound_caro(t_gates: int, spectral_norm: float, m: int, delta: float,
               log_base: str = "natural") -> float:
    """Gate-count competitor bound (grows like sqrt(T log T / M))."""
    _check_m_delta(m, delta)
    if int(t_gates) != t_gates or t_gates < 1:
        raise InvalidInputError(f"gate count T must be a positive integer, got {t_gates!r}")
    if spectral_norm <= 0:
        raise InvalidInputError("spectral norm must be positive")
    sqrt_log2 = math.sqrt(_log(2.0, log_base))
    bracket = (0.5 * math.sqrt(_log(6.0 * t_gates, log_base))
               + 0.5 * sqrt_log2
               - 0.5 * _SQRT_PI * erf(sqrt_log2)
               - 0.5 * _SQRT_PI)
    main = 24.0 * spectral_norm / math.sqrt(m) * math.sqrt(512.0 * t_gates) * bracket
    tail = 3.0 * spectral_norm * math.sqrt(2.0 * _log(2.0 / delta, log_base) / m)
    return main + tail


def bound_encoding(lipschitz: float, spectral_norm: float, risk_bound: float,
                   d: int, k: int, m: int, delta: float,
                   log_base: str = "natural") -> float:
    """Encoding-dependent competitor bound for k-local exponential encodings.

    The published numerics omit the integral term of the formula; this
    evaluation matches them.  Grows like a^(d/2) with a = 2^k(2^k-1)/2 + 1.
    """
    _check_m_delta(m, delta)
    if int(d) != d or d < 1 or int(k) != k or k < 1:
        raise InvalidInputError("data dimension d and locality k must be positive integers")
    if lipschitz < 0 or spectral_norm < 0 or risk_bound < 0:
        raise InvalidInputError("L, B_O, and C must be non-negative")
    a = 2.0 ** k * (2.0 ** k - 1.0) / 2.0 + 1.0
    log_inner = _log(6.0 * (2.0 * math.pi) ** (d / 2.0), log_base) + 0.5 * d * _log(a, log_base)
    main = (12.0 * lipschitz * spectral_norm / math.sqrt(m)
            * math.sqrt(a ** d) * math.sqrt(log_inner))
    tail = 3.0 * risk_bound * math.sqrt(_log(2.0 / delta, log_base) / (2.0 * m))
    return main + tail


@dataclass(frozen=True)
class StabilityBound:
    """SGD-stability bound; ``value`` overflows to inf long before T = 100."""

    value: float
    log10: float


def bound_stability(lipschitz: float, grad_lipschitz: float, k_gates: int,
                    spectral_norm: float, m: int, eta: float,
                    t_epochs: int) -> StabilityBound:
    """Stability competitor bound, computed in log10 space.

    prefactor * (1 + eta * A)^T with A = L K B_O + sqrt(2) v_L K B_O and
    prefactor = 2 sqrt(2) L^2 K B_O / (A M).
    """
    if lipschitz <= 0 or grad_lipschitz <= 0 or spectral_norm <= 0 or eta <= 0:
        raise InvalidInputError("L, v_L, B_O, and eta must be positive")
    if int(k_gates) != k_gates or k_gates < 1:
        raise InvalidInputError("gate count K must be a positive integer")
    if int(m) != m or m < 1:
        raise InvalidInputError("sample count M must be a positive integer")
    if int(t_epochs) != t_epochs or t_epochs < 0:
        raise InvalidInputError("epoch count T must be a non-negative integer")
    a = lipschitz * k_gates * spectral_norm + math.sqrt(2.0) * grad_lipschitz * k_gates * spectral_norm
    prefactor = 2.0 * math.sqrt(2.0) * lipschitz ** 2 * k_gates * spectral_norm / (a * m)
    log10 = math.log10(prefactor) + t_epochs * math.log10(1.0 + eta * a)
    value = 10.0 ** log10 if log10 < 308.0 else math.inf
    return StabilityBound(value, log10)


@dataclass(frozen=True)
class BoundValue:
    """Serializable record of one bound evaluation."""

    family: str
    inputs: dict
    value: float
    log10_value: float

    def to_dict(self) -> dict:
        return {"family": self.family, "inputs": dict(self.inputs),
                "value": self.value, "log10_value": self.log10_value}


def evaluate_bound(family: str, **inputs) -> BoundValue:
    """Dispatch by family name; returns the value with its inputs echoed."""
    families = {
        "general": bound_general,
        "regression": bound_regression,
        "classification": bound_classification,
        "kclass": bound_kclass,
        "caro": bound_caro,
        "encoding": bound_encoding,
    }
    if family == "stability":
        sb = bound_stability(**inputs)
        return BoundValue("stability", inputs, sb.value, sb.log10)
    if family not in families:
        raise InvalidInputError(f"unknown bound family {family!r}")
    value = families[family](**inputs)
    log10 = math.log10(value) if value > 0 else -math.inf
    return BoundValue(family, inputs, value, log10)


@dataclass(frozen=True)
class RademacherEstimate:
    """Monte-Carlo lower estimate of the empirical Rademacher complexity.

    ``value`` averages, over sign draws, the best correlation a trained
    circuit reached via gradient ascent with restarts; it underestimates the
    true supremum, so the sqrt(1/M) envelope must still sit above it.
    """

    value: float
    stderr: float
    n_sigma: int


def rademacher_estimate(
    states,
    circuit: CircuitSpec,
    obs: Observable,
    n_sigma: int,
    ascent_steps: int = 200,
    restarts: int = 5,
    seed: int = 0,
    learning_rate: float = 0.1,
) -> RademacherEstimate:
    """Estimate E_sigma[ max_theta (1/M) sum_m sigma_m h(x_m; theta) ].

    Each sign draw gets ``restarts`` independent Adam ascents of
    ``ascent_steps`` steps; the per-draw result is the best objective seen.
    Draw j uses the generator seeded by (seed, j), so draws are independent
    and reproducible regardless of execution order.
    """
    if n_sigma < 1:
        raise InvalidInputError("need at least one sign draw")
    stacked = states_matrix(states)
    m = stacked.shape[0]

    def objective_and_grad(theta, sigma):
        evs, grads = batch_gradients(circuit, theta, stacked, obs)
        return float(sigma @ evs) / m, (sigma @ grads) / m

    per_draw = np.empty(n_sigma)
    for j in range(n_sigma):
        rng = np.random.default_rng((seed, j))
        sigma = 2.0 * rng.integers(0, 2, size=m) - 1.0
        if circuit.n_params == 0:
            evs = batch_expectations(circuit, np.zeros(0), stacked, obs)
            value = float(sigma @ evs) / m
        else:
            value = -math.inf
            for _ in range(restarts):
                theta = rng.normal(size=circuit.n_params)
                opt = make_optimizer(OptimizerSpec("adam", learning_rate), circuit.n_params)
                for _ in range(ascent_steps):
                    obj, grad = objective_and_grad(theta, sigma)
                    value = max(value, obj)
                    theta = opt.step(theta, -grad)  # ascent
                obj, _ = objective_and_grad(theta, sigma)
                value = max(value, obj)
        per_draw[j] = value
    stderr = float(np.std(per_draw, ddof=1) / math.sqrt(n_sigma)) if n_sigma > 1 else 0.0
    return RademacherEstimate(float(np.mean(per_draw)), stderr, n_sigma)
