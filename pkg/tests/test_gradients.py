"""Analytic gradients: adjoint sweep vs parameter shift vs finite differences."""

import numpy as np
import pytest

from qmlbounds import (InvalidInputError, Observable, PauliString,
                       adjoint_gradient, expectation, layered_circuit,
                       observable_z1, parameter_shift_gradient, run_circuit,
                       zero_state)
from qmlbounds.circuits import CircuitSpec, Gate
from qmlbounds.pauli import pauli_string_from_index

from conftest import random_state

# frozen: -sin(pi/3) for the single-R_y analytic case
MINUS_SIN_PI_3 = -0.8660254037844386


def finite_difference(circ, theta, psi, obs, features=None, step=1e-5):
    grad = np.zeros_like(theta)
    for k in range(len(theta)):
        tp, tm = theta.copy(), theta.copy()
        tp[k] += step
        tm[k] -= step
        grad[k] = (expectation(run_circuit(circ, tp, psi, features), obs)
                   - expectation(run_circuit(circ, tm, psi, features), obs)) / (2 * step)
    return grad


def single_ry_circuit():
    return CircuitSpec(1, 0, "none", (Gate("ry", (1,), param_slot=0),), 1, 0)


class TestParameterShift:
    def test_single_ry_analytic(self):
        grad = parameter_shift_gradient(single_ry_circuit(), np.array([np.pi / 3]),
                                        zero_state(1), observable_z1(1))
        assert grad[0] == pytest.approx(MINUS_SIN_PI_3, abs=1e-12)

    def test_two_pi_periodicity(self, rng):
        circ = layered_circuit(2, 1)
        theta = rng.normal(size=circ.n_params)
        psi = random_state(rng, 2)
        obs = observable_z1(2)
        g1 = parameter_shift_gradient(circ, theta, psi, obs)
        g2 = parameter_shift_gradient(circ, theta + 2 * np.pi, psi, obs)
        assert np.allclose(g1, g2, atol=1e-12)

    def test_full_angle_trainable_slot_rejected(self):
        circ = CircuitSpec(1, 0, "none",
                           (Gate("ry", (1,), param_slot=0, half_angle=False),), 1, 0)
        with pytest.raises(InvalidInputError):
            parameter_shift_gradient(circ, np.array([0.3]), zero_state(1),
                                     observable_z1(1))

    def test_shared_slot_rejected(self):
        gates = (Gate("ry", (1,), param_slot=0), Gate("rz", (1,), param_slot=0))
        circ = CircuitSpec(1, 0, "none", gates, 1, 0)
        with pytest.raises(InvalidInputError):
            parameter_shift_gradient(circ, np.array([0.3]), zero_state(1),
                                     observable_z1(1))


class TestAdjoint:
    def test_stationary_at_symmetric_point(self):
        # theta = 0 on |0...0> with Z1 sits at the expectation maximum
        circ = layered_circuit(3, 2)
        grad = adjoint_gradient(circ, np.zeros(circ.n_params), zero_state(3),
                                observable_z1(3))
        assert np.abs(grad).max() <= 1e-12

    def test_matches_parameter_shift(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 5))
            circ = layered_circuit(n, int(rng.integers(1, 4)))
            theta = rng.normal(size=circ.n_params)
            psi = random_state(rng, n)
            obs = Observable(pauli_string_from_index(int(rng.integers(0, 4 ** n)), n),
                             float(rng.uniform(0.5, 2.0)))
            adj = adjoint_gradient(circ, theta, psi, obs)
            ps = parameter_shift_gradient(circ, theta, psi, obs)
            assert np.abs(adj - ps).max() <= 1e-9

    def test_matches_finite_differences(self, rng):
        for _ in range(5):
            n = int(rng.integers(1, 4))
            circ = layered_circuit(n, 2)
            theta = rng.normal(size=circ.n_params)
            psi = random_state(rng, n)
            obs = observable_z1(n)
            adj = adjoint_gradient(circ, theta, psi, obs)
            fd = finite_difference(circ, theta, psi, obs)
            assert np.all(np.abs(adj - fd) <= 1e-8 + 1e-5 * np.abs(fd))

    def test_with_encoding_prefix(self, rng):
        # data gates contribute no gradient entries but must unwind correctly
        circ = layered_circuit(3, 2, encoding="angle_ry")
        theta = rng.normal(size=circ.n_params)
        x = rng.uniform(-1, 1, size=3)
        from qmlbounds import expectation_and_gradient

        ev, adj = expectation_and_gradient(circ, theta, zero_state(3),
                                           observable_z1(3), features=x)
        assert ev == pytest.approx(
            expectation(run_circuit(circ, theta, zero_state(3), features=x),
                        observable_z1(3)), abs=1e-12)
        fd = finite_difference(circ, theta, zero_state(3), observable_z1(3), features=x)
        assert np.all(np.abs(adj - fd) <= 1e-8 + 1e-5 * np.abs(fd))

    def test_diag_encoding_unwinds(self, rng):
        circ = layered_circuit(3, 1, encoding="special_diag")
        theta = rng.normal(size=circ.n_params)
        x = rng.uniform(-1, 1, size=1)
        adj = adjoint_gradient(circ, theta, zero_state(3), observable_z1(3), features=x)
        fd = finite_difference(circ, theta, zero_state(3), observable_z1(3), features=x)
        assert np.all(np.abs(adj - fd) <= 1e-8 + 1e-5 * np.abs(fd))
