"""Closed-form bounds, the internal erf, and the complexity estimator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qmlbounds import (InvalidInputError, bound_caro, bound_classification,
                       bound_encoding, bound_general, bound_kclass,
                       bound_regression, bound_stability, erf, evaluate_bound,
                       layered_circuit, observable_z1, rademacher_estimate,
                       run_circuit, sample_annni_dataset, zero_state)
from qmlbounds import expectation as sv_expectation

from conftest import random_state

# frozen oracle values (arbitrary-precision evaluation of the closed forms)
CLS_2000 = 0.1044606043516775
CLS_500 = 0.2089212087033550
REG_2000 = 0.1268212841266754
GEN_100 = 0.5671620246021225
REG_1 = 5.671620246021225
KCLASS_3_2000 = 0.3133818130550325
CARO_360_2000 = 55.71544845922252
ENC_D1 = 3.111191252943227
STAB_LOG10_T100 = 69.56725850177866
STAB_PREFACTOR = 5.857864376269050e-4
ERF_0_832555 = 0.7609683279311936  # frozen from the quadrature oracle


def erf_quadrature(x: float) -> float:
    val, _ = quad(lambda t: 2.0 / math.sqrt(math.pi) * math.exp(-t * t), 0.0, x,
                  epsabs=1e-13, limit=200)
    return val


class TestErf:
    def test_zero(self):
        assert erf(0.0) == 0.0

    def test_odd_symmetry(self, rng):
        for x in rng.uniform(0, 5, size=20):
            assert erf(-x) == pytest.approx(-erf(x), abs=1e-15)

    def test_against_quadrature_oracle(self):
        xs = np.concatenate([
            np.linspace(-5.5, 5.5, 45),
            [0.46875, -0.46875, 4.0, -4.0, 0.832555, math.sqrt(math.log(2.0))],
        ])
        for x in xs:
            assert erf(float(x)) == pytest.approx(erf_quadrature(float(x)), abs=1e-7)

    def test_frozen_point(self):
        assert erf(0.832555) == pytest.approx(ERF_0_832555, abs=1e-6)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            erf(float("nan"))


class TestTightBounds:
    def test_frozen_values(self):
        assert bound_classification(2000, 0.1) == pytest.approx(CLS_2000, abs=1e-12)
        assert bound_classification(500, 0.1) == pytest.approx(CLS_500, abs=1e-12)
        assert bound_regression(2000, 0.1) == pytest.approx(REG_2000, abs=1e-12)
        assert bound_general(1, 1, 1, 100, 0.1) == pytest.approx(GEN_100, abs=1e-12)
        assert bound_regression(1, 0.1) == pytest.approx(REG_1, abs=1e-12)

    def test_quadrupling_m_halves_first_term(self):
        # isolate the first term with C = 0
        for m in (7, 50, 333):
            assert bound_general(1, 1, 0, 4 * m, 0.1) == pytest.approx(
                bound_general(1, 1, 0, m, 0.1) / 2, rel=1e-14)

    def test_degenerate_risk_gives_zero(self):
        assert bound_general(0, 1, 0, 100, 0.1) == 0.0

    def test_regression_specializes_general(self):
        for m, delta in ((10, 0.05), (2000, 0.1)):
            assert bound_regression(m, delta) == bound_general(1, 1, 1, m, delta)

    def test_classification_below_one_iff_m_at_least_22(self):
        # solving 1/sqrt(M) + 3 sqrt(ln20/(2M)) < 1 gives M > 21.82
        assert bound_classification(21, 0.1) > 1.0
        for m in (22, 30, 100, 2000):
            assert bound_classification(m, 0.1) < 1.0

    def test_half_m_doubles_classification(self):
        assert bound_classification(500, 0.1) == pytest.approx(
            2 * bound_classification(2000, 0.1), rel=1e-14)

    def test_kclass(self):
        assert bound_kclass(2, 2000, 0.1) == pytest.approx(CLS_500, abs=1e-12)
        assert bound_kclass(3, 2000, 0.1) == pytest.approx(KCLASS_3_2000, abs=1e-12)
        assert bound_kclass(6, 2000, 0.1) == pytest.approx(
            3 * bound_kclass(2, 2000, 0.1), rel=1e-14)

    def test_kclass_domain(self):
        with pytest.raises(InvalidInputError):
            bound_kclass(1, 2000, 0.1)

    @given(st.integers(1, 10_000), st.floats(0.001, 0.999))
    @settings(max_examples=200, deadline=None)
    def test_classification_below_regression(self, m, delta):
        assert bound_classification(m, delta) < bound_regression(m, delta)

    def test_domain_errors(self):
        with pytest.raises(InvalidInputError):
            bound_general(1, 1, 1, 0, 0.1)
        with pytest.raises(InvalidInputError):
            bound_general(1, 1, 1, 100, 0.0)
        with pytest.raises(InvalidInputError):
            bound_general(1, 1, 1, 100, 1.0)
        with pytest.raises(InvalidInputError):
            bound_general(-1, 1, 1, 100, 0.1)

    def test_log_base_switch(self):
        natural = bound_classification(100, 0.1)
        base2 = bound_classification(100, 0.1, log_base="two")
        assert base2 > natural  # log2(20) > ln(20)


class TestCompetitorBounds:
    def test_caro_frozen_value(self):
        assert bound_caro(360, 1, 2000, 0.1) == pytest.approx(CARO_360_2000, abs=1e-9)

    def test_caro_vacuous_on_experiment_range(self):
        for m in (10, 100, 500, 1000, 2000):
            assert bound_caro(360, 1, m, 0.1) > 1.0

    def test_caro_monotone_in_gate_count(self):
        values = [bound_caro(t, 1, 2000, 0.1) for t in (10, 100, 360, 1000, 9000)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_caro_domain(self):
        with pytest.raises(InvalidInputError):
            bound_caro(0, 1, 2000, 0.1)

    def test_encoding_frozen_value(self):
        assert bound_encoding(1, 1, 1, 1, 3, 2000, 0.1) == pytest.approx(ENC_D1, abs=1e-9)

    def test_encoding_vacuous_for_paper_dimensions(self):
        for d in (1, 4, 7, 10):
            assert bound_encoding(1, 1, 1, d, 3, 2000, 0.1) > 1.0

    def test_encoding_growth_factor(self):
        # main term grows at least by sqrt(29) per unit of d at k = 3
        tail = 3.0 * math.sqrt(math.log(20.0) / 4000.0)
        prev = bound_encoding(1, 1, 1, 1, 3, 2000, 0.1) - tail
        for d in (2, 3, 4, 5):
            cur = bound_encoding(1, 1, 1, d, 3, 2000, 0.1) - tail
            assert cur / prev >= math.sqrt(29.0)
            prev = cur

    def test_stability_frozen_values(self):
        sb = bound_stability(1, 1, 360, 1, 2000, 0.005, 100)
        assert sb.log10 == pytest.approx(STAB_LOG10_T100, abs=1e-9)
        sb0 = bound_stability(1, 1, 360, 1, 2000, 0.005, 0)
        assert sb0.value == pytest.approx(STAB_PREFACTOR, rel=1e-12)

    def test_stability_strictly_increasing_in_epochs(self):
        logs = [bound_stability(1, 1, 360, 1, 2000, 0.005, t).log10
                for t in (0, 1, 10, 100, 1000)]
        assert all(b > a for a, b in zip(logs, logs[1:]))

    def test_stability_overflow_to_inf(self):
        sb = bound_stability(1, 1, 9000, 1, 2000, 0.5, 500)
        assert math.isinf(sb.value) and math.isfinite(sb.log10)

    @pytest.mark.parametrize("family,kwargs", [
        ("classification", dict(delta=0.1)),
        ("regression", dict(delta=0.1)),
        ("kclass", dict(k_classes=3, delta=0.1)),
        ("caro", dict(t_gates=360, spectral_norm=1, delta=0.1)),
        ("encoding", dict(lipschitz=1, spectral_norm=1, risk_bound=1, d=2, k=3, delta=0.1)),
    ])
    def test_monotone_decreasing_in_m(self, family, kwargs):
        from qmlbounds import bounds as bounds_mod

        fn = {"classification": bounds_mod.bound_classification,
              "regression": bounds_mod.bound_regression,
              "kclass": bounds_mod.bound_kclass,
              "caro": bounds_mod.bound_caro,
              "encoding": bounds_mod.bound_encoding}[family]
        values = [fn(m=m, **kwargs) for m in (10, 40, 160, 640, 2560)]
        assert all(b < a for a, b in zip(values, values[1:]))


class TestEvaluateBound:
    def test_dispatch_and_record(self):
        rec = evaluate_bound("classification", m=2000, delta=0.1)
        assert rec.value == pytest.approx(CLS_2000, abs=1e-12)
        assert rec.family == "classification"
        assert rec.to_dict()["inputs"] == {"m": 2000, "delta": 0.1}

    def test_stability_record_carries_log10(self):
        rec = evaluate_bound("stability", lipschitz=1, grad_lipschitz=1, k_gates=360,
                             spectral_norm=1, m=2000, eta=0.005, t_epochs=100)
        assert rec.log10_value == pytest.approx(STAB_LOG10_T100, abs=1e-9)

    def test_unknown_family(self):
        with pytest.raises(InvalidInputError):
            evaluate_bound("pac_bayes", m=10, delta=0.1)


class TestRademacherEstimate:
    def test_singleton_family_is_noise_around_zero(self, rng):
        ds = sample_annni_dataset(10, 2, seed=1)
        circ = layered_circuit(2, 0)  # no trainable gates
        est = rademacher_estimate([s.state for s in ds.samples], circ,
                                  observable_z1(2), n_sigma=60, seed=4)
        assert abs(est.value) <= 4 * est.stderr
        assert est.value <= math.sqrt(1 / 10) + 2 * est.stderr

    def test_envelope_small_instance(self):
        ds = sample_annni_dataset(12, 2, seed=2)
        circ = layered_circuit(2, 2)
        est = rademacher_estimate([s.state for s in ds.samples], circ,
                                  observable_z1(2), n_sigma=25,
                                  ascent_steps=60, restarts=2, seed=0)
        assert est.value <= math.sqrt(1 / 12) + 2 * est.stderr
        assert est.stderr > 0

    def test_sign_flip_closure_keeps_estimate_nonnegative(self, rng):
        # single-qubit family: adding pi to the last layer's Ry angle flips
        # the readout sign for every input, so per-draw maxima are >= 0
        circ = layered_circuit(1, 2)
        obs = observable_z1(1)
        flip_slot = 4  # layer 2 slots are (3, 4, 5) = rz, ry, rz
        for _ in range(10):
            theta = rng.normal(size=circ.n_params)
            flipped = theta.copy()
            flipped[flip_slot] += np.pi
            psi = random_state(rng, 1)
            h1 = sv_expectation(run_circuit(circ, theta, psi), obs)
            h2 = sv_expectation(run_circuit(circ, flipped, psi), obs)
            assert h2 == pytest.approx(-h1, abs=1e-12)
        states = [random_state(rng, 1) for _ in range(8)]
        est = rademacher_estimate(states, circ, obs, n_sigma=20,
                                  ascent_steps=50, restarts=2, seed=1)
        assert est.value >= -2 * est.stderr

    def test_draw_count_validated(self):
        with pytest.raises(InvalidInputError):
            rademacher_estimate([zero_state(1)], layered_circuit(1, 1),
                                observable_z1(1), n_sigma=0)
