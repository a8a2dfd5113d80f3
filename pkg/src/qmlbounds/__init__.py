"""Pauli-basis quantum model simulation, closed-form generalization bounds,
and the experiment sweeps that compare them."""

__version__ = "0.1.0"

from .bounds import (BoundValue, RademacherEstimate, StabilityBound,
                     bound_caro, bound_classification, bound_encoding,
                     bound_general, bound_kclass, bound_regression,
                     bound_stability, erf, evaluate_bound, rademacher_estimate)
from .circuits import CircuitSpec, Gate, compile_program, layered_circuit
from .datasets import (GeneratorSpec, LabeledDataset, Sample, boundary_h_c,
                       boundary_h_i, ordered_boundary, phase_label, regenerate,
                       randomize_labels, regression_target,
                       sample_annni_dataset, sample_regression_dataset)
from .errors import CapacityError, InvalidInputError, NumericError, QmlBoundsError
from .pauli import (Observable, PauliCoeffVector, PauliString, TransferMatrix,
                    expectation_from_pauli, model_weight_vector,
                    observable_vector, observable_z1, observable_z_all,
                    pauli_string_from_index, purity, state_to_pauli_vector,
                    transfer_matrix)
from .simulator import (HamiltonianMatrix, adjoint_gradient, annni_hamiltonian,
                        apply_gate, dense_unitary, expectation,
                        expectation_and_gradient, ground_state,
                        parameter_shift_gradient, run_circuit, zero_state)
from .training import (EpochRecord, OptimizerSpec, RiskKind, TrainConfig,
                       TrainHistory, caro_loss, evaluate, generalization_gap,
                       hinge_loss, make_optimizer, mse_loss, risk, train)
