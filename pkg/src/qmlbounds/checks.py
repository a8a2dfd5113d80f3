"""Randomized property suites behind ``qmlbounds check``.

Each suite prints one line per property and returns True when everything
holds.  These are smoke checks for an installed copy; the pytest suite is the
authoritative gate.
"""

from __future__ import annotations

import numpy as np

from .circuits import layered_circuit
from .pauli import (Observable, expectation_from_pauli, observable_vector,
                    pauli_string_from_index, state_to_pauli_vector,
                    transfer_matrix)
from .simulator import (adjoint_gradient, expectation, parameter_shift_gradient,
                        run_circuit)


def _report(label: str, ok: bool, detail: str = "", verbose: bool = True) -> bool:
    if verbose:
        print(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f"  ({detail})" if detail else ""))
    return ok


def _random_state(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def check_ptm(trials: int = 20, verbose: bool = True) -> bool:
    """Transfer-matrix orthogonality and statevector/Pauli backend agreement."""
    rng = np.random.default_rng(2024)
    worst_orth = 0.0
    worst_agree = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        circ = layered_circuit(n, int(rng.integers(1, 4)))
        theta = rng.normal(size=circ.n_params)
        t = transfer_matrix(circ, theta)
        worst_orth = max(worst_orth, float(np.abs(
            t.entries.T @ t.entries - np.eye(4 ** n)).max()))
        psi = _random_state(rng, n)
        alpha = state_to_pauli_vector(psi)
        obs = Observable(pauli_string_from_index(int(rng.integers(0, 4 ** n)), n))
        m = observable_vector(obs)
        beta = t.entries @ alpha.entries
        via_pauli = float(m.entries @ beta)
        via_sv = expectation(run_circuit(circ, theta, psi), obs)
        worst_agree = max(worst_agree, abs(via_pauli - via_sv))
    ok = _report("PTM orthogonality max|T^T T - I| <= 1e-10", worst_orth <= 1e-10,
                 f"worst {worst_orth:.2e}", verbose)
    ok &= _report("cross-backend expectation agreement <= 1e-10", worst_agree <= 1e-10,
                  f"worst {worst_agree:.2e}", verbose)
    return bool(ok)


def check_gradients(trials: int = 10, verbose: bool = True) -> bool:
    """Adjoint vs parameter-shift vs central finite differences."""
    rng = np.random.default_rng(77)
    worst_ps = 0.0
    worst_fd = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        circ = layered_circuit(n, int(rng.integers(1, 4)))
        theta = rng.normal(size=circ.n_params)
        psi = _random_state(rng, n)
        obs = Observable(pauli_string_from_index(int(rng.integers(0, 4 ** n)), n))
        adj = adjoint_gradient(circ, theta, psi, obs)
        ps = parameter_shift_gradient(circ, theta, psi, obs)
        worst_ps = max(worst_ps, float(np.abs(adj - ps).max()))
        step = 1e-5
        for k in range(min(6, circ.n_params)):
            tp, tm = theta.copy(), theta.copy()
            tp[k] += step
            tm[k] -= step
            fd = (expectation(run_circuit(circ, tp, psi), obs)
                  - expectation(run_circuit(circ, tm, psi), obs)) / (2 * step)
            # relative 1e-5 with a 1e-8 absolute floor for near-zero entries
            rel = (abs(adj[k] - fd) - 1e-8) / max(abs(fd), 1e-12)
            worst_fd = max(worst_fd, rel)
    ok = _report("adjoint vs parameter-shift max-abs <= 1e-9", worst_ps <= 1e-9,
                 f"worst {worst_ps:.2e}", verbose)
    ok &= _report("adjoint vs finite differences rel <= 1e-5", worst_fd <= 1e-5,
                  f"worst excess {worst_fd:.2e}", verbose)
    return bool(ok)


def check_backends(trials: int = 10, verbose: bool = True) -> bool:
    """numba and numpy kernels produce identical results."""
    try:
        from . import kernels_numba
    except ImportError:
        return _report("numba kernels importable", False, "numba missing", verbose)
    from . import kernels_numpy
    from .circuits import compile_program

    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 5))
        circ = layered_circuit(n, int(rng.integers(1, 4)))
        prog = compile_program(circ)
        theta = rng.normal(size=circ.n_params)
        psi = _random_state(rng, n)
        empty = np.zeros(0)
        zm, xm = Observable(pauli_string_from_index(int(rng.integers(0, 4 ** n)), n)).string.masks()
        for mod_a, mod_b in ((kernels_numba, kernels_numpy),):
            ga = np.zeros(circ.n_params)
            gb = np.zeros(circ.n_params)
            ea = mod_a.adjoint_gradient(psi, prog.kinds, prog.tbits, prog.cbits,
                                        prog.slots, prog.sources, prog.scales,
                                        prog.diags, theta, empty, zm, xm, ga)
            eb = mod_b.adjoint_gradient(psi, prog.kinds, prog.tbits, prog.cbits,
                                        prog.slots, prog.sources, prog.scales,
                                        prog.diags, theta, empty, zm, xm, gb)
            worst = max(worst, abs(ea - eb), float(np.abs(ga - gb).max()))
    return _report("numba/numpy kernel agreement <= 1e-12", worst <= 1e-12,
                   f"worst {worst:.2e}", verbose)
