"""Numba-compiled statevector kernels (default backend).

Each public function mirrors :mod:`qmlbounds.kernels_numpy` exactly; the hot
loops run as machine code over the raw amplitude array, so a whole forward
pass or adjoint sweep is a single compiled call.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .circuits import OP_CNOT, OP_DIAG_EXP, OP_RY, OP_RZ, SRC_THETA

_JIT = dict(cache=True, fastmath=False)


@njit(**_JIT)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(**_JIT)
def _rz(state, tbit, b):
    dim = state.shape[0]
    p0 = complex(np.cos(b), -np.sin(b))
    p1 = complex(np.cos(b), np.sin(b))
    for s in range(dim):
        if (s >> tbit) & 1:
            state[s] *= p1
        else:
            state[s] *= p0


@njit(**_JIT)
def _ry(state, tbit, b):
    dim = state.shape[0]
    c = np.cos(b)
    sn = np.sin(b)
    step = 1 << tbit
    for s in range(dim):
        if (s >> tbit) & 1 == 0:
            p = s | step
            a0 = state[s]
            a1 = state[p]
            state[s] = c * a0 - sn * a1
            state[p] = sn * a0 + c * a1


@njit(**_JIT)
def _cnot(state, cbit, tbit):
    dim = state.shape[0]
    step = 1 << tbit
    for s in range(dim):
        if ((s >> cbit) & 1) == 1 and ((s >> tbit) & 1) == 0:
            p = s | step
            tmp = state[s]
            state[s] = state[p]
            state[p] = tmp


@njit(**_JIT)
def _diag_exp(state, tbit, x, diagrow):
    dim = state.shape[0]
    mult = np.empty(8, dtype=np.complex128)
    for j in range(8):
        a = x * diagrow[j]
        mult[j] = complex(np.cos(a), -np.sin(a))
    for s in range(dim):
        state[s] *= mult[(s >> tbit) & 7]


@njit(**_JIT)
def run_program(
    state, kinds, tbits, cbits, slots, sources, scales, diags, theta, xdata, reverse=False
):
    n_ops = kinds.shape[0]
    sgn = -1.0 if reverse else 1.0
    for i in range(n_ops):
        k = n_ops - 1 - i if reverse else i
        kind = kinds[k]
        if kind == OP_CNOT:
            _cnot(state, cbits[k], tbits[k])
        elif kind == OP_DIAG_EXP:
            _diag_exp(state, tbits[k], sgn * xdata[slots[k]], diags[k])
        else:
            raw = theta[slots[k]] if sources[k] == SRC_THETA else xdata[slots[k]]
            b = sgn * raw * scales[k]
            if kind == OP_RZ:
                _rz(state, tbits[k], b)
            else:
                _ry(state, tbits[k], b)


@njit(**_JIT)
def apply_pauli(state, zmask, xmask):
    dim = state.shape[0]
    p = _popcount(zmask & xmask) & 3
    if p == 0:
        phase = 1.0 + 0.0j
    elif p == 1:
        phase = 1.0j
    elif p == 2:
        phase = -1.0 + 0.0j
    else:
        phase = -1.0j
    out = np.empty(dim, dtype=np.complex128)
    for s in range(dim):
        src = s ^ xmask
        if _popcount(src & zmask) & 1:
            out[s] = -phase * state[src]
        else:
            out[s] = phase * state[src]
    return out


@njit(**_JIT)
def pauli_expectation(state, zmask, xmask):
    dim = state.shape[0]
    p = _popcount(zmask & xmask) & 3
    if p == 0:
        phase = 1.0 + 0.0j
    elif p == 1:
        phase = 1.0j
    elif p == 2:
        phase = -1.0 + 0.0j
    else:
        phase = -1.0j
    acc = 0.0 + 0.0j
    for s in range(dim):
        src = s ^ xmask
        if _popcount(src & zmask) & 1:
            acc -= np.conj(state[s]) * state[src]
        else:
            acc += np.conj(state[s]) * state[src]
    return (phase * acc).real


@njit(**_JIT)
def _generator_overlap(lam, psi, kind, tbit):
    dim = lam.shape[0]
    acc = 0.0 + 0.0j
    if kind == OP_RZ:
        for s in range(dim):
            if (s >> tbit) & 1:
                acc -= np.conj(lam[s]) * psi[s]
            else:
                acc += np.conj(lam[s]) * psi[s]
    else:
        step = 1 << tbit
        for s in range(dim):
            if (s >> tbit) & 1 == 0:
                p = s | step
                acc += -1j * np.conj(lam[s]) * psi[p] + 1j * np.conj(lam[p]) * psi[s]
    return acc


@njit(**_JIT)
def batch_expectations(
    states, kinds, tbits, cbits, slots, sources, scales, diags,
    theta, xdata, zmask, xmask, out,
):
    """Forward pass + <P> for every row of ``states`` (rows left untouched)."""
    for b in range(states.shape[0]):
        psi = states[b].copy()
        run_program(psi, kinds, tbits, cbits, slots, sources, scales, diags,
                    theta, xdata, False)
        out[b] = pauli_expectation(psi, zmask, xmask)


@njit(**_JIT)
def adjoint_gradient(
    state, kinds, tbits, cbits, slots, sources, scales, diags,
    theta, xdata, zmask, xmask, grad_out,
):
    psi = state.copy()
    run_program(psi, kinds, tbits, cbits, slots, sources, scales, diags, theta, xdata, False)
    lam = apply_pauli(psi, zmask, xmask)
    expval = 0.0
    for s in range(psi.shape[0]):
        expval += (np.conj(psi[s]) * lam[s]).real
    grad_out[:] = 0.0
    for k in range(kinds.shape[0] - 1, -1, -1):
        kind = kinds[k]
        if sources[k] == SRC_THETA:
            ov = _generator_overlap(lam, psi, kind, tbits[k])
            grad_out[slots[k]] += 2.0 * scales[k] * ov.imag
        if kind == OP_CNOT:
            _cnot(psi, cbits[k], tbits[k])
            _cnot(lam, cbits[k], tbits[k])
        elif kind == OP_DIAG_EXP:
            x = -xdata[slots[k]]
            _diag_exp(psi, tbits[k], x, diags[k])
            _diag_exp(lam, tbits[k], x, diags[k])
        else:
            raw = theta[slots[k]] if sources[k] == SRC_THETA else xdata[slots[k]]
            b = -raw * scales[k]
            if kind == OP_RZ:
                _rz(psi, tbits[k], b)
                _rz(lam, tbits[k], b)
            else:
                _ry(psi, tbits[k], b)
                _ry(lam, tbits[k], b)
    return expval


@njit(**_JIT)
def batch_gradients(
    states, kinds, tbits, cbits, slots, sources, scales, diags,
    theta, xdata, zmask, xmask, evs_out, grads_out,
):
    """Adjoint sweep per row: expectation into ``evs_out[b]``, gradient into
    ``grads_out[b, :]``.  One compiled call replaces a Python loop of sweeps."""
    for b in range(states.shape[0]):
        evs_out[b] = adjoint_gradient(
            states[b], kinds, tbits, cbits, slots, sources, scales, diags,
            theta, xdata, zmask, xmask, grads_out[b],
        )
