"""Pure-numpy statevector kernels (reference backend).

Same call signatures as :mod:`qmlbounds.kernels_numba`; selected when numba
is unavailable or when ``QMLBOUNDS_BACKEND=numpy`` is set.  Gate ops work on
reshaped views so each op is one vectorized pass over the amplitudes.
"""

from __future__ import annotations

import numpy as np

from .circuits import OP_CNOT, OP_DIAG_EXP, OP_RY, OP_RZ, SRC_THETA

_PHASE_CYCLE = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def _rz(state: np.ndarray, tbit: int, b: float) -> None:
    view = state.reshape(-1, 2, 1 << tbit)
    view[:, 0, :] *= complex(np.cos(b), -np.sin(b))
    view[:, 1, :] *= complex(np.cos(b), np.sin(b))


def _ry(state: np.ndarray, tbit: int, b: float) -> None:
    c, s = np.cos(b), np.sin(b)
    view = state.reshape(-1, 2, 1 << tbit)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = c * a0 - s * a1
    view[:, 1, :] = s * a0 + c * a1


def _cnot(state: np.ndarray, cbit: int, tbit: int) -> None:
    s = np.arange(state.shape[0])
    s0 = s[((s >> cbit) & 1 == 1) & ((s >> tbit) & 1 == 0)]
    s1 = s0 | (1 << tbit)
    tmp = state[s0].copy()
    state[s0] = state[s1]
    state[s1] = tmp


def _diag_exp(state: np.ndarray, tbit: int, x: float, diagrow: np.ndarray) -> None:
    j = (np.arange(state.shape[0]) >> tbit) & 7
    state *= np.exp(-1j * x * diagrow)[j]


def _op_angle(k, slots, sources, scales, theta, xdata) -> float:
    raw = theta[slots[k]] if sources[k] == SRC_THETA else xdata[slots[k]]
    return float(raw * scales[k])


def run_program(
    state, kinds, tbits, cbits, slots, sources, scales, diags, theta, xdata, reverse=False
) -> None:
    """Apply the compiled op list to ``state`` in place (inverse if ``reverse``)."""
    order = range(kinds.shape[0] - 1, -1, -1) if reverse else range(kinds.shape[0])
    sgn = -1.0 if reverse else 1.0
    for k in order:
        kind = kinds[k]
        if kind == OP_RZ:
            _rz(state, tbits[k], sgn * _op_angle(k, slots, sources, scales, theta, xdata))
        elif kind == OP_RY:
            _ry(state, tbits[k], sgn * _op_angle(k, slots, sources, scales, theta, xdata))
        elif kind == OP_CNOT:
            _cnot(state, cbits[k], tbits[k])
        else:
            _diag_exp(state, tbits[k], sgn * xdata[slots[k]], diags[k])


def apply_pauli(state: np.ndarray, zmask: int, xmask: int) -> np.ndarray:
    """P|state> via bit masks: out[s] = i^{|z&x|} (-1)^{|z&(s^x)|} state[s^x]."""
    s = np.arange(state.shape[0])
    src = s ^ xmask
    signs = 1.0 - 2.0 * (np.bitwise_count(src & zmask) & 1)
    phase = _PHASE_CYCLE[int(np.bitwise_count(np.int64(zmask & xmask))) & 3]
    return phase * signs * state[src]


def pauli_expectation(state: np.ndarray, zmask: int, xmask: int) -> float:
    """<state|P|state> (real part; exact for normalized states)."""
    return float(np.vdot(state, apply_pauli(state, zmask, xmask)).real)


def _generator_overlap(lam, psi, kind, tbit) -> complex:
    """<lam|G|psi> for G = Z (rz ops) or Y (ry ops) on the target bit."""
    lamv = lam.reshape(-1, 2, 1 << tbit)
    psiv = psi.reshape(-1, 2, 1 << tbit)
    if kind == OP_RZ:
        return complex(
            np.sum(np.conj(lamv[:, 0, :]) * psiv[:, 0, :])
            - np.sum(np.conj(lamv[:, 1, :]) * psiv[:, 1, :])
        )
    return complex(
        -1j * np.sum(np.conj(lamv[:, 0, :]) * psiv[:, 1, :])
        + 1j * np.sum(np.conj(lamv[:, 1, :]) * psiv[:, 0, :])
    )


def batch_expectations(
    states, kinds, tbits, cbits, slots, sources, scales, diags,
    theta, xdata, zmask, xmask, out,
) -> None:
    """Forward pass + <P> for every row of ``states`` (rows left untouched)."""
    for b in range(states.shape[0]):
        psi = states[b].copy()
        run_program(psi, kinds, tbits, cbits, slots, sources, scales, diags, theta, xdata)
        out[b] = pauli_expectation(psi, zmask, xmask)


def adjoint_gradient(
    state, kinds, tbits, cbits, slots, sources, scales, diags,
    theta, xdata, zmask, xmask, grad_out,
) -> float:
    """Reverse-sweep gradient of <P> after the program, w.r.t. every theta slot.

    Returns the expectation value; ``grad_out`` receives d<P>/d theta_k.
    """
    psi = state.copy()
    run_program(psi, kinds, tbits, cbits, slots, sources, scales, diags, theta, xdata)
    lam = apply_pauli(psi, zmask, xmask)
    expval = float(np.vdot(psi, lam).real)
    grad_out[:] = 0.0
    for k in range(kinds.shape[0] - 1, -1, -1):
        kind = kinds[k]
        if sources[k] == SRC_THETA:
            ov = _generator_overlap(lam, psi, kind, tbits[k])
            grad_out[slots[k]] += 2.0 * scales[k] * ov.imag
        # undo op k on both vectors to step down one level
        if kind == OP_RZ:
            b = -_op_angle(k, slots, sources, scales, theta, xdata)
            _rz(psi, tbits[k], b)
            _rz(lam, tbits[k], b)
        elif kind == OP_RY:
            b = -_op_angle(k, slots, sources, scales, theta, xdata)
            _ry(psi, tbits[k], b)
            _ry(lam, tbits[k], b)
        elif kind == OP_CNOT:
            _cnot(psi, cbits[k], tbits[k])
            _cnot(lam, cbits[k], tbits[k])
        else:
            x = -xdata[slots[k]]
            _diag_exp(psi, tbits[k], x, diags[k])
            _diag_exp(lam, tbits[k], x, diags[k])
    return expval


def batch_gradients(
    states, kinds, tbits, cbits, slots, sources, scales, diags,
    theta, xdata, zmask, xmask, evs_out, grads_out,
) -> None:
    """Adjoint sweep per row: expectation into ``evs_out[b]``, gradient into
    ``grads_out[b, :]``."""
    for b in range(states.shape[0]):
        evs_out[b] = adjoint_gradient(
            states[b], kinds, tbits, cbits, slots, sources, scales, diags,
            theta, xdata, zmask, xmask, grads_out[b],
        )
