"""Brute-force equivalence oracle.

Qubit 0 is the most significant bit of the basis index.  Gates are applied by
reshaping the amplitude array to one axis per qubit, so building a unitary is
the same code path as evolving a batch of state vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate, GateKind, expand_blocks

MAX_QUBITS = 12
DEFAULT_TOL = 1e-8
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


class VerificationError(AssertionError):
    pass


def _apply(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    k = g.kind
    if k == GateKind.H:
        q = g.qubits[0]
        state = np.tensordot(_H, state, axes=([1], [q]))
        return np.moveaxis(state, 0, q)
    if k == GateKind.RZ:
        if not g.angle.is_concrete:
            raise ValueError("symbolic angle in verifier input")
        q = g.qubits[0]
        th = g.angle.radians
        idx0 = (slice(None),) * q + (0,)
        idx1 = (slice(None),) * q + (1,)
        state[idx0] *= np.exp(-0.5j * th)
        state[idx1] *= np.exp(0.5j * th)
        return state
    if k == GateKind.NOT:
        return np.flip(state, axis=g.qubits[0]).copy()
    # controlled X: fix the control axes, flip the target axis in that slice
    *ctrl, t = g.qubits
    neg = g.negated or (False,) * len(ctrl)
    idx: list = [slice(None)] * (n + 1)
    for c, ng in zip(ctrl, neg):
        idx[c] = 0 if ng else 1
    sub_axis = t - sum(1 for c in ctrl if c < t)
    view = state[tuple(idx)]
    state[tuple(idx)] = np.flip(view, axis=sub_axis).copy()
    return state


def apply_circuit(circuit: Circuit, states: np.ndarray) -> np.ndarray:
    """Evolve a (2**n, m) batch of column states through the circuit."""
    flat = expand_blocks(circuit)
    n = flat.num_qubits
    m = states.shape[1]
    st = np.array(states, dtype=complex).reshape((2,) * n + (m,))
    for g in flat.gates:
        st = _apply(st, g, n)
    return st.reshape(2 ** n, m)


def unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"unitary limited to {MAX_QUBITS} qubits, got {n}")
    return apply_circuit(circuit, np.eye(2 ** n, dtype=complex))


@dataclass
class Equivalence:
    equal: bool
    deviation: float

    def __bool__(self) -> bool:
        return self.equal


def _phase_compare(u1: np.ndarray, u2: np.ndarray, tol: float) -> Equivalence:
    flat1, flat2 = u1.ravel(), u2.ravel()
    big = np.flatnonzero((np.abs(flat1) > tol) & (np.abs(flat2) > tol))
    if big.size == 0:
        dev = float(np.max(np.abs(flat1 - flat2))) if flat1.size else 0.0
        return Equivalence(dev <= tol, dev)
    i = big[0]
    ph = flat1[i] / flat2[i]
    ph /= abs(ph)
    dev = float(np.max(np.abs(u1 - ph * u2)))
    return Equivalence(dev <= tol, dev)


def equivalent_up_to_phase(c1: Circuit, c2: Circuit, tol: float = DEFAULT_TOL) -> Equivalence:
    if c1.num_qubits != c2.num_qubits:
        raise ValueError(f"qubit counts differ: {c1.num_qubits} vs {c2.num_qubits}")
    n = c1.num_qubits
    if n > MAX_QUBITS:
        raise ValueError(f"equivalence check limited to {MAX_QUBITS} qubits, got {n}")
    if n <= 8:
        return _phase_compare(unitary(c1), unitary(c2), tol)
    # column batches keep peak memory bounded
    dim = 2 ** n
    step = 256
    worst = 0.0
    phase = None
    for start in range(0, dim, step):
        cols = np.zeros((dim, min(step, dim - start)), dtype=complex)
        cols[np.arange(start, start + cols.shape[1]), np.arange(cols.shape[1])] = 1
        a = apply_circuit(c1, cols)
        b = apply_circuit(c2, cols)
        if phase is None:
            res = _phase_compare(a, b, tol)
            fa, fb = a.ravel(), b.ravel()
            big = np.flatnonzero((np.abs(fa) > tol) & (np.abs(fb) > tol))
            if big.size:
                phase = fa[big[0]] / fb[big[0]]
                phase /= abs(phase)
            worst = max(worst, res.deviation)
        else:
            worst = max(worst, float(np.max(np.abs(a - phase * b))))
        if worst > tol:
            return Equivalence(False, worst)
    return Equivalence(worst <= tol, worst)


def equivalent_on_states(c1: Circuit, c2: Circuit, num_states: int = 4, seed: int = 0,
                         tol: float = DEFAULT_TOL) -> Equivalence:
    """Cheaper randomized check: compare outputs on random input states."""
    if c1.num_qubits != c2.num_qubits:
        raise ValueError("qubit counts differ")
    rng = np.random.default_rng(seed)
    dim = 2 ** c1.num_qubits
    psi = rng.normal(size=(dim, num_states)) + 1j * rng.normal(size=(dim, num_states))
    psi /= np.linalg.norm(psi, axis=0)
    return _phase_compare(apply_circuit(c1, psi), apply_circuit(c2, psi), tol)


def checked_optimize(circuit: Circuit, mode: str = "light", tol: float = DEFAULT_TOL, **kw) -> Circuit:
    """Optimize, then insist that the result matches the input unitarily."""
    from .pipeline import Config, optimize

    out, _ = optimize(circuit, Config(mode=mode, **kw))
    res = equivalent_up_to_phase(circuit, out, tol)
    if not res:
        from .qcio import emit_qc

        raise VerificationError(
            f"optimization changed the unitary (deviation {res.deviation:.3e})\n"
            f"--- input ---\n{emit_qc(circuit)}\n--- output ---\n{emit_qc(out)}")
    return out
