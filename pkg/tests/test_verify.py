import math

import numpy as np
import pytest

from conftest import random_circuit
from qcopt.circuit import CNOT, H, NOT, RZ, T, TOFFOLI, Circuit
from qcopt.verify import MAX_QUBITS, apply_circuit, equivalent_on_states, equivalent_up_to_phase, unitary


def test_hadamard_matrix():
    assert np.allclose(unitary(Circuit(1, [H(0)])), np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_empty_is_identity():
    assert np.allclose(unitary(Circuit(3, [])), np.eye(8))


def test_cnot_matrix_msb_first():
    want = np.eye(4)[[0, 1, 3, 2]]
    assert np.allclose(unitary(Circuit(2, [CNOT(0, 1)])), want)
    want_rev = np.eye(4)[[0, 3, 2, 1]]
    assert np.allclose(unitary(Circuit(2, [CNOT(1, 0)])), want_rev)


def test_negated_toffoli_matrix():
    u = unitary(Circuit(3, [TOFFOLI(0, 1, 2, neg_a=True)]))
    # fires on a=0, b=1: basis 010 <-> 011
    assert np.allclose(u, np.eye(8)[[0, 1, 3, 2, 4, 5, 6, 7]])


def test_rz_matrix():
    th = 0.37
    assert np.allclose(unitary(Circuit(1, [RZ(0, th)])), np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]))


def test_t_equals_rz_pi4():
    t = Circuit(1, [T(0)])
    assert equivalent_up_to_phase(t, Circuit(1, [RZ(0, math.pi / 4)]), 1e-12)


def test_h_differs_from_not():
    res = equivalent_up_to_phase(Circuit(1, [H(0)]), Circuit(1, [NOT(0)]))
    assert not res and res.deviation > 0.1


def test_relative_phase_detected():
    a = Circuit(2, [RZ(0, 0.3)])
    b = Circuit(2, [RZ(1, 0.3)])
    assert not equivalent_up_to_phase(a, b)


def test_reflexive_and_symmetric(rng):
    for _ in range(10):
        a = random_circuit(rng, 3, 30)
        b = random_circuit(rng, 3, 30)
        assert equivalent_up_to_phase(a, a, 1e-12)
        assert bool(equivalent_up_to_phase(a, b)) == bool(equivalent_up_to_phase(b, a))


def test_qubit_limits():
    big = Circuit(MAX_QUBITS + 1, [H(0)])
    with pytest.raises(ValueError):
        equivalent_up_to_phase(big, big)
    with pytest.raises(ValueError):
        equivalent_up_to_phase(Circuit(1, []), Circuit(2, []))


def test_batched_path_matches(rng):
    n = 9
    c = random_circuit(rng, n, 60)
    moved = Circuit(n, [RZ(0, 0.2), CNOT(0, 1)] + c.gates)
    same = Circuit(n, [CNOT(0, 1), RZ(0, 0.2)] + c.gates)  # Rz on a control commutes
    assert equivalent_up_to_phase(moved, same, 1e-10)
    other = Circuit(n, [RZ(1, 0.2), CNOT(0, 1)] + c.gates)
    assert not equivalent_up_to_phase(moved, other, 1e-10)


def test_apply_circuit_batch_columns(rng):
    c = random_circuit(rng, 3, 25)
    u = unitary(c)
    psi = rng.normal(size=(8, 3)) + 0j
    assert np.allclose(apply_circuit(c, psi), u @ psi)


def test_equivalent_on_states(rng):
    c = random_circuit(rng, 4, 40)
    assert equivalent_on_states(c, c, 6, seed=1)
    assert not equivalent_on_states(c, Circuit(4, c.gates + [H(2)]), 6, seed=1)
