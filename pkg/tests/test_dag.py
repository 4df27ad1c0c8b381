import math

import numpy as np
import pytest

from conftest import random_circuit
from qcopt.circuit import CNOT, H, NOT, RZ, T, Circuit, GateKind, counts
from qcopt.dag import BOUNDARY, DagError, neighbors, to_dag, to_netlist
from qcopt.verify import equivalent_up_to_phase


def _projection(dag):
    return {q: [dag.gate(i) for i in dag.wire(q)] for q in range(dag.num_qubits)}


def test_chains_follow_netlist():
    d = to_dag(Circuit(2, [H(0), CNOT(0, 1), H(1)]))
    assert [d.gate(i) for i in d.wire(0)] == [H(0), CNOT(0, 1)]
    assert [d.gate(i) for i in d.wire(1)] == [CNOT(0, 1), H(1)]
    d.check()


def test_empty_and_single():
    d = to_dag(Circuit(3))
    assert list(d.head) == [-1, -1, -1] and to_netlist(d).gates == []
    assert to_netlist(to_dag(Circuit(1, [H(0)]))).gates == [H(0)]


def test_disjoint_gates_ordered_by_id():
    assert to_netlist(to_dag(Circuit(2, [H(1), H(0)]))).gates == [H(1), H(0)]


def test_neighbors():
    d = to_dag(Circuit(1, [H(0), T(0)]))
    assert neighbors(d, 0, 0, "next") == 1
    assert neighbors(d, 0, 0, "prev") == BOUNDARY
    d.remove(1)
    assert neighbors(d, 0, 0, "next") == BOUNDARY
    with pytest.raises(DagError):
        neighbors(d, 1, 0)
    with pytest.raises(DagError):
        neighbors(d, 0, 3)


def test_splice_removes_hh():
    d = to_dag(Circuit(1, [T(0), H(0), H(0), T(0)]))
    d.splice([1, 2], [])
    d.check()
    assert to_netlist(d).gates == [T(0), T(0)]


def test_splice_hadamard_sandwich():
    c = Circuit(2, [H(0), H(1), CNOT(0, 1), H(0), H(1)])
    d = to_dag(c)
    d.splice(range(5), [CNOT(1, 0)])
    d.check()
    out = to_netlist(d)
    assert out.gates == [CNOT(1, 0)]
    assert counts(c).h - counts(out).h == 4
    assert equivalent_up_to_phase(c, out)


def test_splice_rejects_gap():
    d = to_dag(Circuit(1, [H(0), T(0), H(0)]))
    with pytest.raises(DagError):
        d.splice([0, 2], [])


def test_round_trip_unitary(rng):
    for _ in range(20):
        n = int(rng.integers(1, 9))
        c = random_circuit(rng, n, 80, toffoli=True)
        assert equivalent_up_to_phase(c, to_netlist(to_dag(c)), 1e-8)


def test_large_round_trip_is_topological_reordering(rng):
    c = random_circuit(rng, 6, 100_000)
    out = to_netlist(to_dag(c))
    assert len(out.gates) == sum(1 for g in c.gates if not (g.kind == GateKind.RZ and g.angle.is_zero()))
    assert _projection(to_dag(out)) == _projection(to_dag(c))
    small = Circuit(6, c.gates[:3000])
    assert equivalent_up_to_phase(small, to_netlist(to_dag(small)), 1e-8)


def _random_edit(d, rng, n):
    """Replace a run on one wire (or one CNOT) by random gates; returns the expected projection."""
    proj = _projection(d)
    q = int(rng.integers(n))
    wire = d.wire(q)
    singles = [i for i in wire if d.kind[i] in (GateKind.NOT, GateKind.H, GateKind.RZ)]
    if singles and rng.random() < 0.6:
        start = wire.index(singles[int(rng.integers(len(singles)))])
        stop = start
        while stop + 1 < len(wire) and stop - start < 2 and d.kind[wire[stop + 1]] in (0, 1, 2):
            stop += 1
        rem = wire[start:stop + 1]
        ins = [[H(q), NOT(q), RZ(q, 0.7)][int(rng.integers(3))] for _ in range(int(rng.integers(0, 3)))]
        proj[q][start:stop + 1] = ins
        d.splice(rem, ins)
        return proj
    cx = [i for i in wire if d.kind[i] == GateKind.CNOT]
    if not cx:
        d.splice([], [H(q)], at={q: -1})
        proj[q].insert(0, H(q))
        return proj
    i = cx[int(rng.integers(len(cx)))]
    c, t = d.qubits(i)
    new = CNOT(t, c) if rng.random() < 0.5 else CNOT(c, t)
    for w in (c, t):
        k = d.wire(w).index(i)
        proj[w][k] = new
    d.splice([i], [new])
    return proj


def test_splice_stress_matches_rebuild(rng):
    for trial in range(30):
        n = int(rng.integers(2, 6))
        d = to_dag(random_circuit(rng, n, 60, generic=False))
        for step in range(40):
            expect = _random_edit(d, rng, n)
            d.check()
            assert _projection(d) == expect, (trial, step)
            rebuilt = to_dag(to_netlist(d))
            assert _projection(rebuilt) == _projection(d)
        d.renumber()
        d.check()


def test_chain_lengths_sum_to_arity(rng):
    d = to_dag(random_circuit(rng, 5, 100, toffoli=True))
    for i in list(d.nodes())[::3]:
        d.remove(i)
    total = sum(len(d.wire(q)) for q in range(d.num_qubits))
    assert total == sum(d.arity(i) for i in d.nodes())
