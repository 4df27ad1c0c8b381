import pytest

from conftest import random_circuit
from qcopt.circuit import CNOT, NOT, RZ, Circuit, GateKind, counts, same_gates
from qcopt.dag import to_dag, to_netlist
from qcopt.floating import (
    apply_preserving_rules, apply_reducing_rules, build_skeleton, cancel_two_qubit_floating, compile_rules,
    enumerate_placements, materialize, routine5,
)
from qcopt.phasepoly import find_region
from qcopt.rules import load_seed_rules

T1, T2, T3, T4 = 0.3, 0.5, 0.7, 1.1
RULES = load_seed_rules()
COMPILED = compile_rules(RULES)


def _merged_two_wire():
    return Circuit(2, [RZ(1, T1 + T4), CNOT(0, 1), RZ(1, T2), CNOT(0, 1), RZ(0, T3), CNOT(1, 0)])


def _skeleton(c: Circuit):
    dag = to_dag(c)
    seed = next(i for i in dag.topological_order() if dag.kind[i] == GateKind.CNOT)
    sk, _terms = build_skeleton(find_region(dag, seed))
    return sk


def _slots(places, lin):
    return [(q, op) for _rank, q, op in places.get(lin, [])]


def test_placements_cnot_pair():
    sk = _skeleton(Circuit(2, [CNOT(0, 1), CNOT(0, 1)]))
    places = enumerate_placements(sk)
    first, second = sk.order()
    # wire 1 carries x1, then x0+x1, then x1 again
    assert [s for s in _slots(places, 0b10) if s[0] == 1] == [(1, -1), (1, second)]
    assert _slots(places, 0b11) == [(1, first)]


def test_placements_top_wire_end():
    sk = _skeleton(_merged_two_wire())
    places = enumerate_placements(sk)
    last = sk.order()[-1]
    assert (0, last) in _slots(places, 0b11)
    assert any(q == 1 for q, _ in _slots(places, 0b11))


def test_placements_single_wire_rotation():
    sk = _skeleton(Circuit(2, [RZ(0, 0.4), CNOT(0, 1)]))
    assert _slots(enumerate_placements(sk), 0b01)[0] == (0, -1)
    assert 0b01 in sk.need


def test_floating_cancels_pair_in_merged_two_wire():
    sk = _skeleton(_merged_two_wire())
    assert cancel_two_qubit_floating(sk) == 2
    assert sk.num_cnots() == 1 and sk.feasible()


def test_single_candidate_blocks_cancellation():
    sk = _skeleton(Circuit(2, [CNOT(0, 1), RZ(1, 0.4), CNOT(0, 1)]))
    assert cancel_two_qubit_floating(sk) == 0
    assert sk.num_cnots() == 2


def test_no_pairs_unchanged():
    sk = _skeleton(Circuit(3, [CNOT(0, 1), CNOT(1, 2), CNOT(2, 0)]))
    assert cancel_two_qubit_floating(sk) == 0 and not sk.changed


def test_routine5_merged_two_wire():
    c = _merged_two_wire()
    dag = to_dag(c)
    _, stats = routine5(dag, RULES)
    out = to_netlist(dag)
    want = [RZ(0, T3), RZ(1, T1 + T4), CNOT(1, 0), RZ(0, T2)]
    assert same_gates(out.gates, want)
    assert stats.cnot_cancelled == 2


def test_materialize_leftmost():
    sk = _skeleton(_merged_two_wire())
    cancel_two_qubit_floating(sk)
    placed = materialize(sk)
    spots = {lin: (op, q) for (op, q), (_a, lin) in placed.items()}
    assert spots[0b01] == (-1, 0) and spots[0b10] == (-1, 1)
    assert spots[0b11][1] == 0


def test_preserving_rule_commits_when_it_unlocks():
    c = Circuit(2, [CNOT(0, 1), CNOT(1, 0), CNOT(0, 1), CNOT(1, 0)])
    sk = _skeleton(c)
    assert cancel_two_qubit_floating(sk) == 0
    sk2, enabled = apply_preserving_rules(sk, COMPILED)
    assert enabled == 2 and sk2.num_cnots() == 2
    dag = to_dag(c)
    routine5(dag, RULES)
    out = to_netlist(dag)
    assert counts(out).cnot == 2


def test_preserving_rule_rolled_back():
    sk = _skeleton(Circuit(2, [CNOT(0, 1), CNOT(1, 0), CNOT(0, 1)]))
    snap = sk.copy()
    sk2, enabled = apply_preserving_rules(sk, COMPILED)
    assert enabled == 0 and sk2 is sk
    assert sk.__dict__ == snap.__dict__


def test_empty_rule_list():
    sk = _skeleton(Circuit(2, [CNOT(0, 1), CNOT(1, 0), CNOT(0, 1), CNOT(1, 0)]))
    snap = sk.copy()
    assert apply_preserving_rules(sk, [])[1] == 0
    assert apply_reducing_rules(sk, []) == 0
    assert sk.__dict__ == snap.__dict__


def test_reducing_cx_x_cx():
    sk = _skeleton(Circuit(2, [CNOT(0, 1), NOT(0), CNOT(0, 1)]))
    assert apply_reducing_rules(sk, COMPILED) == 1
    assert sk.num_cnots() == 0
    assert sorted(sk.qubits_of[op] for op in sk.order()) == [(0,), (1,)]


def test_reducing_chains_in_one_pass():
    # the first rewrite exposes two X X pairs
    c = Circuit(2, [CNOT(0, 1), NOT(0), CNOT(0, 1), NOT(0), NOT(1)])
    sk = _skeleton(c)
    removed = apply_reducing_rules(sk, COMPILED)
    assert sk.order() == [] and removed == 5
    assert apply_reducing_rules(sk, COMPILED) == 0


def test_reducing_no_match():
    sk = _skeleton(Circuit(2, [CNOT(0, 1), NOT(1), CNOT(1, 0)]))
    assert apply_reducing_rules(sk, COMPILED) == 0 and not sk.changed


def test_minimal_circuit_unchanged():
    c = Circuit(2, [RZ(1, 0.2), CNOT(0, 1), RZ(1, 0.3)])
    dag = to_dag(c)
    routine5(dag, RULES)
    assert same_gates(to_netlist(dag).gates, c.gates)


def test_compile_skips_non_skeleton_rules():
    names = {cr.rule.name for cr in COMPILED}
    assert "hh" not in names and "cx-xc-cx" in names


def test_routine5_random(rng):
    from qcopt.verify import equivalent_up_to_phase

    for i in range(150):
        n = int(rng.integers(2, 7))
        c = random_circuit(rng, n, int(rng.integers(1, 120)))
        dag = to_dag(c)
        routine5(dag, RULES)
        dag.check()
        out = to_netlist(dag)
        a, b = counts(c), counts(out)
        assert b.cnot <= a.cnot and b.rz_total <= a.rz_total, i
        assert equivalent_up_to_phase(c, out, 1e-8), i
