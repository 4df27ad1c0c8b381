"""Hadamard reduction and commutation-driven cancellation (routines 1-3).

The scanning loops for routines 2 and 3 live in the kernel modules; this file
holds the Hadamard pass, the Python-level entry points, and the certified
commutation patterns and Hadamard identities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import kernels
from .circuit import CNOT as cx, H as h_, NOT as x_, RZ as rz, Angle, Circuit, Gate, GateKind
from .dag import CNOT, DEAD, H, NOT, RZ, TOF, Dag

_P = math.pi / 2
_PDG = 3 * math.pi / 2
_EPS = 1e-10


def _is_angle(dag: Dag, i: int, value: float) -> bool:
    return dag.kind[i] == RZ and dag.sym[i] < 0 and abs(dag.ang[i] - value) < _EPS


def _next_on(dag: Dag, e: int) -> int:
    return dag.nxt[e]


def _absorb(dag: Dag, q: int, e_neighbor: int, theta: float) -> bool:
    """Add theta to the Rz owning half-edge e_neighbor, if it is one."""
    if e_neighbor < 0 or dag.kind[e_neighbor // 3] != RZ:
        return False
    i = e_neighbor // 3
    a = dag.angle(i) + Angle.make(theta)
    if a.is_zero():
        dag.remove(i)
    else:
        dag.set_angle(i, a)
    return True


def _rule_a(dag: Dag, g: int) -> bool:
    nxt, prv = dag.nxt, dag.prv
    e = nxt[3 * g]
    if e < 0 or dag.kind[e // 3] != CNOT:
        return False
    x = e // 3
    s = e - 3 * x
    eo = 3 * x + (1 - s)
    p_other = prv[eo]
    n_self = nxt[e]
    n_other = nxt[eo]
    if min(p_other, n_self, n_other) < 0:
        return False
    if not all(dag.kind[f // 3] == H for f in (p_other, n_self, n_other)):
        return False
    c, t = dag.qs[3 * x], dag.qs[3 * x + 1]
    dag.splice([g, x, p_other // 3, n_self // 3, n_other // 3], [cx(t, c)])
    return True


def _rule_de(dag: Dag, g: int) -> bool:
    """H P [CNOTs targeting b] P^dag H -> P^dag [CNOTs] P, and its mirror."""
    nxt = dag.nxt
    e1 = nxt[3 * g]
    if e1 < 0:
        return False
    r1 = e1 // 3
    if _is_angle(dag, r1, _P):
        want = _PDG
    elif _is_angle(dag, r1, _PDG):
        want = _P
    else:
        return False
    e = nxt[e1]
    runs = 0
    while e >= 0 and dag.kind[e // 3] == CNOT and e % 3 == 1:
        runs += 1
        e = nxt[e]
    if runs == 0 or e < 0 or not _is_angle(dag, e // 3, want):
        return False
    r2 = e // 3
    e_h = nxt[e]
    if e_h < 0 or dag.kind[e_h // 3] != H:
        return False
    a1, a2 = dag.ang[r1], dag.ang[r2]
    dag.ang[r1], dag.ang[r2] = a2, a1
    dag.remove(g)
    dag.remove(e_h // 3)
    return True


def _rule_bc(dag: Dag, g: int) -> bool:
    """H P H -> P^dag H P^dag (and conjugate), only when an Rz absorbs a P^dag."""
    nxt, prv = dag.nxt, dag.prv
    e1 = nxt[3 * g]
    if e1 < 0:
        return False
    mid = e1 // 3
    if _is_angle(dag, mid, _P):
        theta = _PDG
    elif _is_angle(dag, mid, _PDG):
        theta = _P
    else:
        return False
    e2 = nxt[e1]
    if e2 < 0 or dag.kind[e2 // 3] != H:
        return False
    left = prv[3 * g]
    right = nxt[e2]
    lz = left >= 0 and dag.kind[left // 3] == RZ
    rzr = right >= 0 and dag.kind[right // 3] == RZ
    if not (lz or rzr):
        return False
    q = dag.qs[3 * g]
    # middle becomes the single H; the two outer Hs go away
    dag.kind[mid] = H
    dag.ang[mid] = 0.0
    dag.sym[mid] = -1
    dag.remove(g)
    dag.remove(e2 // 3)
    e_mid = 3 * mid
    if lz:
        _absorb(dag, q, left, theta)
    else:
        dag.insert_before(RZ, q, e_mid, Angle.make(theta))
    if rzr:
        _absorb(dag, q, right, theta)
    else:
        dag.insert_single(RZ, q, e_mid, Angle.make(theta))
    return True


def reduce_hadamards(dag: Dag) -> tuple[Dag, int]:
    """Routine 1: one pass over H gates applying the Hadamard identities."""
    before = sum(1 for k in dag.kind if k == H)
    for g in dag.topological_order():
        if dag.kind[g] != H:
            continue
        _rule_a(dag, g) or _rule_de(dag, g) or _rule_bc(dag, g)
    after = sum(1 for k in dag.kind if k == H)
    return dag, before - after


def _merge_cb(dag: Dag):
    def cb(u: int, v: int) -> bool:
        a = dag.angle(u) + dag.angle(v)
        dag.set_angle(u, a)
        return a.is_zero()

    return cb


def cancel_single_qubit(dag: Dag, window: int = -1, backend: str | None = None) -> tuple[Dag, int]:
    """Routine 2: move one-qubit gates right to cancel or merge them."""
    k = kernels.get_backend(backend)
    removed = k.cancel_single_qubit(dag.kind, dag.qs, dag.nxt, dag.prv, dag.head, dag.tail,
                                    dag.ang, dag.sym, _merge_cb(dag), window)
    return dag, removed


def cancel_two_qubit(dag: Dag, window: int = -1, backend: str | None = None) -> tuple[Dag, int]:
    """Routine 3: move CNOTs right along both wires to find an identical partner."""
    k = kernels.get_backend(backend)
    removed = k.cancel_two_qubit(dag.kind, dag.qs, dag.nxt, dag.prv, dag.head, dag.tail, window)
    return dag, removed


def merge_adjacent_rz(dag: Dag, g1: int, g2: int) -> Dag:
    """Fold g2's angle into g1; a resulting zero rotation is deleted."""
    if dag.kind[g1] != RZ or dag.kind[g2] != RZ or dag.qs[3 * g1] != dag.qs[3 * g2]:
        raise ValueError("merge_adjacent_rz needs two Rz gates on one wire")
    a = dag.angle(g1) + dag.angle(g2)
    dag.remove(g2)
    if a.is_zero():
        dag.remove(g1)
    else:
        dag.set_angle(g1, a)
    return dag


def try_commute_right(dag: Dag, node: int):
    """One commutation step for an Rz or CNOT mover.

    Returns the half-edge just past the matched block (an ``(ec, et)`` pair
    for a CNOT) or None when no pattern applies.  The DAG is not modified.
    """
    kind, qs, nxt = dag.kind, dag.qs, dag.nxt
    if kind[node] == RZ:
        e = nxt[3 * node]
        if e < 0:
            return None
        h, s = divmod(e, 3)
        if kind[h] == CNOT and s == 0:
            return nxt[e]
        if kind[h] == TOF and s < 2:
            return nxt[e]
        if kind[h] == H:
            e1 = nxt[e]
            if e1 >= 0 and kind[e1 // 3] == CNOT and e1 % 3 == 1:
                e2 = nxt[e1]
                if e2 >= 0 and kind[e2 // 3] == H:
                    return nxt[e2]
            return None
        if kind[h] == CNOT and s == 1:
            e2 = nxt[e]
            while e2 >= 0 and kind[e2 // 3] == RZ:
                e2 = nxt[e2]
            if e2 >= 0 and kind[e2 // 3] == CNOT and e2 % 3 == 1 and qs[e2 - 1] == qs[3 * h]:
                ec = nxt[3 * h]
                while ec >= 0 and kind[ec // 3] == RZ:
                    ec = nxt[ec]
                if ec == e2 - 1:
                    return nxt[e2]
        return None
    if kind[node] == CNOT:
        c, t = qs[3 * node], qs[3 * node + 1]
        ec, et = nxt[3 * node], nxt[3 * node + 1]
        if ec >= 0:
            hc, sc = divmod(ec, 3)
            if kind[hc] == RZ or (kind[hc] == CNOT and sc == 0 and qs[3 * hc + 1] != t):
                return (nxt[ec], et)
        if et >= 0:
            ht, st = divmod(et, 3)
            if kind[ht] == NOT or (kind[ht] == CNOT and st == 1 and qs[3 * ht] != c):
                return (ec, nxt[et])
            if kind[ht] == H:
                e1 = nxt[et]
                if e1 >= 0 and kind[e1 // 3] == CNOT and e1 % 3 == 0 and qs[e1 + 1] != c:
                    e2 = nxt[e1]
                    if e2 >= 0 and kind[e2 // 3] == H:
                        return (ec, nxt[e2])
        return None
    raise ValueError("try_commute_right expects an Rz or CNOT node")


# -- certified pattern sets -------------------------------------------------

@dataclass(frozen=True)
class CommutationPattern:
    name: str
    mover: tuple[Gate, ...]
    block: tuple[Gate, ...]
    num_qubits: int = 3


_SAMPLE_ANGLES = (0.37, math.pi / 4, 2.9)


def _commutation_patterns() -> list[CommutationPattern]:
    pats = []
    for th in _SAMPLE_ANGLES:
        m = (rz(0, th),)
        pats += [
            CommutationPattern(f"R1 control θ={th:.3g}", m, (cx(0, 1),)),
            CommutationPattern(f"R2 H·CNOT·H θ={th:.3g}", m, (h_(0), cx(1, 0), h_(0))),
            CommutationPattern(f"R3 CNOT·Rz·CNOT θ={th:.3g}", m, (cx(1, 0), rz(0, 1.1), cx(1, 0))),
            CommutationPattern(f"R3 CNOT·Rz·Rz·CNOT θ={th:.3g}", m,
                               (cx(1, 0), rz(0, 0.2), rz(1, 0.5), cx(1, 0))),
            CommutationPattern(f"Rz Toffoli control θ={th:.3g}", m, (Gate(GateKind.TOFFOLI, (0, 1, 2)),)),
            CommutationPattern(f"Rz negated Toffoli control θ={th:.3g}", m,
                               (Gate(GateKind.TOFFOLI, (1, 0, 2), negated=(False, True)),)),
        ]
    c01 = (cx(0, 1),)
    pats += [
        CommutationPattern("C1 shared control", c01, (cx(0, 2),)),
        CommutationPattern("C2 shared target", c01, (cx(2, 1),)),
        CommutationPattern("C3 H·CNOT·H on target", c01, (h_(1), cx(1, 2), h_(1))),
        CommutationPattern("CNOT past Rz on control", c01, (rz(0, 0.7),)),
        CommutationPattern("CNOT past NOT on target", c01, (x_(1),)),
        CommutationPattern("CNOT past Toffoli sharing control", c01, (Gate(GateKind.TOFFOLI, (0, 2, 3)),), 4),
        CommutationPattern("CNOT past Toffoli sharing target", c01, (Gate(GateKind.TOFFOLI, (2, 3, 1)),), 4),
        CommutationPattern("NOT past CNOT target", (x_(1),), c01),
        CommutationPattern("NOT past Toffoli target", (x_(2),), (Gate(GateKind.TOFFOLI, (0, 1, 2)),)),
    ]
    return pats


def _hadamard_identities() -> list[tuple[str, tuple[Gate, ...], tuple[Gate, ...]]]:
    P, PD = math.pi / 2, 3 * math.pi / 2
    return [
        ("(a) HH·CNOT·HH", (h_(0), h_(1), cx(0, 1), h_(0), h_(1)), (cx(1, 0),)),
        ("(b) H·P·H", (h_(0), rz(0, P), h_(0)), (rz(0, PD), h_(0), rz(0, PD))),
        ("(c) H·P†·H", (h_(0), rz(0, PD), h_(0)), (rz(0, P), h_(0), rz(0, P))),
        ("(d) H·P·CNOT·P†·H", (h_(1), rz(1, P), cx(0, 1), rz(1, PD), h_(1)), (rz(1, PD), cx(0, 1), rz(1, P))),
        ("(e) H·P†·CNOT·P·H", (h_(1), rz(1, PD), cx(0, 1), rz(1, P), h_(1)), (rz(1, P), cx(0, 1), rz(1, PD))),
        ("(d) with CNOT run", (h_(2), rz(2, P), cx(0, 2), cx(1, 2), rz(2, PD), h_(2)),
         (rz(2, PD), cx(0, 2), cx(1, 2), rz(2, P))),
        ("(e) with CNOT run", (h_(2), rz(2, PD), cx(1, 2), cx(0, 2), rz(2, P), h_(2)),
         (rz(2, P), cx(1, 2), cx(0, 2), rz(2, PD))),
    ]


COMMUTATION_PATTERNS = _commutation_patterns()
HADAMARD_IDENTITIES = _hadamard_identities()


class CertificationError(RuntimeError):
    pass


def certify_patterns(tol: float = 1e-12) -> int:
    """Check every shipped pattern and identity unitarily; returns the number checked."""
    from .verify import equivalent_up_to_phase

    n_checked = 0
    for p in COMMUTATION_PATTERNS:
        n = p.num_qubits
        lhs = Circuit(n, list(p.mover + p.block))
        rhs = Circuit(n, list(p.block + p.mover))
        res = equivalent_up_to_phase(lhs, rhs, tol)
        if not res:
            raise CertificationError(f"commutation pattern {p.name!r} fails (deviation {res.deviation:.2e})")
        n_checked += 1
    for name, lhs, rhs in HADAMARD_IDENTITIES:
        res = equivalent_up_to_phase(Circuit(3, list(lhs)), Circuit(3, list(rhs)), tol)
        if not res:
            raise CertificationError(f"Hadamard identity {name!r} fails (deviation {res.deviation:.2e})")
        n_checked += 1
    return n_checked


certify_patterns()
