"""Per-wire doubly linked gate graph.

Storage is struct-of-arrays so the compiled kernels can walk it directly.
Every node owns three half-edge slots ``3*i + s``; slot ``s`` is the node's
``s``-th operand.  ``nxt``/``prv`` link half-edges along a wire, with -1 as
the boundary.  Dead nodes carry kind -1 and are unreachable from the heads.
"""
from __future__ import annotations

import heapq
from array import array
from typing import Iterable, Sequence

from .circuit import ARITY, Angle, Circuit, Gate, GateKind, expand_blocks

DEAD = -1
NOT, H, RZ, CNOT, TOF = 0, 1, 2, 3, 4
BOUNDARY = -1


class DagError(ValueError):
    pass


class Dag:
    def __init__(self, num_qubits: int):
        self.num_qubits = num_qubits
        self.kind = array("b")
        self.qs = array("l")
        self.nxt = array("l")
        self.prv = array("l")
        self.ang = array("d")
        self.sym = array("l")
        self.neg = array("b")
        self.pos = array("d")
        self.head = array("l", [-1] * num_qubits)
        self.tail = array("l", [-1] * num_qubits)
        self.symbols: list[tuple[tuple[int, int], ...]] = []
        self.pos_dirty = False

    # -- node creation -------------------------------------------------
    def _new_node(self, kind: int, qubits: Sequence[int], angle: Angle | None, neg: int, pos: float) -> int:
        i = len(self.kind)
        self.kind.append(kind)
        for s in range(3):
            self.qs.append(qubits[s] if s < len(qubits) else -1)
            self.nxt.append(-1)
            self.prv.append(-1)
        if angle is None:
            self.ang.append(0.0)
            self.sym.append(-1)
        else:
            self.ang.append(angle.radians)
            self.sym.append(self._intern(angle.terms))
        self.neg.append(neg)
        self.pos.append(pos)
        return i

    def _intern(self, terms: tuple) -> int:
        if not terms:
            return -1
        self.symbols.append(terms)
        return len(self.symbols) - 1

    def append(self, g: Gate) -> int:
        neg = 0
        if g.negated:
            neg = (1 if g.negated[0] else 0) | (2 if g.negated[1] else 0)
        i = self._new_node(int(g.kind), g.qubits, g.angle, neg, float(len(self.kind)))
        for s, q in enumerate(g.qubits):
            e = 3 * i + s
            t = self.tail[q]
            if t == -1:
                self.head[q] = e
            else:
                self.nxt[t] = e
                self.prv[e] = t
            self.tail[q] = e
        return i

    # -- queries --------------------------------------------------------
    def __len__(self) -> int:
        return len(self.kind)

    def alive(self, i: int) -> bool:
        return self.kind[i] != DEAD

    def nodes(self) -> Iterable[int]:
        k = self.kind
        return (i for i in range(len(k)) if k[i] != DEAD)

    def arity(self, i: int) -> int:
        return ARITY[GateKind(self.kind[i])]

    def qubits(self, i: int) -> tuple[int, ...]:
        return tuple(self.qs[3 * i + s] for s in range(self.arity(i)))

    def slot_of(self, i: int, q: int) -> int:
        for s in range(self.arity(i)):
            if self.qs[3 * i + s] == q:
                return s
        raise DagError(f"qubit {q} is not an operand of node {i}")

    def angle(self, i: int) -> Angle:
        s = self.sym[i]
        return Angle(self.ang[i], self.symbols[s] if s >= 0 else ())

    def set_angle(self, i: int, a: Angle) -> None:
        self.ang[i] = a.radians
        self.sym[i] = self._intern(a.terms)

    def gate(self, i: int) -> Gate:
        k = GateKind(self.kind[i])
        qs = self.qubits(i)
        if k == GateKind.RZ:
            return Gate(k, qs, self.angle(i))
        if k == GateKind.TOFFOLI and self.neg[i]:
            return Gate(k, qs, negated=(bool(self.neg[i] & 1), bool(self.neg[i] & 2)))
        return Gate(k, qs)

    def neighbor(self, i: int, q: int, forward: bool = True) -> int:
        """Adjacent node on wire q, or BOUNDARY."""
        e = 3 * i + self.slot_of(i, q)
        f = self.nxt[e] if forward else self.prv[e]
        return f // 3 if f >= 0 else BOUNDARY

    def wire(self, q: int) -> list[int]:
        out = []
        e = self.head[q]
        while e != -1:
            out.append(e // 3)
            e = self.nxt[e]
        return out

    # -- mutation -------------------------------------------------------
    def remove(self, i: int) -> None:
        if self.kind[i] == DEAD:
            return
        nxt, prv = self.nxt, self.prv
        for s in range(self.arity(i)):
            e = 3 * i + s
            p, n = prv[e], nxt[e]
            q = self.qs[e]
            if p >= 0:
                nxt[p] = n
            else:
                self.head[q] = n
            if n >= 0:
                prv[n] = p
            else:
                self.tail[q] = p
            nxt[e] = prv[e] = -1
        self.kind[i] = DEAD

    def _link_after(self, e_new: int, q: int, after: int) -> None:
        """Link half-edge e_new on wire q right after half-edge `after` (-1 = head)."""
        nxt, prv = self.nxt, self.prv
        n = nxt[after] if after >= 0 else self.head[q]
        prv[e_new] = after
        nxt[e_new] = n
        if after >= 0:
            nxt[after] = e_new
        else:
            self.head[q] = e_new
        if n >= 0:
            prv[n] = e_new
        else:
            self.tail[q] = e_new

    def _pos_between(self, lo: float | None, hi: float | None) -> float:
        if lo is None and hi is None:
            return 0.0
        if lo is None:
            return hi - 1.0
        if hi is None:
            return lo + 1.0
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            self.pos_dirty = True
        return mid

    def insert_single(self, kind: int, q: int, after: int, angle: Angle | None = None) -> int:
        """New one-qubit node on wire q after half-edge `after` (-1 = wire start)."""
        n = self.nxt[after] if after >= 0 else self.head[q]
        lo = self.pos[after // 3] if after >= 0 else None
        hi = self.pos[n // 3] if n >= 0 else None
        i = self._new_node(kind, (q,), angle, 0, self._pos_between(lo, hi))
        self._link_after(3 * i, q, after)
        return i

    def insert_before(self, kind: int, q: int, before: int, angle: Angle | None = None) -> int:
        after = self.prv[before] if before >= 0 else self.tail[q]
        return self.insert_single(kind, q, after, angle)

    def splice(self, remove: Iterable[int], insert: Sequence[Gate],
               at: dict[int, int] | None = None) -> list[int]:
        """Replace a per-wire contiguous window of nodes by a gate list.

        ``at`` gives, for wires touched only by the inserted gates, the
        half-edge after which they go (-1 for the wire start).
        """
        rem = sorted(set(remove))
        nxt, prv = self.nxt, self.prv
        left: dict[int, int] = {}
        right: dict[int, int] = {}
        for q in {q for i in rem for q in self.qubits(i)}:
            es = {3 * i + self.slot_of(i, q) for i in rem if q in self.qubits(i)}
            firsts = [e for e in es if prv[e] not in es]
            if len(firsts) != 1:
                raise DagError(f"removal window is not contiguous on wire {q}")
            e, seen = firsts[0], 0
            while e in es:
                seen += 1
                last = e
                e = nxt[e]
            if seen != len(es):
                raise DagError(f"removal window is not contiguous on wire {q}")
            left[q] = prv[firsts[0]]
            right[q] = nxt[last]
        for q, e in (at or {}).items():
            if q in left:
                continue
            left[q] = e
            right[q] = nxt[e] if e >= 0 else self.head[q]
        for g in insert:
            for q in g.qubits:
                if q not in left:
                    raise DagError(f"no anchor for wire {q}")
        for i in rem:
            self.remove(i)
        los = [self.pos[e // 3] for e in left.values() if e >= 0]
        his = [self.pos[e // 3] for e in right.values() if e >= 0]
        lo = max(los) if los else (min(his) - len(insert) - 1 if his else 0.0)
        hi = min(his) if his else lo + len(insert) + 1
        if not lo < hi:
            self.pos_dirty = True
            hi = lo + len(insert) + 1
        cursor = dict(left)
        new = []
        for j, g in enumerate(insert):
            neg = 0
            if g.negated:
                neg = (1 if g.negated[0] else 0) | (2 if g.negated[1] else 0)
            p = lo + (hi - lo) * (j + 1) / (len(insert) + 1)
            i = self._new_node(int(g.kind), g.qubits, g.angle, neg, p)
            for s, q in enumerate(g.qubits):
                self._link_after(3 * i + s, q, cursor[q])
                cursor[q] = 3 * i + s
            new.append(i)
        return new

    # -- ordering -------------------------------------------------------
    def renumber(self) -> None:
        order = self.topological_order()
        for r, i in enumerate(order):
            self.pos[i] = float(r)
        self.pos_dirty = False

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, ready nodes ordered by (pos, id)."""
        kind, nxt, prv, pos = self.kind, self.nxt, self.prv, self.pos
        alive = [i for i in range(len(kind)) if kind[i] != DEAD]
        if not self.pos_dirty:
            return sorted(alive, key=lambda i: (pos[i], i))
        indeg = {}
        heap = []
        for i in alive:
            d = sum(1 for s in range(ARITY[kind[i]]) if prv[3 * i + s] >= 0)
            indeg[i] = d
            if d == 0:
                heap.append((pos[i], i))
        heapq.heapify(heap)
        out = []
        while heap:
            _, i = heapq.heappop(heap)
            out.append(i)
            for s in range(ARITY[kind[i]]):
                n = nxt[3 * i + s]
                if n >= 0:
                    j = n // 3
                    indeg[j] -= 1
                    if indeg[j] == 0:
                        heapq.heappush(heap, (pos[j], j))
        if len(out) != len(alive):
            raise DagError("cycle detected in DAG")
        return out

    def check(self) -> None:
        """Validate link structure (used by tests)."""
        seen = 0
        for q in range(self.num_qubits):
            e, p = self.head[q], -1
            while e != -1:
                if self.kind[e // 3] == DEAD:
                    raise DagError(f"dead node {e // 3} reachable on wire {q}")
                if self.qs[e] != q or self.prv[e] != p:
                    raise DagError(f"broken link at half-edge {e}")
                p, e = e, self.nxt[e]
                seen += 1
            if self.tail[q] != p:
                raise DagError(f"tail mismatch on wire {q}")
        expect = sum(ARITY[k] for k in self.kind if k != DEAD)
        if seen != expect:
            raise DagError(f"half-edge count {seen} != {expect}")
        self.topological_order()


def to_dag(circuit: Circuit) -> Dag:
    flat = expand_blocks(circuit)
    d = Dag(flat.num_qubits)
    for g in flat.gates:
        if g.kind == GateKind.RZ and g.angle.is_zero():
            continue
        d.append(g)
    return d


def to_netlist(dag: Dag, qubit_names: list[str] | None = None) -> Circuit:
    return Circuit(dag.num_qubits, [dag.gate(i) for i in dag.topological_order()], qubit_names=qubit_names)


def neighbors(dag: Dag, node: int, qubit: int, direction: str = "next") -> int:
    if dag.kind[node] == DEAD:
        raise DagError(f"node {node} is deleted")
    return dag.neighbor(node, qubit, forward=(direction == "next"))
