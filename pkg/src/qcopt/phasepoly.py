"""Rotation merging over {NOT, CNOT, Rz} regions (routine 4).

Wire values inside a region are affine functions of the values entering the
region.  They are packed into Python ints: bit 0 is the constant, bit q+1 is
the parity bit of qubit q.  A rotation on ``f xor 1`` by θ equals one on
``f`` by -θ up to global phase, so terms are keyed on the linear part and the
constant is folded into the sign of the angle.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .circuit import Angle, Circuit, Gate, GateKind, CNOT as cx, NOT as x_
from .dag import CNOT, DEAD, NOT, RZ, Dag

_SCANNABLE = (NOT, CNOT, RZ)


@dataclass
class WireSpan:
    """Scanned half-edges of one wire, with the surviving border [lo, hi]."""

    seq: list[int]
    anchor: int
    lo: int
    hi: int
    index: dict[int, int] = field(default_factory=dict)

    def inside(self, e: int) -> bool:
        i = self.index.get(e)
        return i is not None and self.lo <= i <= self.hi

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    def span(self) -> list[int]:
        return self.seq[self.lo:self.hi + 1]


@dataclass
class Region:
    dag: Dag
    seed: int
    wires: dict[int, WireSpan]
    members: set[int]
    exceptions: set[int]

    def chain(self, q: int) -> list[int]:
        """Half-edges of members and exceptions on wire q, in wire order."""
        return self.wires[q].span()

    def start_after(self, q: int) -> int:
        """Half-edge that precedes the region on wire q (-1 at the wire start)."""
        return self.dag.prv[self.wires[q].span()[0]]

    def end_before(self, q: int) -> int:
        return self.dag.nxt[self.wires[q].span()[-1]]

    @property
    def qubits(self) -> list[int]:
        return sorted(q for q, w in self.wires.items() if not w.empty)


def find_region(dag: Dag, seed: int, claimed: bytearray | None = None,
                max_gates: int | None = None) -> Region:
    """Grow a region from a seed CNOT one wire at a time, then prune."""
    kind, qs, nxt, prv = dag.kind, dag.qs, dag.nxt, dag.prv
    if kind[seed] != CNOT:
        raise ValueError("region seed must be a CNOT")
    if claimed is None:
        claimed = bytearray(len(kind))
    budget = [max_gates if max_gates is not None else -1]

    def ok(e: int) -> bool:
        g = e // 3
        if kind[g] not in _SCANNABLE or (g < len(claimed) and claimed[g]):
            return False
        if budget[0] == 0:
            return False
        if budget[0] > 0:
            budget[0] -= 1
        return True

    wires: dict[int, WireSpan] = {}
    queue = deque([(qs[3 * seed], 3 * seed), (qs[3 * seed + 1], 3 * seed + 1)])
    queued = {qs[3 * seed], qs[3 * seed + 1]}

    def note(e: int) -> None:
        g = e // 3
        if kind[g] == CNOT:
            other = 3 * g + (1 - e % 3)
            q2 = qs[other]
            if q2 not in queued:
                queued.add(q2)
                queue.append((q2, other))

    while queue:
        q, e0 = queue.popleft()
        left = []
        e = prv[e0]
        while e >= 0 and ok(e):
            left.append(e)
            note(e)
            e = prv[e]
        right = []
        e = nxt[e0]
        while e >= 0 and ok(e):
            right.append(e)
            note(e)
            e = nxt[e]
        seq = left[::-1] + [e0] + right
        w = WireSpan(seq, len(left), 0, len(seq) - 1)
        w.index = {he: i for i, he in enumerate(seq)}
        wires[q] = w

    def inside(e: int) -> bool:
        w = wires.get(qs[e])
        return w is not None and w.inside(e)

    work = list({e // 3 for w in wires.values() for e in w.seq if kind[e // 3] == CNOT})
    while work:
        g = work.pop()
        if not inside(3 * g + 1) or inside(3 * g):
            continue
        # target inside, control outside: pull the target border in
        w = wires[qs[3 * g + 1]]
        i = w.index[3 * g + 1]
        if i > w.anchor:
            cut = w.seq[i:w.hi + 1]
            w.hi = i - 1
        elif i < w.anchor:
            cut = w.seq[w.lo:i + 1]
            w.lo = i + 1
        else:
            cut = w.seq[w.lo:w.hi + 1]
            w.lo, w.hi = 1, 0
        work.extend(e // 3 for e in cut if kind[e // 3] == CNOT)

    members: set[int] = set()
    exceptions: set[int] = set()
    for q, w in wires.items():
        for e in w.span():
            g = e // 3
            if kind[g] != CNOT:
                members.add(g)
            elif inside(3 * g + 1):
                members.add(g)
            else:
                exceptions.add(g)
    wires = {q: w for q, w in wires.items() if not w.empty}
    return Region(dag, seed, wires, members, exceptions)


def linearize(region: Region) -> list[int]:
    """Member gates in a topological order of the region (ties by pos, id)."""
    dag = region.dag
    kind, pos = dag.kind, dag.pos
    succ: dict[int, list[int]] = {}
    indeg = {g: 0 for g in region.members}
    for q in region.wires:
        prev = -1
        for e in region.chain(q):
            g = e // 3
            if g not in indeg:
                continue
            if prev >= 0:
                succ.setdefault(prev, []).append(g)
                indeg[g] += 1
            prev = g
    heap = [(pos[g], g) for g, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, g = heapq.heappop(heap)
        out.append(g)
        for h in succ.get(g, ()):
            indeg[h] -= 1
            if indeg[h] == 0:
                heapq.heappush(heap, (pos[h], h))
    if len(out) != len(indeg):
        raise RuntimeError("region is not acyclic")
    return out


@dataclass(frozen=True)
class AffineFn:
    parity: int
    constant: int = 0

    @staticmethod
    def from_packed(v: int) -> "AffineFn":
        return AffineFn(v >> 1, v & 1)

    def qubits(self) -> list[int]:
        return [q for q in range(self.parity.bit_length()) if self.parity >> q & 1]

    def sort_key(self) -> tuple[int, int]:
        return (self.parity, self.constant)

    def __str__(self) -> str:
        s = "⊕".join(f"x{q}" for q in self.qubits()) or "0"
        return s + ("⊕1" if self.constant else "")


@dataclass(frozen=True)
class Location:
    rank: int          # -1 for the region entry, else index in the linear order
    qubit: int
    after: int         # half-edge the location follows (-1 at a wire start)
    constant: int      # constant bit of the wire value there


@dataclass
class PhaseTerm:
    fn: AffineFn
    angle: Angle
    first_location: Location
    nodes: list[tuple[int, int, Location]] = field(default_factory=list)  # (rz node, sign, location)


@dataclass
class PhasePolynomial:
    terms: dict[int, PhaseTerm]
    output: dict[int, AffineFn]
    locations: dict[int, list[Location]]


def _unit(q: int) -> int:
    return 1 << (q + 1)


def build_phase_polynomial(region: Region, order: list[int] | None = None) -> PhasePolynomial:
    dag = region.dag
    kind, qs = dag.kind, dag.qs
    if order is None:
        order = linearize(region)
    val = {}
    cur: dict[int, Location] = {}
    locs: dict[int, list[Location]] = {}

    def visit(v: int, loc: Location) -> None:
        locs.setdefault(v >> 1, []).append(loc)

    for q in region.qubits:
        val[q] = _unit(q)
        cur[q] = Location(-1, q, region.start_after(q), 0)
        visit(val[q], cur[q])
    terms: dict[int, PhaseTerm] = {}
    for rank, g in enumerate(order):
        k = kind[g]
        if k == NOT:
            q = qs[3 * g]
            val[q] ^= 1
            cur[q] = Location(rank, q, 3 * g, val[q] & 1)
            visit(val[q], cur[q])
        elif k == CNOT:
            c, t = qs[3 * g], qs[3 * g + 1]
            val[t] ^= val[c]
            cur[t] = Location(rank, t, 3 * g + 1, val[t] & 1)
            visit(val[t], cur[t])
        elif k == RZ:
            q = qs[3 * g]
            v = val[q]
            lin, sign = v >> 1, v & 1
            a = dag.angle(g)
            contrib = -a if sign else a
            t = terms.get(lin)
            if t is None:
                t = terms[lin] = PhaseTerm(AffineFn(lin), contrib, locs[lin][0])
            else:
                t.angle = t.angle + contrib
            t.nodes.append((g, sign, cur[q]))
        else:
            raise RuntimeError(f"gate kind {k} inside a phase-polynomial region")
    out = {q: AffineFn.from_packed(v) for q, v in val.items()}
    return PhasePolynomial(terms, out, locs)


def _claim(claimed: bytearray, g: int) -> None:
    if g >= len(claimed):
        claimed.extend(bytes(g + 1 - len(claimed)))
    claimed[g] = 1


def merge_region(region: Region, poly: PhasePolynomial) -> int:
    """Re-emit one rotation per repeated term; returns the Rz count drop."""
    dag = region.dag
    dropped = 0
    for lin in sorted(poly.terms):
        t = poly.terms[lin]
        if len(t.nodes) < 2:
            continue
        loc = t.first_location
        keep = None
        for g, _sign, where in t.nodes:
            if where == loc and keep is None:
                keep = g
        for g, _sign, _where in t.nodes:
            if g != keep:
                dag.remove(g)
        total = -t.angle if loc.constant else t.angle
        if total.is_zero():
            if keep is not None:
                dag.remove(keep)
            dropped += len(t.nodes)
            continue
        if keep is not None:
            dag.set_angle(keep, total)
        else:
            dag.insert_single(RZ, loc.qubit, loc.after, total)
        dropped += len(t.nodes) - 1
    return dropped


def merge_rotations(dag: Dag, max_region_gates: int | None = None) -> tuple[Dag, int]:
    """Routine 4 driver.

    Regions are seeded left to right from CNOTs not yet inside an earlier
    region; the regions themselves may overlap.
    """
    claimed = bytearray(len(dag.kind))
    merged = 0
    for seed in dag.topological_order():
        if dag.kind[seed] != CNOT or claimed[seed]:
            continue
        region = find_region(dag, seed, None, max_region_gates)
        order = linearize(region)
        for g in region.members:
            claimed[g] = 1
        poly = build_phase_polynomial(region, order)
        n_before = len(dag.kind)
        merged += merge_region(region, poly)
        for g in range(n_before, len(dag.kind)):
            _claim(claimed, g)
    return dag, merged


def region_circuit(region: Region) -> Circuit:
    """The region's member gates as a netlist on the full qubit range."""
    return Circuit(region.dag.num_qubits, [region.dag.gate(g) for g in linearize(region)])


def propagate_nots(circuit: Circuit) -> Circuit:
    """Push NOTs to the right end of a {NOT, CNOT, Rz} netlist.

    Uses NOT(a)CNOT(a;b) = CNOT(a;b)NOT(a)NOT(b), NOT(b)CNOT(a;b) = CNOT(a;b)NOT(b)
    and NOT(a)Rz(θ)(a) = Rz(-θ)(a)NOT(a); equal NOT pairs cancel.
    """
    pending: set[int] = set()
    out: list[Gate] = []
    for g in circuit.gates:
        if g.kind == GateKind.NOT:
            pending ^= {g.qubits[0]}
        elif g.kind == GateKind.CNOT:
            c, t = g.qubits
            if c in pending:
                pending ^= {t}
            out.append(g)
        elif g.kind == GateKind.RZ:
            q = g.qubits[0]
            out.append(Gate(GateKind.RZ, g.qubits, -g.angle) if q in pending else g)
        else:
            raise ValueError("propagate_nots handles NOT, CNOT and Rz only")
    out += [x_(q) for q in sorted(pending)]
    return Circuit(circuit.num_qubits, out, qubit_names=circuit.qubit_names)
