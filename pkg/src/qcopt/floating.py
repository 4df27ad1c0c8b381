"""Floating-rotation optimization over {NOT, CNOT, Rz} regions (routine 5).

Each region is stripped of its rotations into a *skeleton* of NOT/CNOT ops
plus a table of phase terms keyed by the linear part of the wire value.  A
term may be re-emitted at any skeleton slot carrying its function, so the
skeleton can be rewritten freely as long as every nonzero term keeps at least
one slot.  Exception CNOTs (target outside the region) appear as pinned
``EXT`` reads on their control wire.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
import heapq

from .circuit import Angle, GateKind
from .dag import CNOT, NOT, RZ, Dag
from .phasepoly import AffineFn, Region, build_phase_polynomial, find_region, linearize
from .rules import RewriteRule, RuleKind

X_OP, CX_OP, EXT_OP = "X", "CX", "EXT"


def _unit(q: int) -> int:
    return 1 << (q + 1)


@dataclass
class PlacementSet:
    fn: AffineFn
    angle: Angle
    candidates: list[tuple[int, int, int]]  # (rank, qubit, op after which it sits; -1 = region start)


@dataclass
class Skeleton:
    """Per-wire linked lists of skeleton ops with cached wire values.

    ``val[(op, q)]`` is the packed affine value on wire q right after op.
    """

    qubits_of: dict[int, tuple[int, ...]]
    kind: dict[int, str]
    node: dict[int, int]
    prio: dict[int, float]
    nxt: dict[tuple[int, int], int]
    prv: dict[tuple[int, int], int]
    head: dict[int, int]
    tail: dict[int, int]
    val: dict[tuple[int, int], int]
    count: Counter
    need: dict[int, Angle]
    next_id: int
    wires: tuple[int, ...] = ()
    changed: bool = False

    # -- plumbing ------------------------------------------------------
    def copy(self) -> "Skeleton":
        return Skeleton(dict(self.qubits_of), dict(self.kind), dict(self.node), dict(self.prio),
                        dict(self.nxt), dict(self.prv), dict(self.head), dict(self.tail),
                        dict(self.val), Counter(self.count), self.need, self.next_id, self.wires, self.changed)

    def before(self, op: int, q: int) -> int:
        p = self.prv[(op, q)]
        return self.val[(p, q)] if p >= 0 else _unit(q)

    def after_op(self, op: int, q: int) -> int:
        return self.nxt[(op, q)]

    def first(self, q: int) -> int:
        return self.head.get(q, -1)

    def num_cnots(self) -> int:
        return sum(1 for k in self.kind.values() if k == CX_OP)

    def wire_ops(self, q: int) -> list[int]:
        out, op = [], self.head.get(q, -1)
        while op >= 0:
            out.append(op)
            op = self.nxt[(op, q)]
        return out

    def _unlink(self, op: int) -> None:
        for q in self.qubits_of[op]:
            p, n = self.prv.pop((op, q)), self.nxt.pop((op, q))
            if p >= 0:
                self.nxt[(p, q)] = n
            else:
                self.head[q] = n
            if n >= 0:
                self.prv[(n, q)] = p
            else:
                self.tail[q] = p
            v = self.val.pop((op, q))
            self.count[v >> 1] -= 1
        del self.qubits_of[op], self.kind[op]
        self.node.pop(op, None)
        self.prio.pop(op, None)

    def _link(self, op: int, q: int, after: int) -> None:
        n = self.nxt[(after, q)] if after >= 0 else self.head.get(q, -1)
        self.prv[(op, q)] = after
        self.nxt[(op, q)] = n
        if after >= 0:
            self.nxt[(after, q)] = op
        else:
            self.head[q] = op
        if n >= 0:
            self.prv[(n, q)] = op
        else:
            self.tail[q] = op

    def _set_val(self, op: int, q: int, v: int) -> None:
        old = self.val.get((op, q))
        if old is not None:
            self.count[old >> 1] -= 1
        self.val[(op, q)] = v
        self.count[v >> 1] += 1

    def feasible(self) -> bool:
        return all(self.count[lin] > 0 for lin in self.need)

    def order(self) -> list[int]:
        indeg = {op: 0 for op in self.kind}
        for op, qs in self.qubits_of.items():
            indeg[op] = sum(1 for q in qs if self.prv[(op, q)] >= 0)
        heap = [(self.prio[op], op) for op, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, op = heapq.heappop(heap)
            out.append(op)
            for q in self.qubits_of[op]:
                n = self.nxt[(op, q)]
                if n >= 0:
                    indeg[n] -= 1
                    if indeg[n] == 0:
                        heapq.heappush(heap, (self.prio[n], n))
        if len(out) != len(indeg):
            raise RuntimeError("skeleton is not acyclic")
        return out


def build_skeleton(region: Region) -> tuple[Skeleton, dict[int, object]]:
    """Skeleton plus the phase polynomial's terms (keyed by linear part)."""
    dag = region.dag
    kind, qs = dag.kind, dag.qs
    sk = Skeleton({}, {}, {}, {}, {}, {}, {}, {}, {}, Counter(), {}, len(dag.kind), tuple(region.qubits))
    for q in region.qubits:
        sk.count[_unit(q) >> 1] += 1
        prev = -1
        for e in region.chain(q):
            g = e // 3
            k = kind[g]
            if k == RZ:
                continue
            if g not in sk.kind:
                if k == NOT:
                    sk.kind[g], sk.qubits_of[g] = X_OP, (q,)
                elif g in region.exceptions:
                    sk.kind[g], sk.qubits_of[g] = EXT_OP, (q,)
                else:
                    sk.kind[g], sk.qubits_of[g] = CX_OP, (qs[3 * g], qs[3 * g + 1])
                sk.node[g] = g
                sk.prio[g] = dag.pos[g]
            sk.prv[(g, q)] = prev
            if prev >= 0:
                sk.nxt[(prev, q)] = g
            else:
                sk.head[q] = g
            prev = g
        if prev >= 0:
            sk.nxt[(prev, q)] = -1
        sk.tail[q] = prev
    for op in sk.order():
        _simulate(sk, op)
    poly = build_phase_polynomial(region, linearize(region))
    sk.need = {lin: t.angle for lin, t in poly.terms.items() if not t.angle.is_zero()}
    return sk, poly.terms


def _simulate(sk: Skeleton, op: int) -> None:
    k = sk.kind[op]
    if k == CX_OP:
        c, t = sk.qubits_of[op]
        vc = sk.before(op, c)
        sk._set_val(op, c, vc)
        sk._set_val(op, t, sk.before(op, t) ^ vc)
    else:
        (q,) = sk.qubits_of[op]
        v = sk.before(op, q)
        sk._set_val(op, q, v ^ 1 if k == X_OP else v)


def enumerate_placements(sk: Skeleton) -> dict[int, list[tuple[int, int, int]]]:
    """Every slot of the skeleton grouped by linear function, leftmost first."""
    rank = {op: r for r, op in enumerate(sk.order())}
    out: dict[int, list[tuple[int, int, int]]] = {}
    for q in sk.wires:
        out.setdefault(_unit(q) >> 1, []).append((-1, q, -1))
    for (op, q), v in sk.val.items():
        out.setdefault(v >> 1, []).append((rank[op], q, op))
    for lst in out.values():
        lst.sort()
    return out


# -- floating two-qubit cancellation ----------------------------------------

def _try_cancel(sk: Skeleton, g: int, h: int, window: int) -> bool:
    """Remove CX g and its partner h, provided every needed term keeps a slot."""
    c, t = sk.qubits_of[g]
    vc = sk.before(g, c)
    between = []
    op = sk.nxt[(g, t)]
    while op != h:
        between.append(op)
        op = sk.nxt[(op, t)]
    for op in between:
        sk._set_val(op, t, sk.val[(op, t)] ^ vc)
    dropped = [sk.val[(g, c)], sk.val[(g, t)], sk.val[(h, c)], sk.val[(h, t)]]
    for v in dropped:
        sk.count[v >> 1] -= 1
    if not sk.feasible():
        for v in dropped:
            sk.count[v >> 1] += 1
        for op in between:
            sk._set_val(op, t, sk.val[(op, t)] ^ vc)
        return False
    for v in dropped:
        sk.count[v >> 1] += 1
    sk._unlink(g)
    sk._unlink(h)
    sk.changed = True
    return True


def _partner(sk: Skeleton, g: int, window: int) -> int:
    c, t = sk.qubits_of[g]
    ec, et = sk.nxt[(g, c)], sk.nxt[(g, t)]
    steps = 0
    while ec >= 0 and et >= 0:
        if 0 <= window <= steps:
            return -1
        if ec == et:
            return ec if sk.kind[ec] == CX_OP and sk.qubits_of[ec] == (c, t) else -1
        steps += 1
        kc = sk.kind[ec]
        if kc == EXT_OP or (kc == CX_OP and sk.qubits_of[ec][0] == c and sk.qubits_of[ec][1] != t):
            ec = sk.nxt[(ec, c)]
            continue
        kt = sk.kind[et]
        if kt == X_OP or (kt == CX_OP and sk.qubits_of[et][1] == t and sk.qubits_of[et][0] != c):
            et = sk.nxt[(et, t)]
            continue
        return -1
    return -1


def cancel_two_qubit_floating(sk: Skeleton, window: int = -1) -> int:
    """Cancel CNOT pairs, letting floating rotations step out of the way."""
    removed = 0
    for g0 in sk.order():
        stack = [g0]
        while stack:
            g = stack.pop()
            if sk.kind.get(g) != CX_OP:
                continue
            h = _partner(sk, g, window)
            if h < 0:
                continue
            preds = [sk.prv[(g, q)] for q in sk.qubits_of[g]]
            if _try_cancel(sk, g, h, window):
                removed += 2
                stack += [p for p in preds if p >= 0 and sk.kind.get(p) == CX_OP]
    return removed


# -- rewrite rules ----------------------------------------------------------

@dataclass
class _CompiledRule:
    rule: RewriteRule
    # per pattern gate: op kind and pattern-wire operands
    gates: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    repl: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)


def _op_of(g) -> tuple[str, tuple[int, ...]]:
    return (X_OP if g.kind == GateKind.NOT else CX_OP, tuple(g.qubits))


def _convex(gates: list[tuple[str, tuple[int, ...]]]) -> bool:
    """Within the pattern, the first gate on any wire reaches the last gate on every wire."""
    n = len(gates)
    reach = [set([i]) for i in range(n)]
    last_on: dict[int, int] = {}
    for i, (_, ws) in enumerate(gates):
        for w in ws:
            if w in last_on:
                for j in range(n):
                    if last_on[w] in reach[j]:
                        reach[j].add(i)
            last_on[w] = i
    first_on: dict[int, int] = {}
    for i, (_, ws) in enumerate(gates):
        for w in ws:
            first_on.setdefault(w, i)
    return all(last_on[u] in reach[first_on[w]] for u in last_on for w in first_on)


def compile_rules(rules: list[RewriteRule]) -> list[_CompiledRule]:
    """Rules usable on a skeleton: NOT/CNOT only, connected and convex patterns."""
    out = []
    for r in rules:
        if not r.skeleton_only:
            continue
        gates = [_op_of(g) for g in r.pattern]
        seen: set[int] = set()
        connected = True
        for i, (_, ws) in enumerate(gates):
            if i and not seen & set(ws):
                connected = False
            seen |= set(ws)
        if not connected or not _convex(gates):
            continue
        out.append(_CompiledRule(r, gates, [_op_of(g) for g in r.replacement]))
    return out


def _match(sk: Skeleton, cr: _CompiledRule, anchor: int) -> tuple[dict[int, int], list[int]] | None:
    wmap: dict[int, int] = {}
    last: dict[int, int] = {}
    window: list[int] = []
    for i, (k, ws) in enumerate(cr.gates):
        if i == 0:
            op = anchor
        else:
            w = next(w for w in ws if w in last)
            op = sk.nxt[(last[w], wmap[w])]
            if op < 0:
                return None
        if sk.kind.get(op) != k or op in window:
            return None
        oq = sk.qubits_of[op]
        for w, q in zip(ws, oq):
            if w in wmap:
                if wmap[w] != q:
                    return None
                if sk.nxt[(last[w], q)] != op:
                    return None
            else:
                if q in wmap.values():
                    return None
                wmap[w] = q
            last[w] = op
        window.append(op)
    return wmap, window


def _apply(sk: Skeleton, cr: _CompiledRule, wmap: dict[int, int], window: list[int]) -> bool:
    """Replace a matched window; rolls back and returns False when infeasible."""
    snap = sk.copy()
    entry = {}
    for w, q in wmap.items():
        op = next(o for o in window if q in sk.qubits_of[o])
        entry[q] = sk.prv[(op, q)]
    prio = min(sk.prio[o] for o in window)
    span = max(sk.prio[o] for o in window) - prio
    for op in window:
        sk._unlink(op)
    cursor = dict(entry)
    new = []
    for j, (k, ws) in enumerate(cr.repl):
        op = sk.next_id
        sk.next_id += 1
        qs = tuple(wmap[w] for w in ws)
        sk.kind[op], sk.qubits_of[op] = k, qs
        sk.prio[op] = prio + span * (j + 1) / (len(cr.repl) + 1)
        for q in qs:
            sk._link(op, q, cursor[q])
            cursor[q] = op
        _simulate(sk, op)
        new.append(op)
    if not sk.feasible():
        sk.__dict__.update(snap.__dict__)
        return False
    sk.changed = True
    return True


def apply_reducing_rules(sk: Skeleton, rules: list[_CompiledRule]) -> int:
    """One pass applying every feasible match; returns the gate-count drop."""
    removed = 0
    reducing = [cr for cr in rules if cr.rule.kind is RuleKind.REDUCING]
    if not reducing:
        return 0
    work = sk.order()[::-1]
    while work:
        op = work.pop()
        if op not in sk.kind:
            continue
        for cr in reducing:
            m = _match(sk, cr, op)
            if m is None:
                continue
            wmap, window = m
            preds = {sk.prv[(o, q)] for o in window for q in sk.qubits_of[o]} - set(window)
            before = sk.next_id
            if _apply(sk, cr, wmap, window):
                removed += cr.rule.savings
                work += list(range(sk.next_id - 1, before - 1, -1))
                work += [p for p in preds if p >= 0]
                break
    return removed


def apply_preserving_rules(sk: Skeleton, rules: list[_CompiledRule], window: int = -1) -> tuple[Skeleton, int]:
    """Trial each preserving rewrite; keep it only if it unlocks CNOT cancellations."""
    preserving = [cr for cr in rules if cr.rule.kind is RuleKind.PRESERVING]
    enabled = 0
    if not preserving:
        return sk, 0
    done: set[int] = set()
    for op in sk.order():
        if op not in sk.kind or op in done:
            continue
        for cr in preserving:
            m = _match(sk, cr, op)
            if m is None:
                continue
            trial = sk.copy()
            wmap, window_ops = m
            if not _apply(trial, cr, wmap, window_ops):
                continue
            gained = cancel_two_qubit_floating(trial, window)
            if gained > 0:
                sk = trial
                enabled += gained
                done.update(window_ops)
                break
    return sk, enabled


# -- driver -----------------------------------------------------------------

@dataclass
class Routine5Stats:
    regions: int = 0
    cnot_cancelled: int = 0
    preserving_enabled: int = 0
    reducing_removed: int = 0
    rz_merged: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


def materialize(sk: Skeleton) -> dict[tuple[int, int], tuple[Angle, int]]:
    """Leftmost slot for every needed term: {(op, qubit): (angle, lin)}."""
    places = enumerate_placements(sk)
    out = {}
    for lin in sorted(sk.need):
        cands = places.get(lin)
        if not cands:
            raise RuntimeError("floating term lost all of its locations")
        _rank, q, op = cands[0]
        const = (sk.val[(op, q)] if op >= 0 else _unit(q)) & 1
        a = sk.need[lin]
        out[(op, q)] = (-a if const else a, lin)
    return out


def _write_back(region: Region, sk: Skeleton, placed) -> list[int]:
    dag = region.dag
    wires = region.qubits
    bounds = {q: (region.start_after(q), region.end_before(q)) for q in wires}
    members = sorted(region.members)
    lo = min(dag.pos[g] for g in members)
    hi = max(dag.pos[g] for g in members)
    for g in members:
        dag.remove(g)
    rank = {op: r for r, op in enumerate(sk.order())}
    total = len(rank) + 2
    new_nodes: dict[int, int] = {}

    def pos_of(r: float) -> float:
        return lo + (hi - lo) * (r + 1) / (total + 1)

    for op in rank:
        k = sk.kind[op]
        if k == EXT_OP:
            continue
        qs = sk.qubits_of[op]
        kk = NOT if k == X_OP else CNOT
        new_nodes[op] = dag._new_node(kk, qs, None, 0, pos_of(rank[op]))
    rz_nodes: dict[tuple[int, int], int] = {}
    for (op, q), (a, _lin) in placed.items():
        r = rank[op] + 0.5 if op >= 0 else -0.5
        rz_nodes[(op, q)] = dag._new_node(RZ, (q,), a, 0, pos_of(r))
    for q in wires:
        seq = []
        if (-1, q) in rz_nodes:
            seq.append(3 * rz_nodes[(-1, q)])
        op = sk.head.get(q, -1)
        while op >= 0:
            if sk.kind[op] == EXT_OP:
                seq.append(3 * sk.node[op])
            else:
                n = new_nodes[op]
                seq.append(3 * n + sk.qubits_of[op].index(q))
            if (op, q) in rz_nodes:
                seq.append(3 * rz_nodes[(op, q)])
            op = sk.nxt[(op, q)]
        left, right = bounds[q]
        prev = left
        for e in seq:
            dag.prv[e] = prev
            if prev >= 0:
                dag.nxt[prev] = e
            else:
                dag.head[q] = e
            prev = e
        if prev >= 0:
            dag.nxt[prev] = right
        else:
            dag.head[q] = right
        if right >= 0:
            dag.prv[right] = prev
        else:
            dag.tail[q] = prev
    dag.pos_dirty = True
    return list(new_nodes.values()) + list(rz_nodes.values())


def optimize_region(region: Region, rules: list[_CompiledRule], window: int = -1) -> tuple[Routine5Stats, list[int]]:
    stats = Routine5Stats(regions=1)
    sk, terms = build_skeleton(region)
    n_rz = sum(len(t.nodes) for t in terms.values())
    stats.cnot_cancelled = cancel_two_qubit_floating(sk, window)
    sk, stats.preserving_enabled = apply_preserving_rules(sk, rules, window)
    stats.reducing_removed = apply_reducing_rules(sk, rules)
    if stats.reducing_removed:
        stats.cnot_cancelled += cancel_two_qubit_floating(sk, window)
    merged = n_rz - len(sk.need)
    if not sk.changed and merged == 0:
        return Routine5Stats(regions=1), []
    stats.rz_merged = merged
    placed = materialize(sk)
    return stats, _write_back(region, sk, placed)


def routine5(dag: Dag, rules: list[RewriteRule], max_region_gates: int | None = None,
             window: int = -1) -> tuple[Dag, Routine5Stats]:
    """Floating-Rz pass over every region, seeded as in routine 4."""
    compiled = compile_rules(rules)
    claimed = bytearray(len(dag.kind))
    total = Routine5Stats()
    for seed in dag.topological_order():
        if seed >= len(claimed) or claimed[seed] or dag.kind[seed] != CNOT:
            continue
        region = find_region(dag, seed, None, max_region_gates)
        for g in region.members:
            claimed[g] = 1
        st, new = optimize_region(region, compiled, window)
        for f in total.__dataclass_fields__:
            setattr(total, f, getattr(total, f) + getattr(st, f))
        if new:
            claimed.extend(b"\x01" * (len(dag.kind) - len(claimed)))
    if dag.pos_dirty:
        dag.renumber()
    return dag, total
