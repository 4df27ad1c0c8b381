"""Optimization schedules and the special-purpose front/back ends.

Flow of :func:`optimize`: flatten blocks, push NOTs through Toffolis,
expand Toffolis into gates with symbolic T polarities, run the routine
sequence to a fixpoint, fix polarities greedily, and clean up.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

from .circuit import (
    Angle, Block, BlockCall, Circuit, Gate, GateCounts, GateKind, RzClass, classify_rz, counts,
    expand_blocks, interaction_set, same_gates,
)
from .circuit import CNOT as cx, H as h_, NOT as x_, RZ as rz
from .dag import DEAD, Dag, to_dag, to_netlist
from .floating import routine5
from .phasepoly import merge_rotations
from .rewriting import cancel_single_qubit, cancel_two_qubit, reduce_hadamards
from .rules import RewriteRule, load_rule_file, load_seed_rules

log = logging.getLogger(__name__)

SEQUENCES = {
    "light": (1, 3, 2, 3, 1, 2, 4, 3, 2),
    "light-qfa": (1, 3, 2, 3, 1, 2),
    "heavy": (1, 3, 2, 3, 1, 2, 5),
}
ROUTINE_NAMES = {
    1: "hadamard",
    2: "single_qubit",
    3: "two_qubit",
    4: "rotation_merge",
    5: "floating",
}


class InvariantError(RuntimeError):
    """An optimizer guarantee was violated (indicates a bug)."""


@dataclass
class Config:
    mode: str = "light"
    max_commute_window: int = -1
    max_region_gates: int | None = None
    heavy_timeout_factor: float = 200.0
    heavy_timeout_floor: float = 1.0
    rules_path: str | None = None
    backend: str | None = None
    sequence: tuple[int, ...] | None = None
    rules: list[RewriteRule] | None = None

    def __post_init__(self):
        if self.mode not in SEQUENCES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {sorted(SEQUENCES)}")

    def routine_sequence(self) -> tuple[int, ...]:
        return self.sequence or SEQUENCES[self.mode]

    def rule_library(self) -> list[RewriteRule]:
        if self.rules is None:
            self.rules = load_rule_file(self.rules_path) if self.rules_path else load_seed_rules()
        return self.rules


@dataclass
class OptimizationReport:
    mode: str
    pre: GateCounts
    decomposed: GateCounts
    post: GateCounts = field(default_factory=GateCounts)
    tallies: dict[str, int] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    timeout: bool = False
    light_seconds: float | None = None

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pre": self.pre.as_dict(),
            "decomposed": self.decomposed.as_dict(),
            "post": self.post.as_dict(),
            "tallies": dict(self.tallies),
            "timings": dict(self.timings),
            "iterations": self.iterations,
            "timeout": self.timeout,
            "light_seconds": self.light_seconds,
        }


# -- preprocessing ----------------------------------------------------------

_CLASSICAL = (GateKind.NOT, GateKind.CNOT, GateKind.TOFFOLI)


def preprocess(circuit: Circuit) -> Circuit:
    """Push NOTs right through Toffoli controls and Toffoli/CNOT targets.

    A NOT only moves if it meets another NOT on its wire; otherwise it stays
    where it was and any control negations it caused are undone.
    """
    flat = expand_blocks(circuit)
    if any(g.kind not in _CLASSICAL for g in flat.gates):
        return flat
    gates: list[Gate | None] = list(flat.gates)
    neg = [list(g.negated or (False, False)) if g.kind == GateKind.TOFFOLI else None for g in gates]
    pending: dict[int, tuple[int, list[tuple[int, int]]]] = {}  # wire -> (index of NOT, flips)
    changed = False

    def revert(q: int) -> None:
        _i, flips = pending.pop(q)
        for j, s in flips:
            neg[j][s] = not neg[j][s]

    for i, g in enumerate(gates):
        if g.kind == GateKind.NOT:
            q = g.qubits[0]
            if q in pending:
                j, _flips = pending.pop(q)
                gates[j] = gates[i] = None
                changed = True
            else:
                pending[q] = (i, [])
        elif g.kind == GateKind.CNOT:
            c = g.qubits[0]
            if c in pending:
                revert(c)
        else:
            a, b, _t = g.qubits
            for s, q in ((0, a), (1, b)):
                if q in pending:
                    neg[i][s] = not neg[i][s]
                    pending[q][1].append((i, s))
    for q in list(pending):
        revert(q)
    if not changed:
        return flat
    out = []
    for g, n in zip(gates, neg):
        if g is None:
            continue
        if g.kind == GateKind.TOFFOLI:
            g = Gate(GateKind.TOFFOLI, g.qubits, negated=tuple(n) if any(n) else ())
        out.append(g)
    return Circuit(flat.num_qubits, out, qubit_names=flat.qubit_names)


# -- Toffoli decomposition and polarity -------------------------------------

class PolarityState(enum.Enum):
    FREE = "free"
    PLUS = "+1"
    MINUS = "-1"


@dataclass
class PolarityVar:
    id: int
    state: PolarityState = PolarityState.FREE

    @property
    def sign(self) -> int | None:
        return {PolarityState.PLUS: 1, PolarityState.MINUS: -1}.get(self.state)


def _sym_t(q: int, var: int, c: int) -> Gate:
    return rz(q, Angle.make(0.0, ((var, c),)))


def toffoli_expansion(a: int, b: int, c: int, var: int) -> list[Gate]:
    """The 15-gate network; T and T-dagger carry coefficients +1/-1 on `var`."""
    T = lambda q: _sym_t(q, var, 1)  # noqa: E731
    Td = lambda q: _sym_t(q, var, -1)  # noqa: E731
    return [h_(c), cx(b, c), Td(c), cx(a, c), T(c), cx(b, c), Td(c), cx(a, c),
            T(b), T(c), h_(c), cx(a, b), T(a), Td(b), cx(a, b)]


def decompose_toffoli(circuit: Circuit, first_var: int = 0) -> tuple[Circuit, list[PolarityVar]]:
    flat = expand_blocks(circuit)
    out: list[Gate] = []
    pvars: list[PolarityVar] = []
    for g in flat.gates:
        if g.kind != GateKind.TOFFOLI:
            out.append(g)
            continue
        a, b, c = g.qubits
        v = PolarityVar(first_var + len(pvars))
        pvars.append(v)
        negs = [q for q, n in zip((a, b), g.negated or (False, False)) if n]
        out += [x_(q) for q in negs]
        out += toffoli_expansion(a, b, c, v.id)
        out += [x_(q) for q in negs]
    return Circuit(flat.num_qubits, out, qubit_names=flat.qubit_names), pvars


def _rz_key(a: Angle) -> tuple[int, int]:
    if a.is_zero():
        return (0, 0)
    return (1 if classify_rz(a) is RzClass.T_LIKE else 0, 1)


def resolve_polarities(circuit: Circuit, pvars: list[PolarityVar] | None = None) -> Circuit:
    """Fix symbolic signs greedily in order of first appearance.

    For each variable both signs are scored on the rotations that become
    concrete by (T-like count, nonzero rotation count); ties pick +1.
    """
    by_var: dict[int, list[int]] = {}
    order: list[int] = []
    gates = list(circuit.gates)
    for i, g in enumerate(gates):
        if g.kind == GateKind.RZ:
            for v, _c in g.angle.terms:
                if v not in by_var:
                    by_var[v] = []
                    order.append(v)
                by_var[v].append(i)
    assign: dict[int, int] = {}
    for v in order:
        scores = []
        for s in (1, -1):
            trial = dict(assign)
            trial[v] = s
            score = [0, 0]
            for i in by_var[v]:
                a = gates[i].angle.substitute(trial)
                if a.is_concrete:
                    k = _rz_key(a)
                    score[0] += k[0]
                    score[1] += k[1]
            scores.append((tuple(score), s))
        assign[v] = min(scores, key=lambda x: (x[0], -x[1]))[1]
    out = []
    for g in gates:
        if g.kind == GateKind.RZ and g.angle.terms:
            a = g.angle.substitute(assign)
            if not a.is_concrete:
                raise InvariantError("unassigned polarity variable")
            g = Gate(GateKind.RZ, g.qubits, a)
        if g.kind == GateKind.RZ and g.angle.is_zero():
            continue
        out.append(g)
    if pvars:
        for p in pvars:
            if p.id in assign:
                p.state = PolarityState.PLUS if assign[p.id] > 0 else PolarityState.MINUS
    return Circuit(circuit.num_qubits, out, qubit_names=circuit.qubit_names)


# -- schedules ----------------------------------------------------------------

def _alive(dag: Dag) -> int:
    return sum(1 for k in dag.kind if k != DEAD)


def run_routine(dag: Dag, r: int, cfg: Config) -> int:
    """Apply one routine; returns the gate-count reduction it produced."""
    w = cfg.max_commute_window
    if r == 1:
        before = _alive(dag)
        reduce_hadamards(dag)
        return before - _alive(dag)
    if r == 2:
        return cancel_single_qubit(dag, w, cfg.backend)[1]
    if r == 3:
        return cancel_two_qubit(dag, w, cfg.backend)[1]
    if r == 4:
        before = _alive(dag)
        merge_rotations(dag, cfg.max_region_gates)
        return before - _alive(dag)
    if r == 5:
        before = _alive(dag)
        routine5(dag, cfg.rule_library(), cfg.max_region_gates, w)
        return before - _alive(dag)
    raise ValueError(f"unknown routine {r}")


def run_schedule(dag: Dag, seq: tuple[int, ...], cfg: Config, report: OptimizationReport,
                 deadline: float | None = None) -> Dag:
    """Repeat `seq` while the total gate count strictly decreases."""
    while True:
        start = _alive(dag)
        for r in seq:
            if deadline is not None and time.perf_counter() > deadline:
                report.timeout = True
                break
            t0 = time.perf_counter()
            red = run_routine(dag, r, cfg)
            name = ROUTINE_NAMES[r]
            report.tallies[name] = report.tallies.get(name, 0) + red
            report.timings[name] = report.timings.get(name, 0.0) + time.perf_counter() - t0
        report.iterations += 1
        if report.timeout or _alive(dag) >= start:
            return dag


def cleanup(dag: Dag, cfg: Config) -> Dag:
    """Routines 3 and 2 until neither removes anything."""
    while True:
        a = cancel_two_qubit(dag, cfg.max_commute_window, cfg.backend)[1]
        b = cancel_single_qubit(dag, cfg.max_commute_window, cfg.backend)[1]
        if a + b == 0:
            return dag


def _prepare(circuit: Circuit) -> tuple[Circuit, list[PolarityVar], GateCounts, GateCounts]:
    flat = expand_blocks(circuit)
    pre = counts(flat)
    prepped = preprocess(flat)
    dec, pvars = decompose_toffoli(prepped)
    plus = resolve_polarities(dec) if pvars else dec
    return dec, pvars, pre, counts(plus)


def _optimize_prepared(dec: Circuit, pvars, cfg: Config, report: OptimizationReport,
                       deadline: float | None) -> Circuit:
    dag = to_dag(dec)
    run_schedule(dag, cfg.routine_sequence(), cfg, report, deadline)
    out = to_netlist(dag, dec.qubit_names)
    if pvars:
        t0 = time.perf_counter()
        out = resolve_polarities(out, pvars)
        dag = to_dag(out)
        cleanup(dag, cfg)
        out = to_netlist(dag, dec.qubit_names)
        report.timings["polarity"] = time.perf_counter() - t0
    return out


def _check(inp: Circuit, out: Circuit, report: OptimizationReport) -> None:
    if report.post.cnot > report.decomposed.cnot:
        raise InvariantError(f"CNOT count grew {report.decomposed.cnot} -> {report.post.cnot}")
    if not interaction_set(out) <= interaction_set(inp):
        raise InvariantError("output couples a qubit pair the input does not")


def optimize_light(circuit: Circuit, config: Config | None = None) -> tuple[Circuit, OptimizationReport]:
    cfg = config or Config()
    if cfg.mode == "heavy":
        cfg = Config(**{**cfg.__dict__, "mode": "light"})
    t0 = time.perf_counter()
    dec, pvars, pre, dcounts = _prepare(circuit)
    report = OptimizationReport(cfg.mode, pre, dcounts)
    out = _optimize_prepared(dec, pvars, cfg, report, None)
    report.post = counts(out)
    report.timings["total"] = time.perf_counter() - t0
    _check(dec, out, report)
    return out, report


def optimize_heavy(circuit: Circuit, config: Config | None = None) -> tuple[Circuit, OptimizationReport]:
    """Heavy schedule with a budget of factor x (measured Light time), floored."""
    cfg = config or Config(mode="heavy")
    if cfg.mode != "heavy":
        cfg = Config(**{**cfg.__dict__, "mode": "heavy"})
    t0 = time.perf_counter()
    _light_out, light_rep = optimize_light(circuit, Config(**{**cfg.__dict__, "mode": "light"}))
    light_s = light_rep.timings["total"]
    budget = max(cfg.heavy_timeout_factor * light_s, cfg.heavy_timeout_floor)
    dec, pvars, pre, dcounts = _prepare(circuit)
    report = OptimizationReport("heavy", pre, dcounts, light_seconds=light_s)
    out = _optimize_prepared(dec, pvars, cfg, report, time.perf_counter() + budget)
    report.post = counts(out)
    report.timings["total"] = time.perf_counter() - t0
    if report.timeout:
        log.warning("heavy optimizer stopped after %.3fs budget", budget)
    _check(dec, out, report)
    return out, report


def optimize(circuit: Circuit, config: Config | None = None) -> tuple[Circuit, OptimizationReport]:
    cfg = config or Config()
    if cfg.mode == "heavy":
        return optimize_heavy(circuit, cfg)
    return optimize_light(circuit, cfg)


# -- LCR ----------------------------------------------------------------------

class LcrFailure(RuntimeError):
    pass


@dataclass
class LcrResult:
    L: list[Gate]
    C: list[Gate]
    R: list[Gate]
    O: list[Gate]
    t: int
    num_qubits: int

    def circuit(self) -> Circuit:
        """L, then the core repeated t-2 times as a block, then R."""
        n = self.num_qubits
        blk = Block("core", n, list(self.C))
        body: list = list(self.L)
        if self.t > 2 and self.C:
            body.append(BlockCall("core", tuple(range(n)), self.t - 2))
        body += self.R
        return Circuit(n, body, {"core": blk} if self.C else {})

    def counts(self) -> GateCounts:
        n = self.num_qubits
        return counts(Circuit(n, self.L)) + counts(Circuit(n, self.C)).scaled(self.t - 2) + counts(Circuit(n, self.R))


def _common_prefix(a: list[Gate], b: list[Gate]) -> int:
    k = 0
    for x, y in zip(a, b):
        if not x.same_as(y):
            break
        k += 1
    return k


def lcr_optimize(block: Circuit, t: int, config: Config | None = None) -> LcrResult:
    """Factor optimize(O^t) as L C^(t-2) R from optimizations of O, O^2, O^3."""
    if t < 3:
        raise ValueError("LCR needs t >= 3")
    cfg = config or Config()
    n = block.num_qubits

    def opt(gates: list[Gate]) -> list[Gate]:
        return list(optimize(Circuit(n, gates), cfg)[0].gates)

    O = opt(list(expand_blocks(block).gates))
    O2 = opt(O + O)
    if same_gates(O2, O + O):
        # nothing crosses the boundary: L = C = R = O
        return LcrResult(list(O), list(O), list(O), O, t, n)
    k = _common_prefix(O, O2)
    L, R = O2[:k], O2[k:]
    O3 = opt(O + O + O)
    if len(O3) < len(L) + len(R) or not same_gates(O3[:len(L)], L) \
            or not same_gates(O3[len(O3) - len(R):], R):
        raise LcrFailure("optimized O^3 does not start with L and end with R")
    C = O3[len(L):len(O3) - len(R)]
    O4 = opt(O + O + O + O)
    if not same_gates(O4, L + C + C + R):
        raise LcrFailure("optimized O^4 differs from L C C R; optimizations are not boundary-local")
    return LcrResult(L, C, R, O, t, n)
