"""Text formats: the `.qc` netlist dialect and a simplified Quipper ASCII dump.

`.qc` example::

    .v a b c
    BEGIN
    tof a b c
    H c
    Rz(0.25) c
    END

Blocks are declared with ``BEGIN name(w1 w2 ...)`` (or ``BEGIN name(k)``,
whose wires are then referenced as ``$0 .. $k-1``) and invoked from the main
block as ``name q1 q2`` or ``repeat k name q1 q2``.  A control written with a
trailing apostrophe (``tof a' b c``) is negated.
"""
from __future__ import annotations

import math
import re
from typing import Iterable

from .circuit import (
    Angle, Block, BlockCall, Circuit, Gate, GateKind, RzClass, classify_rz, normalize_angle,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


_FIXED = {
    "T": math.pi / 4,
    "T*": 7 * math.pi / 4,
    "P": math.pi / 2,
    "S": math.pi / 2,
    "P*": 3 * math.pi / 2,
    "S*": 3 * math.pi / 2,
    "Z": math.pi,
}
_RZ_RE = re.compile(r"^Rz\(([^()]*)\)$")
_BEGIN_RE = re.compile(r"^BEGIN(?:\s+([A-Za-z_][\w.]*)\s*\(([^()]*)\))?\s*$")


def _strip(line: str) -> str:
    i = line.find("#")
    return (line if i < 0 else line[:i]).strip()


def _parse_angle(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"malformed angle {tok!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite angle {tok!r}", lineno)
    return v


def parse_gate_tokens(toks: list[str], names: dict[str, int], lineno: int) -> Gate | None:
    """Parse one gate line of already-split tokens; None means 'not a gate mnemonic'."""
    op, args = toks[0], toks[1:]
    neg = []
    qubits = []
    for a in args:
        n = a.endswith("'")
        base = a[:-1] if n else a
        if base not in names:
            raise ParseError(f"undeclared variable {base!r}", lineno)
        qubits.append(names[base])
        neg.append(n)
    if len(set(qubits)) != len(qubits):
        raise ParseError(f"repeated operand in {' '.join(toks)!r}", lineno)
    if any(neg) and (op != "tof" or len(args) != 3 or neg[2]):
        raise ParseError("negated operands are only allowed on Toffoli controls", lineno)

    def one() -> int:
        if len(qubits) != 1:
            raise ParseError(f"{op} takes exactly one operand", lineno)
        return qubits[0]

    if op == "tof":
        if len(qubits) == 1:
            return Gate(GateKind.NOT, (qubits[0],))
        if len(qubits) == 2:
            return Gate(GateKind.CNOT, tuple(qubits))
        if len(qubits) == 3:
            return Gate(GateKind.TOFFOLI, tuple(qubits), negated=(neg[0], neg[1]) if any(neg) else ())
        raise ParseError(f"tof takes 1 to 3 operands, got {len(qubits)}", lineno)
    if op == "X":
        return Gate(GateKind.NOT, (one(),))
    if op == "H":
        return Gate(GateKind.H, (one(),))
    if op in _FIXED:
        return Gate(GateKind.RZ, (one(),), normalize_angle(_FIXED[op]))
    m = _RZ_RE.match(op)
    if m:
        return Gate(GateKind.RZ, (one(),), normalize_angle(_parse_angle(m.group(1), lineno)))
    if op.startswith("Rz"):
        raise ParseError(f"malformed rotation {op!r}", lineno)
    return None


def parse_qc(text: str) -> Circuit:
    names: dict[str, int] = {}
    order: list[str] = []
    blocks: dict[str, Block] = {}
    main: list | None = None
    cur: list | None = None
    cur_block: tuple[str, dict[str, int], int] | None = None
    pending_calls: list[tuple[BlockCall, int, str | None]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        toks = line.split()
        head = toks[0]
        if head == ".v":
            if cur is not None:
                raise ParseError(".v inside a block", lineno)
            for t in toks[1:]:
                if t in names:
                    raise ParseError(f"variable {t!r} declared twice", lineno)
                names[t] = len(order)
                order.append(t)
            continue
        if head in (".i", ".o", ".c", ".ov"):
            for t in toks[1:]:
                if t not in names:
                    raise ParseError(f"undeclared variable {t!r} in {head}", lineno)
            continue
        if head == "BEGIN":
            if cur is not None:
                raise ParseError("nested BEGIN", lineno)
            m = _BEGIN_RE.match(line)
            if not m:
                raise ParseError(f"malformed block header {line!r}", lineno)
            cur = []
            if m.group(1) is None:
                if main is not None:
                    raise ParseError("second main block", lineno)
                cur_block = None
            else:
                bname, inner = m.group(1), m.group(2).replace(",", " ").split()
                if bname in blocks:
                    raise ParseError(f"block {bname!r} defined twice", lineno)
                if len(inner) == 1 and inner[0].isdigit():
                    formals = [f"${i}" for i in range(int(inner[0]))]
                else:
                    formals = inner
                if len(set(formals)) != len(formals):
                    raise ParseError("repeated block parameter", lineno)
                cur_block = (bname, {f: i for i, f in enumerate(formals)}, len(formals))
            continue
        if head == "END":
            if cur is None:
                raise ParseError("END without BEGIN", lineno)
            if cur_block is None:
                main = cur
            else:
                bname, formals, width = cur_block
                blocks[bname] = Block(bname, width, cur, tuple(formals))
            cur, cur_block = None, None
            continue
        if cur is None:
            raise ParseError(f"gate outside BEGIN/END: {line!r}", lineno)
        scope = names if cur_block is None else cur_block[1]
        repeat = 1
        if head == "repeat":
            if len(toks) < 3 or not toks[1].isdigit():
                raise ParseError("expected 'repeat <k> <block> <qubits...>'", lineno)
            repeat = int(toks[1])
            toks = toks[2:]
            head = toks[0]
        g = None if repeat != 1 else parse_gate_tokens(toks, scope, lineno)
        if g is not None:
            cur.append(g)
            continue
        if head in _FIXED or head in ("tof", "X", "H"):
            raise ParseError(f"cannot repeat a single gate mnemonic {head!r}", lineno)
        for a in toks[1:]:
            if a not in scope:
                raise ParseError(f"undeclared variable {a!r}", lineno)
        qubits = tuple(scope[a] for a in toks[1:])
        if len(set(qubits)) != len(qubits):
            raise ParseError("block mapping is not injective", lineno)
        call = BlockCall(head, qubits, repeat)
        cur.append(call)
        pending_calls.append((call, lineno, None if cur_block is None else cur_block[0]))
    if cur is not None:
        raise ParseError("missing END")
    if main is None:
        raise ParseError("no main BEGIN/END block")
    for call, lineno, _owner in pending_calls:
        blk = blocks.get(call.name)
        if blk is None:
            raise ParseError(f"unknown gate or block {call.name!r}", lineno)
        if blk.num_wires != len(call.qubits):
            raise ParseError(f"block {call.name} takes {blk.num_wires} wires, got {len(call.qubits)}", lineno)
    try:
        return Circuit(len(order), main, blocks, order)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _fmt_rz(a: Angle) -> str:
    if not a.is_concrete:
        raise ValueError("cannot emit symbolic angles")
    cls = classify_rz(a)
    k = round(a.radians / (math.pi / 4)) % 8
    if cls is not RzClass.GENERIC:
        named = {1: "T", 7: "T*", 2: "P", 6: "P*", 4: "Z"}.get(k)
        if named:
            return named
    return f"Rz({a.radians:.17g})"


def _fmt_gate(g: Gate, names: list[str]) -> str:
    qs = [names[q] for q in g.qubits]
    if g.kind == GateKind.NOT:
        return f"X {qs[0]}"
    if g.kind == GateKind.H:
        return f"H {qs[0]}"
    if g.kind == GateKind.CNOT:
        return f"tof {qs[0]} {qs[1]}"
    if g.kind == GateKind.TOFFOLI:
        neg = g.negated or (False, False)
        return "tof " + " ".join(q + ("'" if n else "") for q, n in zip(qs[:2], neg)) + f" {qs[2]}"
    return f"{_fmt_rz(g.angle)} {qs[0]}"


def _fmt_items(items: Iterable, names: list[str]) -> list[str]:
    out = []
    for it in items:
        if isinstance(it, BlockCall):
            head = f"repeat {it.repeat} " if it.repeat != 1 else ""
            out.append(head + it.name + "".join(" " + names[q] for q in it.qubits))
        else:
            out.append(_fmt_gate(it, names))
    return out


def emit_qc(circuit: Circuit) -> str:
    names = circuit.qubit_names or [f"q{i}" for i in range(circuit.num_qubits)]
    lines = [".v " + " ".join(names), ".i " + " ".join(names), ".o " + " ".join(names), ""]
    for b in circuit.blocks.values():
        formals = list(b.wire_names) if b.wire_names and not b.wire_names[0].startswith("$") \
            else [f"w{i}" for i in range(b.num_wires)]
        lines.append(f"BEGIN {b.name}({' '.join(formals)})")
        lines += _fmt_items(b.body, formals)
        lines += ["END", ""]
    lines.append("BEGIN")
    lines += _fmt_items(circuit.gates, names)
    lines.append("END")
    return "\n".join(lines) + "\n"


# -- Quipper ---------------------------------------------------------------

_QGATE_RE = re.compile(
    r'^QGate\["(?P<name>[^"]+)"\](?P<inv>\*)?\((?P<targets>[^)]*)\)'
    r'(?:\s+with\s+controls=\[(?P<ctrls>[^\]]*)\])?(?:\s+with\s+nocontrol)?\s*$')
_IGNORED = ("Inputs:", "Outputs:", "QInit", "QTerm", "QDiscard", "Comment", "CInit", "CTerm",
            "CDiscard", "QMeas", "#", "Subroutine", "Shape", "Controllable")
_QUIPPER_PHASE = {"T": math.pi / 4, "S": math.pi / 2, "Z": math.pi}


def parse_quipper(text: str) -> Circuit:
    raw: list[tuple[str, bool, list[int], list[tuple[int, bool]], int]] = []
    wires: set[int] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith(_IGNORED):
            for m in re.finditer(r"(\d+):Qbit", line):
                wires.add(int(m.group(1)))
            m = re.match(r"^Q(?:Init|Term)[01]\((\d+)\)", line)
            if m:
                wires.add(int(m.group(1)))
            continue
        m = _QGATE_RE.match(line)
        if not m:
            raise ParseError(f"unrecognized line {line!r}", lineno)
        try:
            targets = [int(t) for t in m.group("targets").split(",") if t.strip()]
            ctrls = []
            for c in (m.group("ctrls") or "").split(","):
                c = c.strip()
                if not c:
                    continue
                if c[0] not in "+-":
                    raise ValueError(c)
                ctrls.append((int(c[1:]), c[0] == "-"))
        except ValueError:
            raise ParseError(f"malformed operands in {line!r}", lineno) from None
        raw.append((m.group("name"), bool(m.group("inv")), targets, ctrls, lineno))
        wires.update(targets)
        wires.update(q for q, _ in ctrls)
    index = {w: i for i, w in enumerate(sorted(wires))}
    gates: list[Gate] = []
    for name, inv, targets, ctrls, lineno in raw:
        if len(targets) != 1:
            raise ParseError(f"gate {name!r} with {len(targets)} targets is not supported", lineno)
        t = index[targets[0]]
        cs = [(index[q], n) for q, n in ctrls]
        try:
            if name in ("not", "X"):
                if not cs:
                    gates.append(Gate(GateKind.NOT, (t,)))
                elif len(cs) == 1:
                    (c, n), = cs
                    if n:
                        gates += [Gate(GateKind.NOT, (c,)), Gate(GateKind.CNOT, (c, t)), Gate(GateKind.NOT, (c,))]
                    else:
                        gates.append(Gate(GateKind.CNOT, (c, t)))
                elif len(cs) == 2:
                    gates.append(Gate(GateKind.TOFFOLI, (cs[0][0], cs[1][0], t),
                                      negated=(cs[0][1], cs[1][1]) if (cs[0][1] or cs[1][1]) else ()))
                else:
                    raise ParseError(f"gate {name!r} with {len(cs)} controls is not supported", lineno)
            elif name == "H" and not cs:
                gates.append(Gate(GateKind.H, (t,)))
            elif name in _QUIPPER_PHASE and not cs:
                th = _QUIPPER_PHASE[name]
                gates.append(Gate(GateKind.RZ, (t,), normalize_angle(-th if inv else th)))
            else:
                raise ParseError(f"unsupported gate {name!r}" + (" with controls" if cs else ""), lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), lineno) from None
    return Circuit(len(index), gates)


def read_circuit(path: str) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if "QGate[" in text and "BEGIN" not in text:
        return parse_quipper(text)
    return parse_qc(text)


def write_circuit(path: str, circuit: Circuit) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_qc(circuit))
