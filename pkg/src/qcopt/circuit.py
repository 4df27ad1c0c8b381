"""Core circuit IR: angles, gates, netlists with repeatable blocks, and counts.

Angles are stored as radians reduced to [0, 2pi) plus an optional list of
symbolic polarity terms.  A term ``(var, c)`` contributes ``c * s_var * pi/4``
where ``s_var`` is +1 or -1 and is fixed later by polarity resolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Iterator, Sequence, Union

TWO_PI = 2.0 * math.pi
EPS_ANGLE = 1e-10


class GateKind(IntEnum):
    NOT = 0
    H = 1
    RZ = 2
    CNOT = 3
    TOFFOLI = 4


ARITY = {GateKind.NOT: 1, GateKind.H: 1, GateKind.RZ: 1, GateKind.CNOT: 2, GateKind.TOFFOLI: 3}


class RzClass(Enum):
    T_LIKE = "t_like"
    P_LIKE = "p_like"
    Z_LIKE = "z_like"
    GENERIC = "generic"


def _reduce(x: float) -> float:
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r < EPS_ANGLE or TWO_PI - r < EPS_ANGLE:
        return 0.0
    return r


def _fold_terms(radians: float, terms: Iterable[tuple[int, int]]) -> tuple[float, tuple[tuple[int, int], ...]]:
    acc: dict[int, int] = {}
    for var, c in terms:
        acc[var] = acc.get(var, 0) + c
    out = []
    for var in sorted(acc):
        c = acc[var] % 8
        if c >= 4:
            # 4*s*pi/4 = s*pi, which is pi for either sign
            radians += math.pi
            c -= 4
        if c:
            out.append((var, c))
    return radians, tuple(out)


@dataclass(frozen=True)
class Angle:
    """Rotation angle: concrete radians plus symbolic polarity terms."""

    radians: float = 0.0
    terms: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def make(radians: float, terms: Iterable[tuple[int, int]] = ()) -> "Angle":
        if not math.isfinite(radians):
            raise ValueError(f"non-finite angle {radians!r}")
        radians, folded = _fold_terms(radians, terms)
        return Angle(_reduce(radians), folded)

    @property
    def is_concrete(self) -> bool:
        return not self.terms

    def is_zero(self) -> bool:
        return not self.terms and self.radians == 0.0

    def __add__(self, other: "Angle") -> "Angle":
        return Angle.make(self.radians + other.radians, self.terms + other.terms)

    def __neg__(self) -> "Angle":
        return Angle.make(-self.radians, tuple((v, -c) for v, c in self.terms))

    def __sub__(self, other: "Angle") -> "Angle":
        return self + (-other)

    def substitute(self, assignment: dict[int, int]) -> "Angle":
        """Replace fixed polarity variables by their sign."""
        rad = self.radians
        rest = []
        for var, c in self.terms:
            s = assignment.get(var)
            if s is None:
                rest.append((var, c))
            else:
                rad += s * c * math.pi / 4
        return Angle.make(rad, rest)

    def close_to(self, other: "Angle", eps: float = EPS_ANGLE) -> bool:
        if self.terms != other.terms:
            return False
        d = abs(self.radians - other.radians)
        return d < eps or abs(d - TWO_PI) < eps


def normalize_angle(radians: float) -> Angle:
    """Reduce a real angle into [0, 2pi)."""
    return Angle.make(float(radians))


def classify_rz(angle: Angle) -> RzClass:
    if not angle.is_concrete:
        raise ValueError("cannot classify an angle with unresolved polarity terms")
    q = angle.radians / (math.pi / 4)
    k = round(q)
    if abs(angle.radians - k * math.pi / 4) < EPS_ANGLE:
        k %= 8
        if k % 2 == 1:
            return RzClass.T_LIKE
        if k in (2, 6):
            return RzClass.P_LIKE
        if k == 4:
            return RzClass.Z_LIKE
    return RzClass.GENERIC


@dataclass(frozen=True)
class Gate:
    """One gate.  Operands list controls before the target."""

    kind: GateKind
    qubits: tuple[int, ...]
    angle: Angle | None = None
    negated: tuple[bool, ...] = ()

    def __post_init__(self):
        if len(self.qubits) != ARITY[self.kind]:
            raise ValueError(f"{self.kind.name} expects {ARITY[self.kind]} operands, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated operand in {self.kind.name}{self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")
        if (self.kind == GateKind.RZ) != (self.angle is not None):
            raise ValueError("angle is required for Rz and only for Rz")
        if self.negated and (self.kind != GateKind.TOFFOLI or len(self.negated) != 2):
            raise ValueError("negation flags apply to the two Toffoli controls only")

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def same_as(self, other: "Gate", eps: float = EPS_ANGLE) -> bool:
        if self.kind != other.kind or self.qubits != other.qubits:
            return False
        if self.kind == GateKind.RZ:
            return self.angle.close_to(other.angle, eps)
        if self.kind == GateKind.TOFFOLI:
            return (self.negated or (False, False)) == (other.negated or (False, False))
        return True

    def __repr__(self) -> str:
        qs = ",".join(map(str, self.qubits))
        if self.kind == GateKind.RZ:
            a = self.angle
            extra = f"{a.radians:.6g}" + (f"+{list(a.terms)}" if a.terms else "")
            return f"Rz({extra})[{qs}]"
        if self.kind == GateKind.TOFFOLI and any(self.negated):
            qs = ",".join(("~" if n else "") + str(q) for q, n in zip(self.qubits, self.negated)) + f",{self.qubits[2]}"
        return f"{self.kind.name}[{qs}]"


def NOT(q: int) -> Gate:
    return Gate(GateKind.NOT, (q,))


def H(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def CNOT(c: int, t: int) -> Gate:
    return Gate(GateKind.CNOT, (c, t))


def RZ(q: int, theta: float | Angle) -> Gate:
    a = theta if isinstance(theta, Angle) else normalize_angle(theta)
    return Gate(GateKind.RZ, (q,), a)


def TOFFOLI(a: int, b: int, t: int, neg_a: bool = False, neg_b: bool = False) -> Gate:
    neg = (neg_a, neg_b) if (neg_a or neg_b) else ()
    return Gate(GateKind.TOFFOLI, (a, b, t), negated=neg)


def T(q: int) -> Gate:
    return RZ(q, math.pi / 4)


def TDG(q: int) -> Gate:
    return RZ(q, -math.pi / 4)


def P(q: int) -> Gate:
    return RZ(q, math.pi / 2)


def PDG(q: int) -> Gate:
    return RZ(q, -math.pi / 2)


@dataclass(frozen=True)
class BlockCall:
    """Invocation of a named block, repeated ``repeat`` times on ``qubits``."""

    name: str
    qubits: tuple[int, ...]
    repeat: int = 1


@dataclass
class Block:
    name: str
    num_wires: int
    body: list[Union[Gate, BlockCall]]
    wire_names: tuple[str, ...] = ()


Item = Union[Gate, BlockCall]


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Item] = field(default_factory=list)
    blocks: dict[str, Block] = field(default_factory=dict)
    qubit_names: list[str] | None = None

    def __post_init__(self):
        if self.num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        for it in self.gates:
            self._check_item(it, self.num_qubits)
        for b in self.blocks.values():
            for it in b.body:
                self._check_item(it, b.num_wires)

    def _check_item(self, it: Item, width: int) -> None:
        if any(q >= width for q in it.qubits):
            raise ValueError(f"operand out of range in {it!r} (width {width})")
        if isinstance(it, BlockCall):
            if len(set(it.qubits)) != len(it.qubits):
                raise ValueError(f"block mapping for {it.name} is not injective")
            if it.repeat < 0:
                raise ValueError("negative repeat count")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[Item]:
        return iter(self.gates)

    @property
    def is_flat(self) -> bool:
        return all(isinstance(g, Gate) for g in self.gates)

    def copy(self) -> "Circuit":
        return Circuit(self.num_qubits, list(self.gates), dict(self.blocks),
                       list(self.qubit_names) if self.qubit_names else None)


@dataclass
class GateCounts:
    cnot: int = 0
    h: int = 0
    not_: int = 0
    rz_total: int = 0
    t_like: int = 0
    p_like: int = 0
    z_like: int = 0
    rz_generic: int = 0
    toffoli: int = 0

    @property
    def total(self) -> int:
        return self.cnot + self.h + self.not_ + self.rz_total + self.toffoli

    def scaled(self, k: int) -> "GateCounts":
        return GateCounts(**{f: getattr(self, f) * k for f in self.__dataclass_fields__})

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(**{f: getattr(self, f) + getattr(other, f) for f in self.__dataclass_fields__})

    def as_dict(self) -> dict[str, int]:
        d = {f.rstrip("_"): getattr(self, f) for f in self.__dataclass_fields__}
        d["total"] = self.total
        return d


def _count_items(items: Sequence[Item], blocks: dict[str, Block], memo: dict[str, GateCounts]) -> GateCounts:
    c = GateCounts()
    for g in items:
        if isinstance(g, BlockCall):
            if g.name not in memo:
                if g.name not in blocks:
                    raise KeyError(f"unknown block {g.name}")
                memo[g.name] = GateCounts()  # recursion guard
                memo[g.name] = _count_items(blocks[g.name].body, blocks, memo)
            c = c + memo[g.name].scaled(g.repeat)
            continue
        k = g.kind
        if k == GateKind.CNOT:
            c.cnot += 1
        elif k == GateKind.H:
            c.h += 1
        elif k == GateKind.NOT:
            c.not_ += 1
        elif k == GateKind.TOFFOLI:
            c.toffoli += 1
        else:
            c.rz_total += 1
            cls = classify_rz(g.angle)
            if cls is RzClass.T_LIKE:
                c.t_like += 1
            elif cls is RzClass.P_LIKE:
                c.p_like += 1
            elif cls is RzClass.Z_LIKE:
                c.z_like += 1
            else:
                c.rz_generic += 1
    return c


def counts(circuit: Circuit) -> GateCounts:
    """Tally gates by kind; block calls count with their multiplicity."""
    return _count_items(circuit.gates, circuit.blocks, {})


def aggregate_cost(c: GateCounts, num_qubits: int) -> float:
    """T-like count plus 0.01 * log2(n) * CNOT count."""
    if num_qubits < 2:
        raise ValueError("aggregate cost needs at least 2 qubits")
    return c.t_like + 0.01 * math.log2(num_qubits) * c.cnot


def inverse(circuit: Circuit) -> Circuit:
    flat = expand_blocks(circuit)
    out = []
    for g in reversed(flat.gates):
        if g.kind == GateKind.RZ:
            if not g.angle.is_concrete:
                raise ValueError("cannot invert a circuit with symbolic angles")
            g = Gate(GateKind.RZ, g.qubits, normalize_angle(-g.angle.radians))
        out.append(g)
    return Circuit(circuit.num_qubits, out, qubit_names=circuit.qubit_names)


def _expand(items: Sequence[Item], mapping: Sequence[int], blocks: dict[str, Block],
            out: list[Gate], depth: int) -> None:
    if depth > 64:
        raise ValueError("block nesting too deep (recursive block?)")
    for it in items:
        if isinstance(it, Gate):
            if len(mapping) and any(q >= len(mapping) for q in it.qubits):
                raise ValueError(f"block gate {it!r} references an unmapped wire")
            out.append(it if not len(mapping) else Gate(it.kind, tuple(mapping[q] for q in it.qubits), it.angle, it.negated))
            continue
        blk = blocks.get(it.name)
        if blk is None:
            raise KeyError(f"unknown block {it.name}")
        if len(it.qubits) != blk.num_wires:
            raise ValueError(f"block {it.name} expects {blk.num_wires} wires, got {len(it.qubits)}")
        sub = [mapping[q] for q in it.qubits] if len(mapping) else list(it.qubits)
        for _ in range(it.repeat):
            _expand(blk.body, sub, blocks, out, depth + 1)


def expand_blocks(circuit: Circuit) -> Circuit:
    """Flatten every block call into a plain gate list."""
    if not circuit.blocks and circuit.is_flat:
        return circuit
    out: list[Gate] = []
    _expand(circuit.gates, (), circuit.blocks, out, 0)
    for g in out:
        if any(q >= circuit.num_qubits for q in g.qubits):
            raise ValueError(f"expanded gate {g!r} references an undeclared qubit")
    return Circuit(circuit.num_qubits, out, qubit_names=circuit.qubit_names)


def same_gates(a: Sequence[Gate], b: Sequence[Gate], eps: float = EPS_ANGLE) -> bool:
    return len(a) == len(b) and all(x.same_as(y, eps) for x, y in zip(a, b))


def interaction_set(circuit: Circuit) -> set[frozenset[int]]:
    """Unordered qubit pairs coupled by CNOTs (and Toffolis)."""
    pairs = set()
    for g in expand_blocks(circuit).gates:
        if g.kind == GateKind.CNOT:
            pairs.add(frozenset(g.qubits))
        elif g.kind == GateKind.TOFFOLI:
            a, b, t = g.qubits
            pairs.update((frozenset((a, b)), frozenset((a, t)), frozenset((b, t))))
    return pairs
