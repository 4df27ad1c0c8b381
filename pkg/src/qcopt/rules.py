"""Rewrite-rule library: parsing, certification, and the shipped seed set.

A library is a sequence of stanzas::

    RULE <name> <PRESERVING|REDUCING>
    <pattern gate lines>
    ---
    <replacement gate lines>

Gate lines use the `.qc` mnemonics with single-letter wire names; several
gates may share a line separated by ``;``.  An empty replacement (or the
token ``(empty)``) is the identity.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources

from .circuit import Circuit, Gate, GateKind, interaction_set
from .qcio import ParseError, parse_gate_tokens

RULE_TOLERANCE = 1e-10
MAX_RULE_WIRES = 3


class RuleKind(enum.Enum):
    PRESERVING = "PRESERVING"
    REDUCING = "REDUCING"


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    name: str
    kind: RuleKind
    num_wires: int
    pattern: tuple[Gate, ...]
    replacement: tuple[Gate, ...]
    wire_names: tuple[str, ...] = ()

    @property
    def skeleton_only(self) -> bool:
        """True when both sides use only NOT and CNOT."""
        ok = (GateKind.NOT, GateKind.CNOT)
        return all(g.kind in ok for g in self.pattern + self.replacement)

    @property
    def savings(self) -> int:
        return len(self.pattern) - len(self.replacement)


def _parse_side(lines: list[tuple[int, str]], wires: dict[str, int]) -> list[Gate]:
    out = []
    for lineno, line in lines:
        for chunk in line.split(";"):
            toks = chunk.split()
            if not toks or toks == ["(empty)"]:
                continue
            for t in toks[1:]:
                base = t.rstrip("'")
                if base not in wires:
                    if not (len(base) == 1 and base.isalpha()):
                        raise ParseError(f"rule wires must be single letters, got {base!r}", lineno)
                    wires[base] = len(wires)
            g = parse_gate_tokens(toks, wires, lineno)
            if g is None:
                raise ParseError(f"unknown gate {toks[0]!r} in rule", lineno)
            out.append(g)
    return out


def certify_rule(rule: RewriteRule, tol: float = RULE_TOLERANCE) -> None:
    from .verify import equivalent_up_to_phase

    n = rule.num_wires
    lhs, rhs = Circuit(n, list(rule.pattern)), Circuit(n, list(rule.replacement))
    res = equivalent_up_to_phase(lhs, rhs, tol)
    if not res:
        raise RuleError(f"rule {rule.name!r} is not an identity (deviation {res.deviation:.3g})")
    if not interaction_set(rhs) <= interaction_set(lhs):
        raise RuleError(f"rule {rule.name!r} couples wires its pattern does not")
    d = rule.savings
    if rule.kind is RuleKind.PRESERVING and d != 0:
        raise RuleError(f"PRESERVING rule {rule.name!r} changes the gate count by {-d}")
    if rule.kind is RuleKind.REDUCING and d <= 0:
        raise RuleError(f"REDUCING rule {rule.name!r} does not reduce the gate count")


def parse_rule_library(text: str, tol: float = RULE_TOLERANCE) -> list[RewriteRule]:
    """Parse and certify every stanza; raises RuleError or ParseError."""
    stanzas: list[tuple[int, str, str, list, list]] = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        i = raw.find("#")
        line = (raw if i < 0 else raw[:i]).strip()
        if line.startswith("RULE"):
            toks = line.split()
            if len(toks) != 3 or toks[2] not in RuleKind.__members__:
                raise ParseError("expected 'RULE <name> <PRESERVING|REDUCING>'", lineno)
            cur = [lineno, toks[1], toks[2], [], [], False]
            stanzas.append(cur)
            continue
        if not line:
            continue
        if cur is None:
            raise ParseError("gate line outside a RULE stanza", lineno)
        if line == "---":
            if cur[5]:
                raise ParseError("second '---' in one rule", lineno)
            cur[5] = True
            continue
        (cur[4] if cur[5] else cur[3]).append((lineno, line))
    rules = []
    seen = set()
    for lineno, name, kind, pat, rep, split in stanzas:
        if not split:
            raise ParseError(f"rule {name!r} has no '---' separator", lineno)
        if name in seen:
            raise ParseError(f"rule {name!r} defined twice", lineno)
        seen.add(name)
        wires: dict[str, int] = {}
        p = _parse_side(pat, wires)
        r = _parse_side(rep, wires)
        if not p:
            raise ParseError(f"rule {name!r} has an empty pattern", lineno)
        if len(wires) > MAX_RULE_WIRES:
            raise ParseError(f"rule {name!r} uses {len(wires)} wires (max {MAX_RULE_WIRES})", lineno)
        pat_wires = {q for g in p for q in g.qubits}
        if any(q not in pat_wires for g in r for q in g.qubits):
            raise ParseError(f"rule {name!r} replacement uses a wire absent from the pattern", lineno)
        rule = RewriteRule(name, RuleKind[kind], len(wires), tuple(p), tuple(r), tuple(wires))
        certify_rule(rule, tol)
        rules.append(rule)
    return rules


def load_rule_file(path: str) -> list[RewriteRule]:
    with open(path, encoding="utf-8") as fh:
        return parse_rule_library(fh.read())


def load_seed_rules() -> list[RewriteRule]:
    text = resources.files("qcopt").joinpath("data/seed_rules.txt").read_text(encoding="utf-8")
    return parse_rule_library(text)
