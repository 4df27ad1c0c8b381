"""Deterministic generators for the benchmark families.

Controlled-phase gates are expanded as
``Rz(θ/2)(c) · CNOT(c;t) · Rz(-θ/2)(t) · CNOT(c;t) · Rz(θ/2)(t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CNOT, H, NOT, RZ, TOFFOLI, Block, BlockCall, Circuit, Gate

DEFAULT_CUTOFF = 13


def controlled_phase(c: int, t: int, theta: float) -> list[Gate]:
    return [RZ(c, theta / 2), CNOT(c, t), RZ(t, -theta / 2), CNOT(c, t), RZ(t, theta / 2)]


def _kept(d: int, cutoff: int | None) -> bool:
    # CP(pi/2^d) is dropped once its angle is at most pi/2^cutoff
    return cutoff is None or d < cutoff


def _qft_gates(qubits: list[int], cutoff: int | None) -> list[Gate]:
    n = len(qubits)
    out: list[Gate] = []
    for j in range(n):
        out.append(H(qubits[j]))
        for k in range(j + 1, n):
            d = k - j
            if _kept(d, cutoff):
                out += controlled_phase(qubits[k], qubits[j], math.pi / 2 ** d)
    return out


def _inverse_gates(gates: list[Gate]) -> list[Gate]:
    out = []
    for g in reversed(gates):
        if g.angle is not None:
            g = RZ(g.qubits[0], -g.angle.radians)
        out.append(g)
    return out


def gen_qft(n: int, cutoff_exponent: int | None = DEFAULT_CUTOFF) -> Circuit:
    """Approximate QFT on n qubits without the final wire reversal."""
    if n < 1:
        raise ValueError("QFT needs n >= 1")
    return Circuit(n, _qft_gates(list(range(n)), cutoff_exponent))


def gen_qfa(n: int, cutoff_exponent: int | None = DEFAULT_CUTOFF) -> Circuit:
    """QFT-based in-place adder |a>|b> -> |a>|a+b mod 2^n>.

    Qubits 0..n-1 hold a, qubits n..2n-1 hold b, most significant bit first.
    """
    if n < 1:
        raise ValueError("QFA needs n >= 1")
    a = list(range(n))
    b = list(range(n, 2 * n))
    qft = _qft_gates(b, cutoff_exponent)
    add: list[Gate] = []
    for j in range(n):
        for i in range(j, n):
            d = i - j
            if _kept(d, cutoff_exponent):
                add += controlled_phase(a[i], b[j], math.pi / 2 ** d)
    return Circuit(2 * n, qft + add + _inverse_gates(qft))


def gen_toffoli_nc(k: int) -> Circuit:
    """k-controlled NOT from a compute/uncompute ladder of 2k-3 Toffolis.

    Layout: controls 0..k-1, clean ancillas k..2k-3, target 2k-2.
    """
    if k < 3:
        raise ValueError("Toff-NC needs k >= 3")
    c = list(range(k))
    anc = list(range(k, 2 * k - 2))
    t = 2 * k - 2
    ladder = [TOFFOLI(c[0], c[1], anc[0])]
    for i in range(2, k - 1):
        ladder.append(TOFFOLI(c[i], anc[i - 2], anc[i - 1]))
    middle = TOFFOLI(c[k - 1], anc[k - 3], t)
    return Circuit(2 * k - 1, ladder + [middle] + ladder[::-1])


def gen_toffoli_barenco(k: int) -> Circuit:
    """k-controlled NOT from 4(k-2) Toffolis using k-2 borrowed ancillas.

    Layout as in gen_toffoli_nc; ancillas may start in any state.
    """
    if k < 3:
        raise ValueError("Toff-Barenco needs k >= 3")
    c = list(range(k))
    anc = list(range(k, 2 * k - 2))
    t = 2 * k - 2

    ladder = [TOFFOLI(c[i], anc[i - 2], anc[i - 1]) for i in range(k - 2, 1, -1)]
    bottom = TOFFOLI(c[0], c[1], anc[0])
    top = TOFFOLI(c[k - 1], anc[k - 3], t)
    first = [top] + ladder + [bottom] + ladder[::-1] + [top]
    second = ladder + [bottom] + ladder[::-1]
    return Circuit(2 * k - 1, first + second)


# -- product formulas ------------------------------------------------------

@dataclass
class PfSpec:
    n: int
    order: int = 2
    trotter_steps: int = 1
    time: float | None = None
    field_seed: int = 0
    fields: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Heisenberg chain needs n >= 2")
        if self.order != 1 and (self.order % 2 or self.order < 2):
            raise ValueError("product-formula order must be 1 or even")
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be >= 1")
        if self.time is None:
            self.time = float(self.n)
        if not self.fields:
            rng = np.random.default_rng(self.field_seed)
            self.fields = [float(x) for x in rng.uniform(-1.0, 1.0, self.n)]


# term = (pauli, sites, coefficient); pauli in {"XX","YY","ZZ","Z"}
Term = tuple[str, tuple[int, ...], float]


def heisenberg_terms(spec: PfSpec) -> list[Term]:
    n = spec.n
    bonds = [(j, (j + 1) % n) for j in range(n)] if n > 2 else [(0, 1)]
    terms: list[Term] = []
    for p in ("XX", "YY", "ZZ"):
        terms += [(p, b, 1.0) for b in bonds]
    terms += [("Z", (j,), spec.fields[j]) for j in range(n)]
    return terms


def _suzuki(terms: list[Term], order: int, dt: float) -> list[tuple[Term, float]]:
    if order == 1:
        return [(t, dt) for t in terms]
    if order == 2:
        # Strang splitting with the commuting field layer as the middle step
        fields = [t for t in terms if t[0] == "Z"]
        fwd = [(t, dt / 2) for t in terms if t[0] != "Z"]
        seq = fwd + [(t, dt) for t in fields] + fwd[::-1]
    else:
        p = 1.0 / (4.0 - 4.0 ** (1.0 / (order - 1)))
        inner = order - 2
        part = _suzuki(terms, inner, p * dt)
        mid = _suzuki(terms, inner, (1 - 4 * p) * dt)
        seq = part + part + mid + part + part
    merged: list[tuple[Term, float]] = []
    for t, w in seq:
        if merged and merged[-1][0] == t:
            merged[-1] = (t, merged[-1][1] + w)
        else:
            merged.append((t, w))
    return merged


def _pauli_exp(term: Term, weight: float) -> list[Gate]:
    """exp(-i * weight * coefficient * P) for a Z or two-site Pauli product."""
    pauli, sites, coef = term
    theta = 2.0 * weight * coef
    if pauli == "Z":
        return [RZ(sites[0], theta)]
    a, b = sites
    if pauli == "XX":
        pre = [H(a), H(b)]
        post = [H(a), H(b)]
    elif pauli == "YY":
        pre = [RZ(a, -math.pi / 2), H(a), RZ(b, -math.pi / 2), H(b)]
        post = [H(a), RZ(a, math.pi / 2), H(b), RZ(b, math.pi / 2)]
    else:
        pre, post = [], []
    return pre + [CNOT(a, b), RZ(b, theta), CNOT(a, b)] + post


def pf_step_gates(spec: PfSpec) -> list[Gate]:
    dt = spec.time / spec.trotter_steps
    out: list[Gate] = []
    for term, w in _suzuki(heisenberg_terms(spec), spec.order, dt):
        out += _pauli_exp(term, w)
    return out


def gen_product_formula(spec: PfSpec) -> tuple[Circuit, int]:
    """One Trotter step as a block, plus the number of repetitions."""
    return Circuit(spec.n, pf_step_gates(spec)), spec.trotter_steps


def pf_circuit(spec: PfSpec) -> Circuit:
    """The full evolution as a netlist with one repeated block."""
    block, reps = gen_product_formula(spec)
    blk = Block("step", spec.n, block.gates)
    return Circuit(spec.n, [BlockCall("step", tuple(range(spec.n)), reps)], {"step": blk})


def heisenberg_matrix(spec: PfSpec) -> np.ndarray:
    """Dense Hamiltonian (qubit 0 most significant), for small-n checks."""
    n = spec.n
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    ops = {"X": X, "Y": Y, "Z": Z}

    def embed(paulis: dict[int, np.ndarray]) -> np.ndarray:
        m = np.array([[1.0]], dtype=complex)
        for q in range(n):
            m = np.kron(m, paulis.get(q, np.eye(2)))
        return m

    ham = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for pauli, sites, coef in heisenberg_terms(spec):
        if len(sites) == 1:
            ham += coef * embed({sites[0]: Z})
        else:
            p = ops[pauli[0]]
            ham += coef * embed({sites[0]: p, sites[1]: p})
    return ham


def pf_steps_for_error(spec: PfSpec, eps: float = 1e-3) -> int:
    """Trotter steps from a crude Suzuki bound (Lambda*t)^(1+1/p) / eps^(1/p)."""
    lam = sum(abs(c) for _, _, c in heisenberg_terms(spec))
    p = spec.order
    return max(1, math.ceil((lam * spec.time) ** (1 + 1 / p) / eps ** (1 / p)))


FAMILIES = ("qft", "qfa", "toffoli-nc", "toffoli-barenco", "pf")
