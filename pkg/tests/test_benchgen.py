import itertools

import numpy as np
import pytest
from scipy.linalg import expm

from qcopt.benchgen import (
    PfSpec, gen_product_formula, gen_qfa, gen_qft, gen_toffoli_barenco, gen_toffoli_nc, heisenberg_matrix,
    pf_circuit, pf_steps_for_error,
)
from qcopt.circuit import GateKind, H, counts
from qcopt.verify import apply_circuit, unitary


def _basis(n, bits):
    v = np.zeros((2 ** n, 1), dtype=complex)
    v[int("".join(map(str, bits)), 2), 0] = 1
    return v


def _up_to_phase(a, b, tol=1e-8):
    i = np.argmax(np.abs(b))
    ph = a.ravel()[i] / b.ravel()[i]
    return abs(abs(ph) - 1) < tol and np.max(np.abs(a - ph * b)) < tol


def test_qft3_counts():
    c = counts(gen_qft(3))
    assert (c.h, c.cnot, c.rz_total) == (3, 6, 9)


def test_qft1_is_hadamard():
    assert gen_qft(1).gates == [H(0)]


def test_qft_matches_dft():
    n = 3
    u = unitary(gen_qft(n))
    dim = 2 ** n
    f = np.exp(2j * np.pi * np.outer(range(dim), range(dim)) / dim) / np.sqrt(dim)
    rev = [int(format(i, f"0{n}b")[::-1], 2) for i in range(dim)]
    assert _up_to_phase(u[rev, :], f)  # no final wire reversal


def test_cutoff_drops_small_rotations():
    assert counts(gen_qft(8)).cnot == 2 * 28
    # pairs at distance 13, 14, 15 are dropped
    assert counts(gen_qft(16)).cnot == 2 * (120 - 6)
    assert counts(gen_qft(16, None)).cnot == 2 * 120


@pytest.mark.parametrize("n, cnot, rz", [(8, 184, 276), (16, 2 * (2 * 114 + 136 - 6), 3 * (2 * 114 + 136 - 6))])
def test_qfa_counts(n, cnot, rz):
    c = counts(gen_qfa(n))
    assert (c.h, c.cnot, c.rz_total) == (2 * n, cnot, rz)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_qfa_adds(n):
    c = gen_qfa(n)
    u = unitary(c)
    m = 2 ** n
    perm = np.zeros_like(u)
    for a, b in itertools.product(range(m), repeat=2):
        perm[a * m + (a + b) % m, a * m + b] = 1
    assert _up_to_phase(u, perm)


@pytest.mark.parametrize("k", [3, 4])
def test_nc_is_mcx_with_clean_ancillas(k):
    c = gen_toffoli_nc(k)
    n = 2 * k - 1
    assert counts(c).toffoli == 2 * k - 3
    for ctrl in itertools.product((0, 1), repeat=k):
        for tgt in (0, 1):
            bits = list(ctrl) + [0] * (k - 2) + [tgt]
            out = apply_circuit(c, _basis(n, bits))
            want = list(ctrl) + [0] * (k - 2) + [tgt ^ all(ctrl)]
            assert np.allclose(out, _basis(n, want))


@pytest.mark.parametrize("k", [3, 4])
def test_barenco_is_mcx_for_any_ancilla(k):
    c = gen_toffoli_barenco(k)
    n = 2 * k - 1
    assert counts(c).toffoli == 4 * (k - 2)
    u = unitary(c)
    want = np.zeros_like(u)
    for idx in range(2 ** n):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        if all(bits[:k]):
            bits[-1] ^= 1
        want[int("".join(map(str, bits)), 2), idx] = 1
    assert np.allclose(u, want)


def test_pf_order1_structure():
    c = counts(pf_circuit(PfSpec(3, order=1)))
    # 9 two-site terms on a periodic chain plus 3 fields
    assert (c.cnot, c.h, c.rz_total) == (18, 24, 24)
    assert c.p_like == 12


def test_pf_order2_is_time_symmetric():
    fwd = unitary(pf_circuit(PfSpec(3, order=2, time=0.7, field_seed=3)))
    back = unitary(pf_circuit(PfSpec(3, order=2, time=-0.7, field_seed=3)))
    assert _up_to_phase(fwd @ back, np.eye(8))
    fwd1 = unitary(pf_circuit(PfSpec(3, order=1, time=0.7, field_seed=3)))
    back1 = unitary(pf_circuit(PfSpec(3, order=1, time=-0.7, field_seed=3)))
    assert not _up_to_phase(fwd1 @ back1, np.eye(8), 1e-3)


def test_pf_converges_to_exact_evolution():
    spec = PfSpec(4, order=2, trotter_steps=16, time=0.2, field_seed=1)
    exact = expm(-1j * spec.time * heisenberg_matrix(spec))
    u = unitary(pf_circuit(spec))
    ph = np.trace(exact.conj().T @ u)
    ph /= abs(ph)
    assert np.max(np.abs(u - ph * exact)) < 1e-3


def test_pf_block_and_reps():
    block, reps = gen_product_formula(PfSpec(4, trotter_steps=5))
    assert reps == 5 and block.blocks == {}
    full = pf_circuit(PfSpec(4, trotter_steps=5))
    assert counts(full) == counts(block).scaled(5)


def test_pf_deterministic():
    a, b = pf_circuit(PfSpec(4, field_seed=7)), pf_circuit(PfSpec(4, field_seed=7))
    assert a.blocks["step"].body == b.blocks["step"].body
    assert PfSpec(4, field_seed=7).fields != PfSpec(4, field_seed=8).fields
    assert PfSpec(4).time == 4.0


def test_pf_steps_for_error():
    spec = PfSpec(3)
    assert pf_steps_for_error(spec, 1e-2) <= pf_steps_for_error(spec, 1e-3)
    assert pf_steps_for_error(spec) >= 1


@pytest.mark.parametrize("bad", [
    lambda: gen_qft(0), lambda: gen_qfa(0), lambda: gen_toffoli_nc(2), lambda: gen_toffoli_barenco(2),
    lambda: PfSpec(1), lambda: PfSpec(3, order=3), lambda: PfSpec(3, trotter_steps=0),
])
def test_invalid_arguments(bad):
    with pytest.raises(ValueError):
        bad()


def test_generators_emit_only_basis_gates():
    allowed = {GateKind.NOT, GateKind.CNOT, GateKind.H, GateKind.RZ}
    for c in (gen_qft(5), gen_qfa(3), gen_product_formula(PfSpec(3))[0]):
        assert {g.kind for g in c.gates} <= allowed
