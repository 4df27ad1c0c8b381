"""Acceptance suite: one test (or parametrized group) per criterion.

The terminal summary prints a PASS/FAIL/SKIP line for each criterion.
Tolerances and time limits are the module constants below.
"""
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import random_circuit
from qcopt import benchgen
from qcopt.circuit import TOFFOLI, Circuit, GateCounts, GateKind, aggregate_cost, counts, expand_blocks, interaction_set
from qcopt.dag import to_dag
from qcopt.pipeline import (
    Config, _prepare, decompose_toffoli, lcr_optimize, optimize, optimize_heavy, optimize_light,
    run_routine,
)
from qcopt.qcio import read_circuit
from qcopt.rewriting import COMMUTATION_PATTERNS, HADAMARD_IDENTITIES, certify_patterns
from qcopt.rules import load_seed_rules, parse_rule_library
from qcopt.verify import equivalent_on_states, equivalent_up_to_phase

EQUIV_TOL = 1e-8
CERT_TOL = 1e-12
COST_TOL_SMALL = 0.01
COST_TOL_LARGE = 0.05

QFA_TIME_LIMIT = 5.0
QUIPPER_TIME_LIMIT = 1.0
NC_TIME_LIMIT = 1.0
EQUIV_TIME_LIMIT = 120.0
QFT_TIME_LIMIT = 10.0
BIG_QFA_TIME_LIMIT = 60.0
BIG_QFA_MEM_LIMIT = 2 * 1024 ** 3

PF_CNOT_RANGE = (0.28, 0.38)
PF_RZ_RANGE = (0.23, 0.33)
PF_STEPS = 10

# n: (pre CNOT, pre Rz, pre H, post Rz)
QFA_EXPECTED = {
    8: (184, 276, 16, 122),
    16: (716, 1074, 32, 420),
    32: (1900, 2850, 64, 1076),
    64: (4268, 6402, 128, 2388),
    128: (9004, 13506, 256, 5012),
    256: (18476, 27714, 512, 10260),
}

# k: ((pre total, CNOT, T), (post total, CNOT, T))
NC_EXPECTED = {
    3: ((45, 18, 21), (35, 14, 15)),
    4: ((75, 30, 35), (55, 22, 23)),
    5: ((105, 42, 49), (75, 30, 31)),
}


def _non_clifford(c: GateCounts) -> int:
    return c.t_like + c.rz_generic


# -- 1 --------------------------------------------------------------------------

@pytest.mark.criterion(1, "QFA Light reproduces the expected adder counts, n=8..256, < 5 s")
def test_qfa_counts_exact():
    cfg = Config(mode="light-qfa")
    elapsed = 0.0
    for n, (cx, rz, h, post_rz) in QFA_EXPECTED.items():
        circ = benchgen.gen_qfa(n)
        pre = counts(circ)
        assert (pre.cnot, pre.rz_total, pre.h) == (cx, rz, h), f"pre counts for n={n}"
        t0 = time.perf_counter()
        _out, rep = optimize(circ, cfg)
        elapsed += time.perf_counter() - t0
        assert rep.post.rz_total == post_rz, f"post Rz for n={n}"
        assert rep.post.cnot == cx and rep.post.h == h, f"CNOT/H changed for n={n}"
    assert elapsed < QFA_TIME_LIMIT, f"{elapsed:.2f}s"


# -- 2 --------------------------------------------------------------------------

def _quipper_adder_path() -> Path | None:
    env = os.environ.get("QCOPT_QUIPPER_ADDER8")
    cands = [Path(env)] if env else []
    cands.append(Path(__file__).parent / "data" / "quipper_adder_8.txt")
    for p in cands:
        if p.is_file():
            return p
    return None


@pytest.mark.criterion(2, "Quipper adder n=8: Light 143/56/28/12, Heavy 94 CNOT, < 1 s")
def test_quipper_adder():
    path = _quipper_adder_path()
    if path is None:
        pytest.skip("published Quipper adder file not available (set QCOPT_QUIPPER_ADDER8)")
    circ = read_circuit(str(path))
    t0 = time.perf_counter()
    _o, light = optimize_light(circ)
    light_s = time.perf_counter() - t0
    p = light.post
    assert (p.cnot, p.t_like, p.h, p.p_like) == (143, 56, 28, 12)
    _o, heavy = optimize_heavy(circ)
    assert heavy.post.cnot == 94
    assert light_s < QUIPPER_TIME_LIMIT


# -- 3 --------------------------------------------------------------------------

@pytest.mark.criterion(3, "Toff-NC k=3,4,5 pre and post-Light counts, < 1 s")
@pytest.mark.parametrize("k", sorted(NC_EXPECTED))
def test_toffoli_nc_counts(k):
    (pre_tot, pre_cx, pre_t), (post_tot, post_cx, post_t) = NC_EXPECTED[k]
    t0 = time.perf_counter()
    _out, rep = optimize_light(benchgen.gen_toffoli_nc(k))
    elapsed = time.perf_counter() - t0
    d, p = rep.decomposed, rep.post
    assert (d.total, d.cnot, d.t_like) == (pre_tot, pre_cx, pre_t)
    assert (p.total, p.cnot, p.t_like) == (post_tot, post_cx, post_t)
    assert elapsed < NC_TIME_LIMIT


# -- 4 --------------------------------------------------------------------------

@pytest.mark.criterion(4, "aggregate cost 49.70 (+-0.01) and 18326.42 (+-0.05)")
def test_aggregate_cost():
    assert aggregate_cost(GateCounts(t_like=47, cnot=71), 14) == pytest.approx(49.70, abs=COST_TOL_SMALL)
    assert aggregate_cost(GateCounts(t_like=16448, cnot=24765), 192) == pytest.approx(18326.42, abs=COST_TOL_LARGE)


# -- 5 --------------------------------------------------------------------------

def _equiv_suite():
    out = [(f"qfa{n}", benchgen.gen_qfa(n)) for n in range(1, 6)]
    out += [(f"qft{n}", benchgen.gen_qft(n)) for n in range(1, 11)]
    out += [(f"nc{k}", benchgen.gen_toffoli_nc(k)) for k in range(3, 8)]
    out += [(f"barenco{k}", benchgen.gen_toffoli_barenco(k)) for k in range(3, 8)]
    out += [(f"pf{n}", benchgen.pf_circuit(benchgen.PfSpec(n, 2, 2))) for n in range(2, 7)]
    return out


@pytest.mark.criterion(5, "pre == post up to phase for small benchmarks, Light and Heavy, < 2 min")
def test_benchmark_equivalence():
    t0 = time.perf_counter()
    failures = []
    for name, circ in _equiv_suite():
        for mode in ("light", "heavy"):
            out, _ = optimize(circ, Config(mode=mode))
            if circ.num_qubits <= 12:
                res = equivalent_up_to_phase(circ, out, EQUIV_TOL)
            else:
                res = equivalent_on_states(circ, out, num_states=8, seed=7, tol=EQUIV_TOL)
            if not res:
                failures.append((name, mode, res.deviation))
    elapsed = time.perf_counter() - t0
    assert not failures, failures
    assert elapsed < EQUIV_TIME_LIMIT, f"{elapsed:.1f}s"


# -- 6 --------------------------------------------------------------------------

def _rz_alive(dag) -> int:
    return sum(1 for k in dag.kind if k == GateKind.RZ)


@pytest.mark.criterion(6, "structural guarantees on 500 random circuits")
def test_structural_guarantees():
    rng = np.random.default_rng(2024)
    cfg = Config(mode="heavy")
    probe = (1, 3, 2, 3, 1, 2, 4, 5)
    for i in range(500):
        n = int(rng.integers(2, 9))
        g = int(rng.integers(1, 301))
        circ = random_circuit(rng, n, g, toffoli=(i % 2 == 1))
        dec, _pv, _pre, dcounts = _prepare(circ)
        for mode in ("light", "heavy"):
            out, rep = optimize(circ, Config(mode=mode))
            assert rep.post.cnot <= dcounts.cnot, (i, mode)
            assert interaction_set(out) <= interaction_set(circ), (i, mode)
            assert rep.iterations <= len(dec.gates) + 1, (i, mode)
        dag = to_dag(dec)
        for r in probe:
            before = _rz_alive(dag)
            run_routine(dag, r, cfg)
            assert _rz_alive(dag) <= before, (i, r)


# -- 7 --------------------------------------------------------------------------

@pytest.mark.criterion(7, "QFT512 Light total reduction > 36%, < 10 s")
def test_qft512_reduction():
    circ = benchgen.gen_qft(512, 13)
    t0 = time.perf_counter()
    _out, rep = optimize_light(circ)
    elapsed = time.perf_counter() - t0
    red = 1 - rep.post.total / rep.pre.total
    assert red > 0.36, f"{red:.4f}"
    assert elapsed < QFT_TIME_LIMIT, f"{elapsed:.2f}s"


# -- 8 --------------------------------------------------------------------------

@pytest.mark.criterion(8, "PF order 2 Light+LCR reductions in range, and L C^(t-2) R == O^t")
@pytest.mark.parametrize("n", [6, 8, 10])
def test_pf_lcr_reduction(n):
    block, _ = benchgen.gen_product_formula(benchgen.PfSpec(n, 2, PF_STEPS))
    res = lcr_optimize(block, PF_STEPS)
    pre = counts(block).scaled(PF_STEPS)
    post = res.counts()
    cx_red = 1 - post.cnot / pre.cnot
    rz_red = 1 - _non_clifford(post) / _non_clifford(pre)
    assert PF_CNOT_RANGE[0] <= cx_red <= PF_CNOT_RANGE[1], f"CNOT reduction {cx_red:.4f}"
    assert PF_RZ_RANGE[0] <= rz_red <= PF_RZ_RANGE[1], f"Rz reduction {rz_red:.4f}"


@pytest.mark.criterion(8, "PF order 2 Light+LCR reductions in range, and L C^(t-2) R == O^t")
def test_pf_lcr_equivalence():
    t = 5
    block, _ = benchgen.gen_product_formula(benchgen.PfSpec(6, 2, t))
    res = lcr_optimize(block, t)
    full = Circuit(6, list(block.gates) * t)
    assert equivalent_up_to_phase(full, expand_blocks(res.circuit()), EQUIV_TOL)


# -- 9 --------------------------------------------------------------------------

def _toffoli_variants():
    for na in (False, True):
        for nb in (False, True):
            for sign in (1, -1):
                yield na, nb, sign


@pytest.mark.criterion(9, "patterns, identities, Toffoli expansions and rules certified at 1e-12")
def test_certification():
    assert certify_patterns(CERT_TOL) == len(COMMUTATION_PATTERNS) + len(HADAMARD_IDENTITIES)
    for na, nb, sign in _toffoli_variants():
        tof = Circuit(3, [TOFFOLI(0, 1, 2, na, nb)])
        dec, pvars = decompose_toffoli(tof)
        fixed = Circuit(3, [
            g if g.kind != GateKind.RZ else type(g)(g.kind, g.qubits, g.angle.substitute({pvars[0].id: sign}))
            for g in dec.gates
        ])
        res = equivalent_up_to_phase(tof, fixed, CERT_TOL)
        assert res, (na, nb, sign, res.deviation)
    from importlib import resources

    text = resources.files("qcopt").joinpath("data/seed_rules.txt").read_text()
    strict = parse_rule_library(text, tol=CERT_TOL)
    assert [r.name for r in strict] == [r.name for r in load_seed_rules()]


# -- 10 -------------------------------------------------------------------------

_BIG_QFA_SCRIPT = """
import resource, sys, time
from qcopt import benchgen
from qcopt.pipeline import Config, optimize
c = benchgen.gen_qfa(2048)
t0 = time.perf_counter()
optimize(c, Config(mode="light-qfa"))
el = time.perf_counter() - t0
rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
print(el, rss, len(c.gates))
"""


@pytest.mark.criterion(10, "QFA2048 Light < 60 s and < 2 GB")
def test_qfa2048_envelope():
    proc = subprocess.run([sys.executable, "-c", _BIG_QFA_SCRIPT], capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    el, rss, ngates = proc.stdout.split()
    assert float(el) < BIG_QFA_TIME_LIMIT, f"{float(el):.1f}s"
    assert int(rss) < BIG_QFA_MEM_LIMIT, f"{int(rss) / 2 ** 20:.0f} MiB"
    assert int(ngates) > 200_000
