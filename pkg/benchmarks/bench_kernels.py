"""Time the compiled cancellation kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 64] [--repeat 3]

Each backend runs routines 2 and 3 on fresh copies of the same circuits;
the outputs are checked to agree before timings are reported.
"""
from __future__ import annotations

import argparse
import statistics
import time

from qcopt import kernels
from qcopt.benchgen import PfSpec, gen_product_formula, gen_qfa, gen_toffoli_barenco
from qcopt.circuit import Circuit, same_gates
from qcopt.dag import to_dag, to_netlist
from qcopt.pipeline import decompose_toffoli, resolve_polarities
from qcopt.rewriting import cancel_single_qubit, cancel_two_qubit


def _workloads(n: int):
    pf, _ = gen_product_formula(PfSpec(max(2, n // 8)))
    tof, pv = decompose_toffoli(gen_toffoli_barenco(max(3, n // 8)))
    return {
        f"qfa{n}": gen_qfa(n),
        f"pf{max(2, n // 8)}x8": Circuit(pf.num_qubits, pf.gates * 8),
        f"barenco{max(3, n // 8)}": resolve_polarities(tof, pv),
    }


def _run(circuit, backend: str):
    dag = to_dag(circuit)
    t0 = time.perf_counter()
    cancel_two_qubit(dag, -1, backend)
    cancel_single_qubit(dag, -1, backend)
    return time.perf_counter() - t0, to_netlist(dag).gates


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernels.get_backend("cython")
        backends = ["python", "cython"]
    except ImportError:
        print("compiled kernels not built; timing the fallback only")
        backends = ["python"]

    print(f"{'workload':<14}{'gates':>9}" + "".join(f"{b + ' s':>12}" for b in backends) + f"{'speedup':>10}")
    for name, circ in _workloads(args.n).items():
        best, outs = {}, {}
        for b in backends:
            times = []
            for _ in range(args.repeat):
                dt, outs[b] = _run(circ, b)
                times.append(dt)
            best[b] = statistics.median(times)
        if len(backends) == 2 and not same_gates(outs["python"], outs["cython"]):
            raise SystemExit(f"{name}: backends disagree")
        speed = f"{best['python'] / best['cython']:.1f}x" if "cython" in best else "-"
        print(f"{name:<14}{len(circ.gates):>9}" + "".join(f"{best[b]:>12.4f}" for b in backends) + f"{speed:>10}")


if __name__ == "__main__":
    main()
