"""Command-line front end.

Exit codes: 0 success, 1 circuits not equivalent (``verify``), 2 bad input
(usage, unreadable or unparsable file, too many qubits), 3 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from . import benchgen
from .circuit import Circuit, GateCounts, aggregate_cost, counts, expand_blocks
from .pipeline import Config, InvariantError, LcrFailure, lcr_optimize, optimize
from .qcio import ParseError, emit_qc, read_circuit
from .rules import RuleError
from .verify import MAX_QUBITS, VerificationError, equivalent_up_to_phase

EXIT_OK, EXIT_INEQUIVALENT, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3

log = logging.getLogger("qcopt")


@dataclass
class StatsRecord:
    input: str
    output: str | None
    mode: str
    num_qubits: int
    pre: dict[str, int]
    post: dict[str, int]
    aggregate_pre: float
    aggregate_post: float
    runtime: float
    timeout: bool = False
    lcr: dict[str, int] | None = None
    tallies: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "StatsRecord":
        return cls(**json.loads(text))


def _cost(c: GateCounts, n: int) -> float:
    return aggregate_cost(c, n) if n >= 2 else float(c.t_like)


def _config(args) -> Config:
    return Config(mode=args.mode, max_commute_window=args.max_commute_window,
                  max_region_gates=args.max_region_gates, heavy_timeout_factor=args.timeout_factor,
                  rules_path=args.rules, backend=args.backend)


def _output_path(args, path: str) -> str | None:
    if args.output is None:
        return None
    if len(args.inputs) == 1 and not os.path.isdir(args.output):
        return args.output
    stem = os.path.splitext(os.path.basename(path))[0]
    return os.path.join(args.output, stem + ".opt.qc")


def _optimize_one(args, cfg: Config, path: str) -> StatsRecord:
    circ = read_circuit(path)
    t0 = time.perf_counter()
    lcr_sizes = None
    timeout = False
    tallies: dict[str, int] = {}
    if args.lcr:
        res = lcr_optimize(circ, args.lcr, cfg)
        out = res.circuit()
        pre_c = counts(expand_blocks(circ)).scaled(args.lcr)
        post_c = res.counts()
        lcr_sizes = {"L": len(res.L), "C": len(res.C), "R": len(res.R), "t": args.lcr}
    else:
        out, rep = optimize(circ, cfg)
        pre_c, post_c, timeout = rep.decomposed, rep.post, rep.timeout
        tallies = dict(rep.tallies)
        if args.verify:
            if out.num_qubits > MAX_QUBITS:
                raise ValueError(f"--verify supports at most {MAX_QUBITS} qubits")
            eq = equivalent_up_to_phase(circ, out, args.tol)
            if not eq:
                raise VerificationError(f"{path}: output differs from input (deviation {eq.deviation:.3e})")
    runtime = time.perf_counter() - t0
    out.qubit_names = circ.qubit_names
    dest = _output_path(args, path)
    if dest:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(emit_qc(out))
    n = circ.num_qubits
    return StatsRecord(path, dest, cfg.mode, n, pre_c.as_dict(), post_c.as_dict(),
                       _cost(pre_c, n), _cost(post_c, n), runtime, timeout, lcr_sizes, tallies)


def cmd_optimize(args) -> int:
    try:
        cfg = _config(args)
        if cfg.mode == "heavy":
            cfg.rule_library()  # load and certify once, before the workers start
    except (OSError, ParseError, RuleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if len(args.inputs) > 1 and args.output and not os.path.isdir(args.output):
        print("error: -o must be a directory when optimizing several files", file=sys.stderr)
        return EXIT_INPUT
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = [pool.submit(_optimize_one, args, cfg, p) for p in args.inputs]
        records = []
        code = EXIT_OK
        for p, f in zip(args.inputs, futures):
            try:
                records.append(f.result())
            except (OSError, ParseError, ValueError, KeyError) as exc:
                print(f"error: {p}: {exc}", file=sys.stderr)
                code = max(code, EXIT_INPUT)
            except (InvariantError, VerificationError, LcrFailure) as exc:
                print(f"error: {p}: {exc}", file=sys.stderr)
                code = EXIT_INVARIANT
    if not records:
        return code
    payload = [json.loads(r.to_json()) for r in records]
    text = json.dumps(payload[0] if len(payload) == 1 else payload, indent=2, sort_keys=True)
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


def _gen(args) -> Circuit:
    fam = args.family
    if fam == "qft":
        return benchgen.gen_qft(args.n, args.cutoff)
    if fam == "qfa":
        return benchgen.gen_qfa(args.n, args.cutoff)
    if fam == "toffoli-nc":
        return benchgen.gen_toffoli_nc(args.k)
    if fam == "toffoli-barenco":
        return benchgen.gen_toffoli_barenco(args.k)
    spec = benchgen.PfSpec(args.n, args.order, args.steps, args.time, args.seed)
    return benchgen.pf_circuit(spec)


def cmd_generate(args) -> int:
    try:
        circ = _gen(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = emit_qc(circ)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        a, b = read_circuit(args.first), read_circuit(args.second)
        res = equivalent_up_to_phase(a, b, args.tol)
    except (OSError, ParseError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({"equivalent": res.equal, "max_deviation": res.deviation}))
    return EXIT_OK if res else EXIT_INEQUIVALENT


def cmd_cost(args) -> int:
    try:
        circ = read_circuit(args.file)
        c = counts(circ)
    except (OSError, ParseError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = c.as_dict()
    out["num_qubits"] = circ.num_qubits
    out["aggregate_cost"] = round(_cost(c, circ.num_qubits), 6)
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcopt", description="Optimize {NOT, CNOT, H, Rz, Toffoli} circuits.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("optimize", help="optimize one or more circuit files")
    o.add_argument("inputs", nargs="+")
    o.add_argument("-o", "--output", help="output file, or directory for several inputs")
    o.add_argument("--mode", choices=("light", "heavy", "light-qfa"), default="light")
    o.add_argument("--rules", help="rewrite-rule library (default: shipped seed rules)")
    o.add_argument("--timeout-factor", type=float, default=200.0)
    o.add_argument("--max-commute-window", type=int, default=-1)
    o.add_argument("--max-region-gates", type=int, default=None)
    o.add_argument("--stats", help="write the JSON stats record here instead of stdout")
    o.add_argument("--lcr", type=int, default=0, metavar="T", help="treat input as a block repeated T times")
    o.add_argument("--jobs", type=int, default=1)
    o.add_argument("--verify", action="store_true", help="check the output against the input")
    o.add_argument("--tol", type=float, default=1e-8)
    o.add_argument("--backend", choices=("python", "cython"), default=None)
    o.set_defaults(func=cmd_optimize)

    g = sub.add_parser("gen", help="generate a benchmark circuit")
    g.add_argument("family", choices=benchgen.FAMILIES)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--cutoff", type=int, default=benchgen.DEFAULT_CUTOFF)
    g.add_argument("--order", type=int, default=2)
    g.add_argument("--steps", type=int, default=1)
    g.add_argument("--time", type=float, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check two circuits for equivalence up to global phase")
    v.add_argument("first")
    v.add_argument("second")
    v.add_argument("--tol", type=float, default=1e-8)
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cost", help="print gate counts and aggregate cost")
    c.add_argument("file")
    c.set_defaults(func=cmd_cost)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
