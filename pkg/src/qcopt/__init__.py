"""Optimizer for quantum circuits over {NOT, CNOT, H, Rz}, with Toffoli inputs."""
from .circuit import (
    Angle, Block, BlockCall, Circuit, Gate, GateCounts, GateKind, RzClass,
    aggregate_cost, classify_rz, counts, expand_blocks, normalize_angle,
)
from .kernels import BACKEND
from .pipeline import Config, OptimizationReport, lcr_optimize, optimize
from .qcio import emit_qc, parse_qc, parse_quipper
from .verify import equivalent_up_to_phase

__version__ = "0.1.0"

__all__ = [
    "Angle", "BACKEND", "Block", "BlockCall", "Circuit", "Config", "Gate", "GateCounts", "GateKind",
    "OptimizationReport", "RzClass", "aggregate_cost", "classify_rz", "counts", "emit_qc",
    "equivalent_up_to_phase", "expand_blocks", "lcr_optimize", "normalize_angle", "optimize",
    "parse_qc", "parse_quipper",
]
