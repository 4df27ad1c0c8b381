import math

import numpy as np
import pytest
from hypothesis import strategies as st

from qcopt.circuit import CNOT, H, NOT, RZ, TOFFOLI, Circuit

ANGLES = [math.pi / 4, -math.pi / 4, math.pi / 2, -math.pi / 2, math.pi, 3 * math.pi / 4]


def random_circuit(rng: np.random.Generator, n: int, g: int, *, toffoli: bool = False,
                   generic: bool = True) -> Circuit:
    """Random netlist over {NOT, CNOT, H, Rz} (optionally Toffoli)."""
    kinds = ["not", "h", "rz", "cnot", "cnot"]
    if toffoli and n >= 3:
        kinds.append("tof")
    gates = []
    for _ in range(g):
        k = kinds[rng.integers(len(kinds))]
        if n < 2 and k in ("cnot", "tof"):
            k = "rz"
        if k == "not":
            gates.append(NOT(int(rng.integers(n))))
        elif k == "h":
            gates.append(H(int(rng.integers(n))))
        elif k == "rz":
            if generic and rng.random() < 0.3:
                th = float(rng.uniform(-math.pi, math.pi))
            else:
                th = ANGLES[rng.integers(len(ANGLES))]
            gates.append(RZ(int(rng.integers(n)), th))
        elif k == "cnot":
            c, t = rng.choice(n, 2, replace=False)
            gates.append(CNOT(int(c), int(t)))
        else:
            a, b, t = rng.choice(n, 3, replace=False)
            na, nb = rng.random() < 0.2, rng.random() < 0.2
            gates.append(TOFFOLI(int(a), int(b), int(t), na, nb))
    return Circuit(n, gates)


@st.composite
def circuits(draw, max_qubits: int = 4, max_gates: int = 40, toffoli: bool = False):
    n = draw(st.integers(2 if not toffoli else 3, max_qubits))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    g = draw(st.integers(0, max_gates))
    return random_circuit(np.random.default_rng(seed), n, g, toffoli=toffoli)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["python", "cython"])
def backend(request):
    from qcopt import kernels

    if request.param == "cython":
        try:
            kernels.get_backend("cython")
        except ImportError:
            pytest.skip("compiled kernels not built")
    return request.param


# -- acceptance summary -------------------------------------------------------

_RESULTS: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, label): acceptance criterion number and label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    num, label = m.args
    if rep.when == "setup" and rep.skipped:
        _RESULTS[num] = ("SKIP", label)
    elif rep.when == "call":
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        prev = _RESULTS.get(num)
        if prev is None or prev[0] == "PASS" or status == "FAIL":
            _RESULTS[num] = (status, label)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        status, label = _RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status:4s}  {label}")
