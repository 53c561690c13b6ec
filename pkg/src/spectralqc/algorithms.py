"""Grover search, approximate counting, Bernstein-Vazirani and Hogg's SAT
heuristic: pulse programs, gate-level reference states and expected readouts.

Work labels are written qubit 1 first. SAT truth assignments use ``Vi``
true when qubit i is 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import compiler
from .engine import spin_rotation
from .compiler import (HADAMARD, CompileError, CompiledGate, format_formula, oracle_matrix,
                       parse_formula)
from .spins import SpinSystem, label


@dataclass(frozen=True)
class ExpectedReadout:
    """Observer lines expected after a computation, with normalized weights."""

    intensities: tuple[tuple[str, float], ...]

    def __post_init__(self):
        items = tuple(sorted((k, float(v)) for k, v in dict(self.intensities).items() if v > 0))
        if not items:
            raise ValueError("expected readout needs at least one line")
        total = sum(v for _, v in items)
        object.__setattr__(self, "intensities", tuple((k, v / total) for k, v in items))

    @property
    def lines(self) -> frozenset[str]:
        return frozenset(k for k, _ in self.intensities)

    @property
    def relative_intensities(self) -> dict[str, float]:
        return dict(self.intensities)

    @classmethod
    def from_state(cls, amplitudes, width: int, tol: float = 1e-9) -> "ExpectedReadout":
        p = np.abs(np.asarray(amplitudes)) ** 2
        return cls(tuple((label(i, width), v) for i, v in enumerate(p) if v > tol))


@dataclass(frozen=True)
class Algorithm:
    """A runnable algorithm instance."""

    name: str
    parameter: str
    gate: CompiledGate
    ideal_state: np.ndarray
    expected: ExpectedReadout
    circuit: str

    @property
    def program(self):
        return self.gate.program

    @property
    def title(self) -> str:
        return f"{self.name} {self.parameter}"


def _basis(width: int, index: int = 0) -> np.ndarray:
    v = np.zeros(2**width, dtype=complex)
    v[index] = 1
    return v


def _kron(*mats):
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def _hadamards(width: int) -> np.ndarray:
    return _kron(*[HADAMARD] * width)


def _need_work(sys: SpinSystem, width: int, what: str):
    if sys.n_work != width:
        raise CompileError(f"{what} needs {width} work qubits; molecule has {sys.n_work}")


def _build(name, parameter, circuit, sys, ideal_state, expected) -> Algorithm:
    gate = compiler.compile_circuit(circuit, sys, label=f"{name} {parameter}")
    return Algorithm(name, parameter, gate, ideal_state, expected, circuit)


# --- Grover -------------------------------------------------------------------

def grover_oracle(x: str) -> np.ndarray:
    return np.diag([-1 if label(i, 2) == x else 1 for i in range(4)]).astype(complex)


def grover_state(x: str) -> np.ndarray:
    """One iteration ``H U00 H U_x H |00>``."""
    H2 = _hadamards(2)
    return H2 @ grover_oracle("00") @ H2 @ grover_oracle(x) @ H2 @ _basis(2)


def grover_program(x: str, sys: SpinSystem) -> Algorithm:
    if x not in ("00", "01", "10", "11"):
        raise CompileError(f"Grover target must be a 2-bit label, got {x!r}")
    _need_work(sys, 2, "Grover search")
    circuit = f"H 1 2\nU{x}\nH 1 2\nU00\nH 1 2\n"
    return _build("grover", x, circuit, sys, grover_state(x), ExpectedReadout(((x, 1.0),)))


# --- approximate counting ------------------------------------------------------

# Output states of the counting run, unnormalized, qubit 1 first.
COUNTING_TABLE = {
    "f00": {"00": 1},
    "f01": {"00": 1, "01": -1, "10": 1, "11": 1},
    "f10": {"00": 1, "01": 1, "10": 1, "11": -1},
    "f11": {"10": 1},
}
COUNTS = {"f00": 0, "f01": 1, "f10": 1, "f11": 2}


def counting_state(f: str) -> np.ndarray:
    """Gate-level counting run with one controlled-G application.

    Qubit 1 is the control, qubit 2 the target. The conditional Grover
    iterate reduces to ``h(2) U10 h^-1(2)`` after the oracle.
    """
    h = spin_rotation(math.pi / 2, "y")
    H2 = _hadamards(2)
    I = np.eye(2)
    g = np.kron(I, h) @ grover_oracle("10") @ np.kron(I, h.conj().T)
    return H2 @ g @ oracle_matrix(f) @ H2 @ _basis(2)


def table_state(entries: dict[str, complex], width: int) -> np.ndarray:
    v = np.zeros(2**width, dtype=complex)
    for lab, amp in entries.items():
        v[int(lab, 2)] = amp
    return v / np.linalg.norm(v)


def counting_program(f: str, sys: SpinSystem) -> Algorithm:
    if f not in COUNTING_TABLE:
        raise CompileError(f"unsupported counting oracle {f!r}; expected one of {sorted(COUNTING_TABLE)}")
    _need_work(sys, 2, "approximate counting")
    circuit = f"H 1 2\nUf {f}\nhminus 2\nU10\nhplus 2\nH 1 2\n"
    expected = ExpectedReadout.from_state(table_state(COUNTING_TABLE[f], 2), 2)
    return _build("count", f, circuit, sys, counting_state(f), expected)


def count_phase(k: int, n_states: int = 2) -> float:
    """``phi_k`` with ``sin(phi_k / 2) = sqrt(k / N)``; the oracle acts on one
    bit, so ``N = 2``."""
    return 2 * math.asin(math.sqrt(k / n_states))


# --- Bernstein-Vazirani --------------------------------------------------------

def bv_oracle(a: str) -> np.ndarray:
    sz = np.diag([1, -1]).astype(complex)
    return _kron(*[sz if bit == "1" else np.eye(2) for bit in a])


def bv_state(a: str) -> np.ndarray:
    Hn = _hadamards(len(a))
    return Hn @ bv_oracle(a) @ Hn @ _basis(len(a))


def bv_program(a: str, sys: SpinSystem) -> Algorithm:
    if not a or set(a) - {"0", "1"}:
        raise CompileError(f"BV string must be a bit string, got {a!r}")
    if len(a) != sys.n_work:
        raise CompileError(f"BV string {a!r} has {len(a)} bits; molecule has {sys.n_work} work qubits")
    qubits = " ".join(str(q) for q in range(1, len(a) + 1))
    ones = [str(q) for q, bit in enumerate(a, start=1) if bit == "1"]
    circuit = f"H {qubits}\n" + (f"Zpi {' '.join(ones)}\n" if ones else "") + f"H {qubits}\n"
    return _build("bv", a, circuit, sys, bv_state(a), ExpectedReadout(((a, 1.0),)))


# --- Hogg ---------------------------------------------------------------------

def hamming_distance(r: str, s: str) -> int:
    """Number of differing positions, ``|r| + |s| - 2|r and s|``."""
    if len(r) != len(s):
        raise ValueError(f"labels {r!r} and {s!r} differ in length")
    a, b = int(r, 2), int(s, 2)
    return bin(a).count("1") + bin(b).count("1") - 2 * bin(a & b).count("1")


def conflicts(assignment: str, clauses) -> int:
    """Clauses violated by ``assignment`` (qubit 1 first)."""
    return sum(1 for q, v in clauses if int(assignment[q - 1]) != v)


def hogg_phase(c: int, m: int) -> complex:
    if m % 2:
        return 1j**c
    return math.sqrt(2) * math.cos((2 * c - 1) * math.pi / 4)


def hogg_mixing(n: int, m: int) -> np.ndarray:
    """Mixing matrix ``U_rs`` as a function of Hamming distance."""
    u = np.empty((2**n, 2**n), dtype=complex)
    for r, s in itertools.product(range(2**n), repeat=2):
        d = hamming_distance(label(r, n), label(s, n))
        if m % 2:
            u[r, s] = 2 ** (-n / 2) * np.exp(1j * math.pi * (n - m) / 4) * (-1j) ** d
        else:
            u[r, s] = 2 ** (-(n - 1) / 2) * math.cos((n - m + 1 - 2 * d) * math.pi / 4)
    return u


def hogg_gamma(n: int, m: int) -> np.ndarray:
    """Diagonal of the Walsh-transformed mixing operator, indexed by weight."""
    g = []
    for r in range(2**n):
        h = bin(r).count("1")
        if m % 2:
            g.append(1j**h * np.exp(-1j * math.pi * m / 4))
        else:
            g.append(math.sqrt(2) * math.cos((m - 2 * h - 1) * math.pi / 4))
    return np.diag(g)


def hogg_state(clauses, n: int = 3) -> np.ndarray:
    """``U R H |0..0>``; works for any clause count m >= 1."""
    m = len(clauses)
    R = np.diag([hogg_phase(conflicts(label(s, n), clauses), m) for s in range(2**n)])
    return hogg_mixing(n, m) @ R @ _hadamards(n) @ _basis(n)


# Final states as printed with qubit 1 rightmost.
_HOGG_TABLE_RTL = {
    "V1": ("001", "011", "101", "111"),
    "~V1": ("000", "010", "100", "110"),
    "V2": ("010", "011", "110", "111"),
    "~V2": ("000", "001", "100", "101"),
    "V3": ("100", "101", "110", "111"),
    "~V3": ("000", "001", "010", "011"),
    "V3&V2&V1": ("111",),
    "V3&V2&~V1": ("110",),
    "V3&~V2&V1": ("101",),
    "V3&~V2&~V1": ("100",),
    "~V3&V2&V1": ("011",),
    "~V3&V2&~V1": ("010",),
    "~V3&~V2&V1": ("001",),
    "~V3&~V2&~V1": ("000",),
}
HOGG_FORMULAE = tuple(_HOGG_TABLE_RTL)


def hogg_table_lines(formula: str) -> frozenset[str]:
    """Final-state labels for a listed formula, converted to qubit-1-first."""
    key = format_formula(parse_formula(formula))
    if key not in _HOGG_TABLE_RTL:
        raise CompileError(f"formula {formula!r} is not one of the m=1 or m=3 instances")
    return frozenset(s[::-1] for s in _HOGG_TABLE_RTL[key])


def hogg_program(formula: str, sys: SpinSystem) -> Algorithm:
    lines = hogg_table_lines(formula)
    _need_work(sys, 3, "Hogg's algorithm")
    clauses = parse_formula(formula)
    key = format_formula(clauses)
    # The reduced sequence already contains the initial Hadamards.
    circuit = f"hogg {key}\n"
    expected = ExpectedReadout(tuple((s, 1.0) for s in lines))
    return _build("hogg", key, circuit, sys, hogg_state(clauses), expected)


# --- registry -----------------------------------------------------------------

BUILDERS = {"grover": grover_program, "count": counting_program,
            "bv": bv_program, "hogg": hogg_program}

CASES = {
    "grover": ("00", "01", "10", "11"),
    "count": tuple(COUNTING_TABLE),
    "bv2": tuple(label(i, 2) for i in range(4)),
    "bv3": tuple(label(i, 3) for i in range(8)),
    "hogg": HOGG_FORMULAE,
}


def build(name: str, parameter: str, sys: SpinSystem) -> Algorithm:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise CompileError(f"unknown algorithm {name!r}; choose from {sorted(BUILDERS)}") from None
    return builder(parameter, sys)
