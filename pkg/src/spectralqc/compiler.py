"""Gate-to-pulse lowering for the work register.

Gates are reduced to *layers*: a map ``qubit -> (angle, axis)`` of
simultaneous single-qubit rotations. A layer is then lowered to hard
pulses. On the two homonuclear work qubits (1 and 2, with offsets
``+nu`` and ``-nu`` about a shared transmitter) qubit-selective rotations
are built from hard pulses and Zeeman-evolution delays (jump and return);
every other work qubit is addressed directly.

Circuit text format, one gate per line::

    H 1 2          Hadamard on qubits 1 and 2
    U01            controlled phase, -1 on work label 01
    Zpi 1 3        pi z-rotation on each listed qubit
    Rz 1 pi/2      z-rotation by an angle
    hplus 2        (pi/2)_y on one qubit; hminus is its inverse
    Uf f01         counting oracle
    hogg V3&~V2&V1 reduced SAT sequence
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import engine
from .program import Delay, Gradient, HardPulse, PulseProgram, evaluate, format_angle, pi_fraction
from .spins import SpinSystem

TWO_PI = 2 * math.pi
PAIR_TOL_HZ = 1e-6

_NEG = {"x": "-x", "-x": "x", "y": "-y", "-y": "y", "z": "-z", "-z": "z"}
# Phase b of the outer pulses in [(pi/2)_b, delay, (pi/2)_-b] that carries z onto each axis.
_JUMP_PHASE = {"x": "-y", "-x": "y", "y": "x", "-y": "-x"}

PHASE_CONVENTION = "equal up to a global phase in each observer block"


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class GateSpec:
    """One abstract gate on work qubits.

    ``kind`` is one of ``hadamard``, ``pseudo_hadamard``, ``phase``,
    ``zrot``, ``pauli_z``, ``oracle``, ``hogg``.
    """

    kind: str
    targets: tuple[int, ...] = ()
    pattern: str = ""
    angle: float = 0.0
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if 0 in self.targets:
            raise CompileError(f"{self.kind} gate targets the observer qubit 0")

    def to_text(self) -> str:
        t = " ".join(str(q) for q in self.targets)
        if self.kind == "hadamard":
            return f"H {t}"
        if self.kind == "pseudo_hadamard":
            return f"{'hplus' if self.sign > 0 else 'hminus'} {t}"
        if self.kind == "phase":
            return f"U{self.pattern}"
        if self.kind == "zrot":
            return f"Rz {t} {format_angle(self.angle)}"
        if self.kind == "pauli_z":
            return f"Zpi {t}"
        if self.kind == "oracle":
            return f"Uf {self.pattern}"
        return f"hogg {self.pattern}"


@dataclass(frozen=True)
class CompiledGate:
    program: PulseProgram
    ideal_unitary: np.ndarray
    phase_convention: str = PHASE_CONVENTION
    label: str = ""

    def then(self, other: "CompiledGate") -> "CompiledGate":
        label = " ; ".join(x for x in (self.label, other.label) if x)
        program = (self.program + other.program).relabel(label)
        return CompiledGate(program, other.ideal_unitary @ self.ideal_unitary,
                            self.phase_convention, label)


# --- target machine ----------------------------------------------------------

@dataclass(frozen=True)
class _Target:
    n_qubits: int
    pair: tuple[int, int] | None  # (positive-offset proton, partner)
    nu: float
    pair_error: str | None = None
    symbols: dict = field(default_factory=dict)


def program_symbols(sys: SpinSystem) -> dict[str, float]:
    """Names usable in delay expressions of programs compiled for ``sys``."""
    out = {}
    if sys.n_qubits >= 3:
        out["nu"] = abs(sys.offsets[1])
        out["J12"] = sys.coupling(1, 2)
    return out


def _target(sys: SpinSystem) -> _Target:
    symbols = program_symbols(sys)
    if sys.n_qubits < 3:
        return _Target(sys.n_qubits, None, 0.0, symbols=symbols)
    nu1, nu2 = sys.offsets[1], sys.offsets[2]
    if nu1 == 0 and nu2 == 0:
        return _Target(sys.n_qubits, None, 0.0, symbols=symbols)
    err = None
    if abs(nu1 + nu2) > PAIR_TOL_HZ:
        err = (f"jump-and-return needs nu_1 = -nu_2 (got {nu1} and {nu2} Hz); "
               "set the proton transmitter at the centre of the pair")
    pair = (1, 2) if nu1 > 0 else (2, 1)
    return _Target(sys.n_qubits, pair, abs(nu1), err, symbols)


def _norm(angle: float, axis: str):
    """Map to ``(angle, axis)`` with angle in (0, 2pi], or None for identity."""
    if angle < 0:
        angle, axis = -angle, _NEG[axis]
    angle = math.fmod(angle, TWO_PI)
    if math.isclose(angle, 0.0, abs_tol=1e-12) or math.isclose(angle, TWO_PI, abs_tol=1e-12):
        return None
    return angle, axis


def _hard(targets, angle, axis) -> list:
    """A collective rotation; z axes go through the composite identity."""
    if axis in ("z", "-z"):
        return composite_z(targets, angle if axis == "z" else -angle)
    return [HardPulse(tuple(targets), angle, axis)]


def composite_z(targets, angle: float) -> list:
    """``R_z(angle)`` on ``targets`` as ``(pi/2)_-y (angle)_-x (pi/2)_y``."""
    r = _norm(angle, "z")
    if r is None:
        return []
    angle, axis = r
    middle = "x" if math.isclose(angle, math.pi) or axis == "-z" else "-x"
    t = tuple(targets)
    return [HardPulse(t, math.pi / 2, "-y"), HardPulse(t, angle, middle),
            HardPulse(t, math.pi / 2, "y")]


def _zeeman_delay(tg: _Target, phi: float) -> Delay:
    frac = pi_fraction(phi)
    if frac is not None:
        p, q = frac
        return Delay.from_expr(f"{p}/({2 * q}*nu)", tg.symbols, "zeeman")
    return Delay(phi / (TWO_PI * tg.nu), "zeeman")


def split(tg: _Target, axis: str, phi: float) -> list:
    """Rotate the positive-offset proton by ``phi`` about ``axis`` and its
    partner by ``phi`` about the opposite axis."""
    if tg.pair_error:
        raise CompileError(tg.pair_error)
    p, o = tg.pair
    r = _norm(phi, axis)
    if r is None:
        return []
    phi, axis = r
    if phi > math.pi:
        # A shorter delay gives the same rotation with the axes exchanged.
        phi, axis = TWO_PI - phi, _NEG[axis]
    both = tuple(sorted(tg.pair))
    delay = _zeeman_delay(tg, phi)
    if axis == "z":
        return [delay]
    if axis == "-z":
        return [HardPulse(both, math.pi, "x"), delay, HardPulse(both, math.pi, "x")]
    b = _JUMP_PHASE[axis]
    return [HardPulse(both, math.pi / 2, b), delay, HardPulse(both, math.pi / 2, _NEG[b])]


def selective(tg: _Target, qubit: int, angle: float, axis: str) -> list:
    """Rotation of one qubit only."""
    if tg.pair is None or qubit not in tg.pair:
        return _hard((qubit,), angle, axis)
    p, _ = tg.pair
    c = axis if qubit == p else _NEG[axis]
    return split(tg, c, angle / 2) + _hard(tuple(sorted(tg.pair)), angle / 2, axis)


def lower_layer(tg: _Target, layer: dict) -> list:
    """Lower simultaneous single-qubit rotations to pulse events."""
    rots = {}
    for q, (angle, axis) in layer.items():
        if not 1 <= q < tg.n_qubits:
            raise CompileError(f"qubit {q} is not a work qubit of a {tg.n_qubits}-qubit system")
        r = _norm(angle, axis)
        if r is not None:
            rots[q] = r
    chunks = []  # (first qubit, events)
    if tg.pair is not None and all(q in rots for q in tg.pair):
        p, o = tg.pair
        (ap, xp), (ao, xo) = rots[p], rots[o]
        if (ap, xp) != (ao, xo):
            del rots[p], rots[o]
            if math.isclose(ap, ao) and xo == _NEG[xp]:
                chunks.append((min(p, o), split(tg, xp, ap)))
            else:
                for q, (a, x) in sorted({p: (ap, xp), o: (ao, xo)}.items()):
                    chunks.append((q, selective(tg, q, a, x)))
    groups = {}
    for q, r in rots.items():
        groups.setdefault(r, []).append(q)
    for (a, x), qs in groups.items():
        qs = sorted(qs)
        if tg.pair is not None and any(q in tg.pair for q in qs) and not set(tg.pair) <= set(qs):
            # One proton alone needs the selective construction.
            q = next(q for q in qs if q in tg.pair)
            chunks.append((q, selective(tg, q, a, x)))
            rest = [k for k in qs if k != q]
            if rest:
                chunks.append((rest[0], _hard(rest, a, x)))
        else:
            chunks.append((qs[0], _hard(qs, a, x)))
    chunks.sort(key=lambda c: c[0])
    return [e for _, events in chunks for e in events]


def simplify(events: list) -> list:
    """Merge or cancel neighbouring hard pulses on the same targets and axis line."""
    out = []
    for e in events:
        prev = out[-1] if out else None
        if (isinstance(e, HardPulse) and isinstance(prev, HardPulse)
                and prev.targets == e.targets and e.phase in (prev.phase, _NEG[prev.phase])):
            total = prev.angle + (e.angle if e.phase == prev.phase else -e.angle)
            out.pop()
            r = _norm(total, prev.phase)
            if r is not None:
                out.append(HardPulse(e.targets, *r))
            continue
        out.append(e)
    return out


# --- ideal matrices ----------------------------------------------------------

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def layer_unitary(n_qubits: int, layer: dict) -> np.ndarray:
    """Ideal work-register matrix of a layer (work qubits 1..n-1)."""
    mats = [engine.spin_rotation(*layer[q]) if q in layer else np.eye(2)
            for q in range(1, n_qubits)]
    return reduce(np.kron, mats)


def single_qubit_unitary(n_qubits: int, gates: dict) -> np.ndarray:
    mats = [gates.get(q, np.eye(2)) for q in range(1, n_qubits)]
    return reduce(np.kron, mats)


def _finish(tg: _Target, events: list, ideal: np.ndarray, label: str,
            allow_empty: bool = False) -> CompiledGate:
    events = simplify(events)
    if not events and not allow_empty:
        raise CompileError(f"{label} compiled to an empty program")
    return CompiledGate(PulseProgram(tuple(events), label, identity_ok=True), ideal, label=label)


def _check_targets(tg: _Target, targets) -> tuple[int, ...]:
    targets = tuple(sorted(set(int(t) for t in targets)))
    if not targets:
        raise CompileError("gate needs at least one target")
    if 0 in targets:
        raise CompileError("the observer qubit 0 cannot be a gate target")
    bad = [t for t in targets if t >= tg.n_qubits]
    if bad:
        raise CompileError(f"targets {bad} outside work qubits 1..{tg.n_qubits - 1}")
    return targets


# --- gates -------------------------------------------------------------------

def compile_hadamard(targets, sys: SpinSystem) -> CompiledGate:
    """Hadamard on each target as ``(pi/2)_y`` followed by ``(pi)_x``."""
    tg = _target(sys)
    targets = _check_targets(tg, targets)
    events = (lower_layer(tg, {q: (math.pi / 2, "y") for q in targets})
              + lower_layer(tg, {q: (math.pi, "x") for q in targets}))
    ideal = single_qubit_unitary(tg.n_qubits, {q: HADAMARD for q in targets})
    return _finish(tg, events, ideal, "H " + " ".join(map(str, targets)))


def compile_pseudo_hadamard(target: int, sign: int, sys: SpinSystem) -> CompiledGate:
    """``h = (pi/2)_y`` for sign +1, ``h^-1 = (pi/2)_-y`` for sign -1."""
    tg = _target(sys)
    (target,) = _check_targets(tg, [target])
    if sign not in (1, -1):
        raise CompileError(f"pseudo-Hadamard sign must be +1 or -1, got {sign}")
    layer = {target: (math.pi / 2, "y" if sign > 0 else "-y")}
    name = "hplus" if sign > 0 else "hminus"
    return _finish(tg, lower_layer(tg, layer), layer_unitary(tg.n_qubits, layer),
                   f"{name} {target}")


def echo(tg: _Target, sys: SpinSystem) -> list:
    """``[(tau/2) (pi)_x (tau/2) (pi)_x]`` on qubits 1,2 with ``tau = 1/(2 J12)``."""
    J = sys.coupling(1, 2)
    if J == 0:
        raise CompileError("phase gates need J12 != 0 for the spin echo")
    if J < 0:
        raise CompileError(f"phase gates assume J12 > 0, got {J} Hz")
    half = Delay.from_expr("1/(4*J12)", tg.symbols)
    flip = HardPulse((1, 2), math.pi, "x")
    return [half, flip, half, flip]


def compile_phase_gate(pattern: str, sys: SpinSystem) -> CompiledGate:
    """Controlled phase ``1 - 2|pattern><pattern|`` on work qubits 1, 2."""
    if sys.n_qubits < 3:
        raise CompileError("phase gates need two work qubits")
    if pattern not in ("00", "01", "10", "11"):
        raise CompileError(f"phase-gate pattern must be a 2-bit label, got {pattern!r}")
    tg = _target(sys)
    # The echo gives exp(-i pi Iz1 Iz2). A +pi/2 z-rotation on a qubit whose
    # partner's pattern bit is 0 (-pi/2 when it is 1) puts the sign on `pattern`.
    layer = {1: (math.pi / 2, "z" if pattern[1] == "0" else "-z"),
             2: (math.pi / 2, "z" if pattern[0] == "0" else "-z")}
    zpart = _composite_layer(tg, layer)
    pair = np.diag([-1 if i == int(pattern, 2) else 1 for i in range(4)]).astype(complex)
    ideal = np.kron(pair, np.eye(2 ** (sys.n_work - 2)))
    return _finish(tg, echo(tg, sys) + zpart, ideal, f"U{pattern}")


def _composite_layer(tg: _Target, layer: dict) -> list:
    """z rotations on 1,2 as ``(pi/2)_-y [transverse layer] (pi/2)_y``.

    Conjugation by the outer pulses carries ``-x`` onto ``z``, so each
    z rotation becomes a rotation about ``-x`` in between.
    """
    qs = tuple(sorted(layer))
    inner = {q: (a, "-x" if ax == "z" else "x") for q, (a, ax) in layer.items()}
    return ([HardPulse(qs, math.pi / 2, "-y")] + lower_layer(tg, inner)
            + [HardPulse(qs, math.pi / 2, "y")])


def compile_z_rotation(target: int, angle: float, sys: SpinSystem) -> CompiledGate:
    """``exp(-i angle Iz)`` on a single work qubit."""
    tg = _target(sys)
    (target,) = _check_targets(tg, [target])
    layer = {target: (float(angle), "z")}
    # A full turn is a global phase and lowers to nothing.
    return _finish(tg, lower_layer(tg, layer), layer_unitary(tg.n_qubits, layer),
                   f"Rz {target} {format_angle(angle)}", allow_empty=True)


def compile_pauli_z_string(targets, sys: SpinSystem) -> CompiledGate:
    """Product of ``sigma_z`` on every target, realized as pi z-rotations."""
    tg = _target(sys)
    targets = _check_targets(tg, targets)
    layer = {q: (math.pi, "z") for q in targets}
    sz = np.diag([1, -1]).astype(complex)
    ideal = single_qubit_unitary(tg.n_qubits, {q: sz for q in targets})
    return _finish(tg, lower_layer(tg, layer), ideal, "Zpi " + " ".join(map(str, targets)))


ORACLES = ("f00", "f01", "f10", "f11")


def oracle_matrix(f: str) -> np.ndarray:
    """Counting oracle on two work qubits; ``f_ab`` has f(0)=a, f(1)=b."""
    if f not in ORACLES:
        raise CompileError(f"unknown counting oracle {f!r}; expected one of {ORACLES}")
    diag = {"f00": [1, 1, -1, -1], "f01": [1, 1, -1, 1],
            "f10": [1, 1, 1, -1], "f11": [1, 1, 1, 1]}[f]
    return np.diag(diag).astype(complex)


def compile_oracle(f: str, sys: SpinSystem) -> CompiledGate:
    oracle_matrix(f)
    if f == "f00":
        gate = compile_pauli_z_string([1], sys)
    elif f == "f01":
        gate = compile_phase_gate("10", sys)
    elif f == "f10":
        gate = compile_phase_gate("11", sys)
    else:
        d = 2**sys.n_work
        return CompiledGate(PulseProgram.identity(f"Uf {f}"), np.eye(d, dtype=complex),
                            label=f"Uf {f}")
    return CompiledGate(gate.program.relabel(f"Uf {f}"), gate.ideal_unitary, label=f"Uf {f}")


# --- SAT formulas -------------------------------------------------------------

_LITERAL = re.compile(r"^(~?)V(\d+)$")


def parse_formula(text: str) -> tuple[tuple[int, int], ...]:
    """``"V3&~V2&V1"`` -> ``((1, 1), (2, 0), (3, 1))``: (qubit, required bit).

    A literal ``Vi`` holds when qubit i is 1; ``~Vi`` when it is 0.
    """
    clauses = {}
    for part in text.replace(" ", "").replace("∧", "&").split("&"):
        m = _LITERAL.match(part)
        if not m:
            raise CompileError(f"cannot parse literal {part!r} in formula {text!r}")
        q = int(m.group(2))
        if q in clauses:
            raise CompileError(f"variable V{q} appears twice in {text!r}")
        clauses[q] = 0 if m.group(1) else 1
    return tuple(sorted(clauses.items()))


def format_formula(clauses) -> str:
    return "&".join(("" if v else "~") + f"V{q}" for q, v in sorted(clauses, reverse=True))


def hogg_layers(clauses, n_work: int = 3) -> list[dict]:
    """Reduced rotation layers for 1-SAT (m=1) and 3-SAT (m=3) on 3 bits."""
    m = len(clauses)
    qubits = range(1, n_work + 1)
    if any(q not in qubits for q, _ in clauses):
        raise CompileError(f"formula uses variables outside V1..V{n_work}")
    if m == 1:
        (q, v), = clauses
        layer = {k: (math.pi / 2, "y") for k in qubits if k != q}
        if v:
            layer[q] = (math.pi, "x")
        return [layer]
    if m == n_work == 3:
        first = {q: (math.pi / 2, "x" if v else "-x") for q, v in clauses}
        return [first, {q: (math.pi / 2, "-y") for q in qubits},
                {q: (math.pi / 2, "x") for q in qubits}]
    raise CompileError(f"no reduced pulse sequence for m={m}; only m=1 and m=3 are built")


def compile_hogg(formula, sys: SpinSystem) -> CompiledGate:
    clauses = parse_formula(formula) if isinstance(formula, str) else tuple(formula)
    if sys.n_work != 3:
        raise CompileError("the SAT sequences need three work qubits")
    tg = _target(sys)
    events, ideal = [], np.eye(2**sys.n_work, dtype=complex)
    for layer in hogg_layers(clauses):
        events += lower_layer(tg, layer)
        ideal = layer_unitary(sys.n_qubits, layer) @ ideal
    return _finish(tg, events, ideal, f"hogg {format_formula(clauses)}")


# --- circuits -----------------------------------------------------------------

def compile_gate(spec: GateSpec, sys: SpinSystem) -> CompiledGate:
    if spec.kind == "hadamard":
        return compile_hadamard(spec.targets, sys)
    if spec.kind == "pseudo_hadamard":
        return compile_pseudo_hadamard(spec.targets[0], spec.sign, sys)
    if spec.kind == "phase":
        return compile_phase_gate(spec.pattern, sys)
    if spec.kind == "zrot":
        return compile_z_rotation(spec.targets[0], spec.angle, sys)
    if spec.kind == "pauli_z":
        return compile_pauli_z_string(spec.targets, sys)
    if spec.kind == "oracle":
        return compile_oracle(spec.pattern, sys)
    if spec.kind == "hogg":
        return compile_hogg(spec.pattern, sys)
    raise CompileError(f"unknown gate kind {spec.kind!r}")


def parse_gate(line: str) -> GateSpec:
    head, *args = line.split(maxsplit=1)
    rest = args[0].split() if args else []
    try:
        if head in ("H", "Zpi") and not rest:
            raise CompileError(f"{head} needs at least one target qubit: {line!r}")
        if head == "H":
            return GateSpec("hadamard", tuple(map(int, rest)))
        if head in ("hplus", "hminus"):
            return GateSpec("pseudo_hadamard", (int(rest[0]),), sign=1 if head == "hplus" else -1)
        if re.fullmatch(r"U[01]{2}", head) and not rest:
            return GateSpec("phase", pattern=head[1:])
        if head == "Zpi":
            return GateSpec("pauli_z", tuple(map(int, rest)))
        if head == "Rz":
            return GateSpec("zrot", (int(rest[0]),), angle=evaluate(rest[1]))
        if head == "Uf":
            return GateSpec("oracle", pattern=rest[0])
        if head == "hogg":
            return GateSpec("hogg", pattern=args[0].strip())
    except (IndexError, ValueError) as exc:
        raise CompileError(f"malformed gate line {line!r}: {exc}") from None
    raise CompileError(f"unknown gate {head!r} in line {line!r}")


def parse_circuit(text: str) -> list[GateSpec]:
    gates = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            gates.append(parse_gate(line))
    return gates


def compile_circuit(gates, sys: SpinSystem, label: str = "") -> CompiledGate:
    """Compile a gate list (or circuit text) left to right."""
    if isinstance(gates, str):
        gates = parse_circuit(gates)
    d = 2**sys.n_work
    out = CompiledGate(PulseProgram.identity(""), np.eye(d, dtype=complex))
    for g in gates:
        out = out.then(compile_gate(g, sys))
    label = label or out.label
    return CompiledGate(out.program.relabel(label), out.ideal_unitary, label=label)


# --- verification -------------------------------------------------------------

def effective_unitary(program: PulseProgram, sys: SpinSystem, mode: str = "zeeman-only"):
    if any(isinstance(e, Gradient) for e in program):
        raise CompileError(f"program {program.label!r} contains a gradient and has no unitary")
    return engine.program_unitary(program, sys, mode)


def observer_blocks(u: np.ndarray, n_qubits: int) -> list[np.ndarray]:
    """Work-register blocks of ``u`` for observer states 0 and 1.

    Raises if ``u`` mixes the observer states, which a computation on the
    work qubits never does.
    """
    d = 2 ** (n_qubits - 1)
    off = max(np.max(np.abs(u[:d, d:])), np.max(np.abs(u[d:, :d])))
    if off > 1e-9:
        raise CompileError(f"program acts on the observer qubit (off-block norm {off:.2e})")
    return [u[:d, :d], u[d:, d:]]


def fidelity(u: np.ndarray, ideal: np.ndarray) -> float:
    """``|Tr(u^dag ideal)| / d``: 1 when equal up to a global phase."""
    return float(abs(np.trace(u.conj().T @ ideal)) / ideal.shape[0])


def gate_fidelity(gate: CompiledGate, sys: SpinSystem, mode: str = "zeeman-only") -> float:
    """Worst observer-block fidelity of the compiled program."""
    if not len(gate.program):
        return fidelity(np.eye(len(gate.ideal_unitary)), gate.ideal_unitary)
    u = effective_unitary(gate.program, sys, mode)
    return min(fidelity(b, gate.ideal_unitary) for b in observer_blocks(u, sys.n_qubits))
