"""Pulse-program events and their line-oriented text format.

One event per line::

    pulse targets=1,2 angle=pi/2 phase=-y
    delay t=0.061951
    delay t=1/(4*nu) mode=zeeman
    grad
    tpulse from=000 to=100 angle=pi

A ``# program: <label>`` header carries the program label. Delays written
as expressions keep the expression text so that a parse/format cycle is
byte-identical; the numeric duration is evaluated from a symbol table
(``nu``, ``J12``...) supplied by the caller.
"""
from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Union

PHASES = ("x", "-x", "y", "-y")
DELAY_MODES = ("full", "zeeman")
_TWO_PI = 2 * math.pi


class ProgramError(ValueError):
    pass


# --- safe arithmetic ---------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def evaluate(expr: str, symbols: Mapping[str, float] | None = None) -> float:
    """Evaluate an arithmetic expression over numbers, ``pi`` and ``symbols``."""
    names = {"pi": math.pi, **(symbols or {})}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ProgramError(f"unresolved symbol {node.id!r} in {expr!r}")
            return names[node.id]
        raise ProgramError(f"unsupported expression {expr!r}")

    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError as exc:
        raise ProgramError(f"cannot parse expression {expr!r}") from exc
    return float(ev(tree))


def format_angle(angle: float) -> str:
    """Write ``angle`` as a small multiple of pi when that is exact."""
    for q in (1, 2, 3, 4, 6, 8, 12, 16):
        for p in range(1, 2 * q + 1):
            if math.gcd(p, q) != 1:
                continue
            text = ("" if p == 1 else f"{p}*") + "pi" + ("" if q == 1 else f"/{q}")
            if evaluate(text) == angle:
                return text
    return repr(float(angle))


def pi_fraction(angle: float, max_den: int = 16) -> tuple[int, int] | None:
    """``(p, q)`` with ``angle == p*pi/q`` to rounding, or None."""
    frac = Fraction(angle / math.pi).limit_denominator(max_den)
    if math.isclose(frac * math.pi, angle, rel_tol=0, abs_tol=1e-12):
        return frac.numerator, frac.denominator
    return None


# --- events ------------------------------------------------------------------

def _check_angle(angle: float) -> float:
    angle = float(angle)
    if not (0 < angle <= _TWO_PI + 1e-12):
        raise ProgramError(f"pulse angle {angle} outside (0, 2pi]")
    return angle


@dataclass(frozen=True)
class HardPulse:
    """Instantaneous rotation of ``targets`` by ``angle`` about ``phase``."""

    targets: tuple[int, ...]
    angle: float
    phase: str = "x"

    def __post_init__(self):
        targets = tuple(sorted(set(int(t) for t in self.targets)))
        if not targets:
            raise ProgramError("hard pulse needs at least one target")
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "angle", _check_angle(self.angle))
        if self.phase not in PHASES:
            raise ProgramError(f"unknown phase {self.phase!r}")

    def to_text(self) -> str:
        t = ",".join(str(q) for q in self.targets)
        return f"pulse targets={t} angle={format_angle(self.angle)} phase={self.phase}"


@dataclass(frozen=True)
class Delay:
    """Free evolution. ``mode="zeeman"`` marks jump-and-return delays."""

    duration: float
    mode: str = "full"
    expr: str | None = None

    def __post_init__(self):
        if self.duration < 0:
            raise ProgramError(f"negative delay {self.duration}")
        if self.mode not in DELAY_MODES:
            raise ProgramError(f"unknown delay mode {self.mode!r}")

    @classmethod
    def from_expr(cls, expr: str, symbols: Mapping[str, float], mode: str = "full") -> "Delay":
        return cls(evaluate(expr, symbols), mode, expr)

    def to_text(self) -> str:
        t = self.expr if self.expr is not None else repr(float(self.duration))
        return f"delay t={t}" + ("" if self.mode == "full" else f" mode={self.mode}")


@dataclass(frozen=True)
class Gradient:
    """Crusher gradient: removes every nonzero coherence order."""

    def to_text(self) -> str:
        return "grad"


@dataclass(frozen=True)
class TransitionPulse:
    """Ideal rotation confined to one single-quantum transition."""

    source: str
    target: str
    angle: float
    phase: str = "x"

    def __post_init__(self):
        if len(self.source) != len(self.target) or set(self.source + self.target) - {"0", "1"}:
            raise ProgramError(f"bad transition labels {self.source!r}, {self.target!r}")
        flips = sum(a != b for a, b in zip(self.source, self.target))
        if flips != 1:
            raise ProgramError(
                f"transition {self.source}<->{self.target} flips {flips} bits, expected 1")
        object.__setattr__(self, "angle", _check_angle(self.angle))
        if self.phase not in PHASES:
            raise ProgramError(f"unknown phase {self.phase!r}")

    def to_text(self) -> str:
        text = f"tpulse from={self.source} to={self.target} angle={format_angle(self.angle)}"
        return text + ("" if self.phase == "x" else f" phase={self.phase}")


PulseEvent = Union[HardPulse, Delay, Gradient, TransitionPulse]


@dataclass(frozen=True)
class PulseProgram:
    events: tuple = ()
    label: str = ""
    identity_ok: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events and not self.identity_ok:
            raise ProgramError(f"program {self.label!r} is empty; pass identity_ok=True")

    @classmethod
    def identity(cls, label: str = "identity") -> "PulseProgram":
        return cls((), label, identity_ok=True)

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        label = " ; ".join(x for x in (self.label, other.label) if x)
        return PulseProgram(self.events + other.events, label, identity_ok=True)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def relabel(self, label: str) -> "PulseProgram":
        return PulseProgram(self.events, label, identity_ok=True)

    def to_text(self) -> str:
        lines = [f"# program: {self.label}"] + [e.to_text() for e in self.events]
        return "\n".join(lines) + "\n"


def _fields(tokens: list[str], line: str) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ProgramError(f"expected key=value, got {tok!r} in {line!r}")
        key, value = tok.split("=", 1)
        out[key] = value
    return out


def parse_event(line: str, symbols: Mapping[str, float] | None = None) -> PulseEvent:
    head, *rest = line.split()
    kv = _fields(rest, line)
    try:
        if head == "pulse":
            try:
                targets = tuple(int(t) for t in kv["targets"].split(","))
            except ValueError:
                raise ProgramError(f"bad target list in {line!r}") from None
            return HardPulse(targets, evaluate(kv["angle"]), kv.get("phase", "x"))
        if head == "delay":
            mode = kv.get("mode", "full")
            text = kv["t"]
            try:
                float(text)
            except ValueError:
                return Delay.from_expr(text, symbols or {}, mode)
            return Delay(float(text), mode)
        if head == "grad":
            if kv:
                raise ProgramError(f"grad takes no arguments: {line!r}")
            return Gradient()
        if head == "tpulse":
            return TransitionPulse(kv["from"], kv["to"], evaluate(kv["angle"]),
                                   kv.get("phase", "x"))
    except KeyError as exc:
        raise ProgramError(f"missing field {exc.args[0]!r} in {line!r}") from None
    raise ProgramError(f"unknown event {head!r}")


def parse_program(text: str, symbols: Mapping[str, float] | None = None) -> PulseProgram:
    """Parse the text format; ``symbols`` resolves names used in delays."""
    label = ""
    events = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("program:"):
                label = body[len("program:"):].strip()
            continue
        events.append(parse_event(line, symbols))
    return PulseProgram(events, label, identity_ok=True)
