"""Spin systems, product-basis operators and the observer transition table.

Basis convention: a basis index ``b`` is read as the bit string
``b_0 b_1 ... b_{n-1}`` with qubit 0 (the observer) as the most significant
bit. ``|0>`` is spin-up, so ``Iz = diag(1/2, -1/2)``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from functools import reduce
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

MOLECULE_DIR_ENV = "SPECTRALQC_MOLECULE_DIR"

POLARIZATION = {
    "I0": np.array([[1, 0], [0, 0]], dtype=complex),
    "I1": np.array([[0, 0], [0, 1]], dtype=complex),
    "I+": np.array([[0, 1], [0, 0]], dtype=complex),
    "I-": np.array([[0, 0], [1, 0]], dtype=complex),
    "Ix": np.array([[0, 1], [1, 0]], dtype=complex) / 2,
    "Iy": np.array([[0, 1], [-1, 0]], dtype=complex) / 2j,
    "Iz": np.array([[1, 0], [0, -1]], dtype=complex) / 2,
    "E": np.eye(2, dtype=complex),
}
_ALIASES = {"I−": "I-", "identity": "E", "1": "E"}


class SpinSystemError(ValueError):
    pass


@dataclass(frozen=True)
class PolarizationOperator:
    """A single-spin operator ``kind`` acting on ``qubit``."""

    kind: str
    qubit: int

    def __post_init__(self):
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind not in POLARIZATION:
            raise ValueError(f"unknown polarization operator {self.kind!r}")

    @property
    def matrix(self) -> np.ndarray:
        return POLARIZATION[self.kind]


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """Weakly coupled spin-1/2 system; qubit 0 is the observer.

    Offsets are in Hz, each in the rotating frame of its own nucleus.
    ``couplings`` maps ``(i, j)`` with ``i < j`` to ``J_ij`` in Hz; absent
    pairs are uncoupled.
    """

    offsets: tuple[float, ...]
    couplings: dict[tuple[int, int], float]
    linewidth: float = 0.5
    names: tuple[str, ...] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "offsets", tuple(float(v) for v in self.offsets))
        n = len(self.offsets)
        if n < 2:
            raise SpinSystemError("need an observer and at least one work qubit")
        clean = {}
        for (i, j), value in self.couplings.items():
            i, j = int(i), int(j)
            if i == j:
                raise SpinSystemError(f"self-coupling ({i}, {j}) is not allowed")
            if i > j:
                i, j = j, i
            if not (0 <= i and j < n):
                raise SpinSystemError(f"coupling ({i}, {j}) outside 0..{n - 1}")
            if (i, j) in clean:
                raise SpinSystemError(f"coupling ({i}, {j}) given twice")
            clean[(i, j)] = float(value)
        object.__setattr__(self, "couplings", clean)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != n:
                raise SpinSystemError("one name per qubit required")
        if not self.linewidth > 0:
            raise SpinSystemError("linewidth must be positive")
        nonzero = [abs(v) for v in clean.values() if v != 0]
        if nonzero and not self.linewidth < min(nonzero) / 2:
            raise SpinSystemError(
                f"linewidth {self.linewidth} Hz does not resolve the smallest "
                f"coupling ({min(nonzero)} Hz); need linewidth < |J|min / 2"
            )

    @property
    def n_qubits(self) -> int:
        return len(self.offsets)

    @property
    def n_work(self) -> int:
        return self.n_qubits - 1

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def coupling(self, i: int, j: int) -> float:
        if i > j:
            i, j = j, i
        return self.couplings.get((i, j), 0.0)

    def with_offset(self, qubit: int, value: float) -> "SpinSystem":
        offsets = list(self.offsets)
        offsets[qubit] = value
        return replace(self, offsets=tuple(offsets))


def operator(kind: str, qubit: int, n_qubits: int) -> np.ndarray:
    """Embed one single-spin polarization operator in the n-qubit space."""
    kinds = ["E"] * n_qubits
    kinds[qubit] = kind
    return product_operator(kinds)


def product_operator(factors, n_qubits: int | None = None) -> np.ndarray:
    """Kronecker product of one factor per qubit, in qubit order 0..n-1.

    ``factors`` holds kind names (``"Iz"``, ``"I+"``, ``"E"``...) in qubit
    order, or :class:`PolarizationOperator` objects that are placed by their
    ``qubit`` index (uncovered qubits get the identity).
    """
    factors = list(factors)
    if factors and all(isinstance(f, PolarizationOperator) for f in factors):
        if n_qubits is None:
            n_qubits = max(f.qubit for f in factors) + 1
        kinds = ["E"] * n_qubits
        for f in factors:
            if not 0 <= f.qubit < n_qubits:
                raise ValueError(f"factor on qubit {f.qubit} outside 0..{n_qubits - 1}")
            if kinds[f.qubit] != "E":
                raise ValueError(f"two factors on qubit {f.qubit}")
            kinds[f.qubit] = f.kind
        factors = kinds
    if not factors:
        raise ValueError("product_operator needs at least one factor")
    if n_qubits is not None and len(factors) != n_qubits:
        raise ValueError(f"expected {n_qubits} factors, got {len(factors)}")
    mats = [PolarizationOperator(f, k).matrix if isinstance(f, str) else np.asarray(f)
            for k, f in enumerate(factors)]
    return reduce(np.kron, mats)


def bits(index: int, width: int) -> list[int]:
    """Bits of ``index``, most significant first."""
    return [(index >> (width - 1 - k)) & 1 for k in range(width)]


def label(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


def energies(sys: SpinSystem, zeeman_only: bool = False) -> np.ndarray:
    """Diagonal of the weak-coupling Hamiltonian in rad/s."""
    n = sys.n_qubits
    m = 0.5 - np.array([bits(b, n) for b in range(2**n)], dtype=float)
    e = m @ np.asarray(sys.offsets)
    if not zeeman_only:
        for (i, j), J in sys.couplings.items():
            e = e + J * m[:, i] * m[:, j]
    return 2 * np.pi * e


def build_hamiltonian(sys: SpinSystem, zeeman_only: bool = False) -> np.ndarray:
    """``H = sum 2 pi nu_i Iz^i + sum_{i<j} 2 pi J_ij Iz^i Iz^j`` (rad/s)."""
    return np.diag(energies(sys, zeeman_only)).astype(complex)


@dataclass(frozen=True)
class TransitionTable:
    """Observer single-quantum lines, one per work-register basis label."""

    entries: tuple[tuple[str, float], ...]

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.entries]

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([f for _, f in self.entries])

    def frequency(self, work_label: str) -> float:
        return dict(self.entries)[work_label]

    def nearest(self, freq: float) -> tuple[str, float]:
        """Closest line to ``freq``: ``(label, |distance|)``."""
        d = np.abs(self.frequencies - freq)
        k = int(np.argmin(d))
        return self.entries[k][0], float(d[k])

    def __len__(self):
        return len(self.entries)


def transition_table(sys: SpinSystem) -> TransitionTable:
    """Observer transition frequencies from the Hamiltonian's level energies.

    The line for work label ``s`` is ``(E(0,s) - E(1,s)) / 2 pi``, i.e.
    ``nu_0 + sum_j J_0j (1/2 - s_j)``. Raises if two lines fall within one
    linewidth of each other.
    """
    e = energies(sys) / (2 * np.pi)
    d = 2**sys.n_work
    entries = tuple((label(s, sys.n_work), float(e[s] - e[d + s])) for s in range(d))
    freqs = np.array([f for _, f in entries])
    gap = np.abs(freqs[:, None] - freqs[None, :])
    np.fill_diagonal(gap, np.inf)
    if np.min(gap) < sys.linewidth:
        i, j = np.unravel_index(np.argmin(gap), gap.shape)
        raise SpinSystemError(
            f"observer lines {entries[i][0]} and {entries[j][0]} collide "
            f"({entries[i][1]:.4f} vs {entries[j][1]:.4f} Hz)"
        )
    return TransitionTable(entries)


# --- molecule files --------------------------------------------------------

BUNDLED = {"fig4": "fig4_benzofuran.yaml", "fig8": "fig8_nitrophenol.yaml"}


def molecule_from_dict(doc: dict) -> SpinSystem:
    n = int(doc["n_qubits"])
    offsets = doc.get("offsets_hz", [0.0] * n)
    if len(offsets) != n:
        raise SpinSystemError(f"offsets_hz has {len(offsets)} entries, expected {n}")
    couplings = {}
    for row in doc.get("couplings_hz", []):
        i, j, value = row
        key = (min(i, j), max(i, j))
        if key in couplings:
            raise SpinSystemError(f"coupling {key} given twice")
        couplings[(i, j)] = value
    meta = {k: v for k, v in doc.items()
            if k not in {"n_qubits", "offsets_hz", "couplings_hz", "linewidth_hz", "names"}}
    return SpinSystem(
        offsets=offsets,
        couplings=couplings,
        linewidth=float(doc.get("linewidth_hz", 0.5)),
        names=doc.get("names"),
        metadata=meta,
    )


def resolve_molecule(ref: str | os.PathLike, base: Path | None = None) -> Path:
    """Locate a molecule file from a path or a bundled/known short name."""
    ref = str(ref)
    candidates = [Path(ref)]
    if base is not None:
        candidates.insert(0, base / ref)
    env = os.environ.get(MOLECULE_DIR_ENV)
    if env:
        candidates += [Path(env) / ref, Path(env) / f"{ref}.yaml"]
    for c in candidates:
        if c.is_file():
            return c
    if ref in BUNDLED:
        return Path(str(resources.files("spectralqc") / "molecules" / BUNDLED[ref]))
    tried = ", ".join(str(c) for c in candidates)
    raise FileNotFoundError(f"molecule file not found: {ref} (tried {tried})")


def load_molecule(ref: str | os.PathLike, base: Path | None = None) -> SpinSystem:
    path = resolve_molecule(ref, base)
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return molecule_from_dict(dict(doc, source=str(path)))


def dump_molecule(sys: SpinSystem) -> str:
    doc = {
        "n_qubits": sys.n_qubits,
        "offsets_hz": list(sys.offsets),
        "couplings_hz": [[i, j, J] for (i, j), J in sorted(sys.couplings.items())],
        "linewidth_hz": sys.linewidth,
    }
    if sys.names:
        doc["names"] = list(sys.names)
    return yaml.safe_dump(doc, sort_keys=False)
