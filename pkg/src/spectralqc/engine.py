"""Deviation density-matrix evolution.

States are plain ``(2**n, 2**n)`` complex arrays in the Zeeman product
basis. Rotations follow ``R_a(theta) = exp(-i theta I_a)`` and events apply
left to right in program order.
"""
from __future__ import annotations

from functools import lru_cache, reduce

import numpy as np
from scipy.linalg import expm

from .program import Delay, Gradient, HardPulse, PulseProgram, TransitionPulse
from .spins import POLARIZATION, SpinSystem, energies

MODES = ("full", "zeeman-only")

_AXES = {
    "x": POLARIZATION["Ix"], "-x": -POLARIZATION["Ix"],
    "y": POLARIZATION["Iy"], "-y": -POLARIZATION["Iy"],
    "z": POLARIZATION["Iz"], "-z": -POLARIZATION["Iz"],
}


def spin_rotation(angle: float, axis: str) -> np.ndarray:
    """2x2 ``exp(-i angle I_axis)`` for axis in x, -x, y, -y, z, -z."""
    op = _AXES[axis]
    # I_a squares to 1/4, so the exponential has a closed form.
    return np.cos(angle / 2) * np.eye(2) - 2j * np.sin(angle / 2) * op


def pulse_unitary(n_qubits: int, targets, angle: float, phase: str) -> np.ndarray:
    targets = set(targets)
    if not targets:
        raise ValueError("hard pulse needs at least one target")
    if not targets <= set(range(n_qubits)):
        raise ValueError(f"targets {sorted(targets)} outside 0..{n_qubits - 1}")
    r = spin_rotation(angle, phase)
    return reduce(np.kron, [r if k in targets else np.eye(2) for k in range(n_qubits)])


def _index(lab) -> int:
    return int(lab, 2) if isinstance(lab, str) else int(lab)


def transition_unitary(n_qubits: int, pair, angle: float, phase: str = "x") -> np.ndarray:
    """Two-level rotation on ``pair`` embedded as identity elsewhere.

    The fictitious spin-1/2 operators are built with the member whose
    differing bit is 0 playing the role of ``|0>``.
    """
    r, s = (_index(p) for p in pair)
    diff = r ^ s
    if diff == 0 or diff & (diff - 1):
        raise ValueError(f"transition {pair} must flip exactly one qubit")
    if r & diff:
        r, s = s, r
    u = np.eye(2**n_qubits, dtype=complex)
    sub = spin_rotation(angle, phase)
    idx = np.array([r, s])
    u[np.ix_(idx, idx)] = sub
    return u


def _conj(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u @ rho @ u.conj().T


def apply_hard_pulse(rho, targets, angle, phase):
    n = int(np.log2(rho.shape[0]))
    return _conj(rho, pulse_unitary(n, targets, angle, phase))


def apply_delay(rho, duration, H):
    """``exp(-iHt) rho exp(iHt)``; ``H`` may be a matrix or its diagonal."""
    if duration < 0:
        raise ValueError(f"negative delay {duration}")
    H = np.asarray(H)
    if H.ndim == 1:
        diag = H
    elif np.count_nonzero(H - np.diag(np.diagonal(H))) == 0:
        diag = np.diagonal(H)
    else:
        return _conj(rho, expm(-1j * duration * H))
    phase = np.exp(-1j * duration * diag.real)
    return phase[:, None] * rho * phase.conj()[None, :]


@lru_cache(maxsize=8)
def _order_mask(n_qubits: int) -> np.ndarray:
    pop = np.array([bin(b).count("1") for b in range(2**n_qubits)])
    return pop[None, :] == pop[:, None]


def coherence_order(n_qubits: int) -> np.ndarray:
    """``p[r, s]``: 0->1 flips minus 1->0 flips taking label r to label s."""
    pop = np.array([bin(b).count("1") for b in range(2**n_qubits)])
    return pop[None, :] - pop[:, None]


def apply_gradient(rho):
    """Keep only zero-quantum and population elements."""
    n = int(np.log2(rho.shape[0]))
    return np.where(_order_mask(n), rho, 0)


def apply_transition_pulse(rho, pair, angle, phase="x"):
    n = int(np.log2(rho.shape[0]))
    return _conj(rho, transition_unitary(n, pair, angle, phase))


def _diagonals(sys: SpinSystem, mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    full = energies(sys)
    zee = energies(sys, zeeman_only=True) if mode == "zeeman-only" else full
    return full, zee


def event_unitary(event, sys: SpinSystem, mode: str = "full", _diag=None) -> np.ndarray:
    full, zee = _diag if _diag is not None else _diagonals(sys, mode)
    n = sys.n_qubits
    if isinstance(event, HardPulse):
        return pulse_unitary(n, event.targets, event.angle, event.phase)
    if isinstance(event, Delay):
        diag = zee if event.mode == "zeeman" else full
        return np.diag(np.exp(-1j * event.duration * diag))
    if isinstance(event, TransitionPulse):
        return transition_unitary(n, (event.source, event.target), event.angle, event.phase)
    if isinstance(event, Gradient):
        raise ValueError("a gradient has no unitary")
    raise TypeError(f"unknown event {event!r}")


def run_program(rho, program: PulseProgram, sys: SpinSystem, mode: str = "full"):
    """Apply ``program`` to ``rho`` event by event.

    In ``zeeman-only`` mode, delays tagged ``zeeman`` evolve without
    couplings; every other delay always uses the full Hamiltonian.
    """
    diag = _diagonals(sys, mode)
    for event in program:
        if isinstance(event, Gradient):
            rho = apply_gradient(rho)
        elif isinstance(event, Delay):
            h = diag[1] if event.mode == "zeeman" else diag[0]
            rho = apply_delay(rho, event.duration, h)
        else:
            rho = _conj(rho, event_unitary(event, sys, mode, diag))
    return rho


def program_unitary(program: PulseProgram, sys: SpinSystem, mode: str = "full") -> np.ndarray:
    """Ordered product of event unitaries (later events multiply on the left)."""
    diag = _diagonals(sys, mode)
    u = np.eye(sys.dim, dtype=complex)
    for event in program:
        if isinstance(event, Gradient):
            raise ValueError(f"program {program.label!r} contains a gradient")
        u = event_unitary(event, sys, mode, diag) @ u
    return u


def is_hermitian(rho, tol: float = 1e-10) -> bool:
    return float(np.max(np.abs(rho - rho.conj().T))) <= tol


def purity(rho) -> float:
    return float(np.real(np.trace(rho @ rho)))
