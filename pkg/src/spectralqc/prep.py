"""Initial deviation states: thermal equilibrium and the POPS subsystem
pseudopure state ``Iz^0 |0..0><0..0|``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import apply_transition_pulse
from .spins import SpinSystem, operator


@dataclass(frozen=True)
class PreparedState:
    """A prepared deviation state.

    ``components`` lists ``(name, rho, weight)`` experiments whose weighted
    sum is ``rho``; acquisition runs each one separately and combines the
    recorded signals the way a spectrometer subtraction would.
    """

    rho: np.ndarray
    method: str
    components: tuple = ()

    def __post_init__(self):
        if not self.components:
            object.__setattr__(self, "components", ((self.method, self.rho, 1.0),))


def equilibrium_state(sys: SpinSystem) -> np.ndarray:
    """``sum_i Iz^i`` with unit weight per spin."""
    n = sys.n_qubits
    return sum(operator("Iz", q, n) for q in range(n))


def pops_prepare(sys: SpinSystem) -> PreparedState:
    """Equilibrium minus equilibrium-after-selective-pi, halved.

    The selective pi inverts the ``|0,0..0> <-> |1,0..0>`` transition, so
    the difference keeps only the ``|0..0>`` work populations.
    """
    n = sys.n_qubits
    eq = equilibrium_state(sys)
    ground = "0" * n
    flipped = "1" + "0" * (n - 1)
    inverted = apply_transition_pulse(eq, (ground, flipped), np.pi)
    rho = (eq - inverted) / 2
    return PreparedState(rho, "pops", (
        ("equilibrium", eq, 0.5),
        (f"selective pi {ground}<->{flipped}", inverted, -0.5),
    ))


def equilibrium(sys: SpinSystem) -> PreparedState:
    return PreparedState(equilibrium_state(sys), "equilibrium")


METHODS = {"pops": pops_prepare, "equilibrium": equilibrium}


def prepare(sys: SpinSystem, method: str = "pops") -> PreparedState:
    try:
        return METHODS[method](sys)
    except KeyError:
        raise ValueError(f"unknown preparation {method!r}; choose from {sorted(METHODS)}") from None


def work_populations(rho: np.ndarray) -> np.ndarray:
    """Deviation-population difference across the observer transition for each
    work label: ``rho[0s,0s] - rho[1s,1s]``. Equals 1 on ``|0..0>`` for POPS."""
    d = rho.shape[0] // 2
    diag = np.real(np.diagonal(rho))
    return diag[:d] - diag[d:]
