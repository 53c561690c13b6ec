import numpy as np
import pytest

from spectralqc.acquisition import observer_fid
from spectralqc.prep import equilibrium, equilibrium_state, pops_prepare, prepare, work_populations
from spectralqc.spins import operator


def test_equilibrium_ladder(fig4):
    rho = equilibrium_state(fig4)
    popcount = np.array([bin(b).count("1") for b in range(8)])
    assert np.allclose(rho, np.diag((3 - 2 * popcount) / 2))
    assert np.trace(rho) == 0


def test_equilibrium_matches_kronecker_sum(fig8):
    direct = sum(operator("Iz", q, 4) for q in range(4))
    assert np.allclose(equilibrium(fig8).rho, direct)


def test_single_spin_polarization():
    assert np.allclose(operator("Iz", 0, 1), np.diag([0.5, -0.5]))


@pytest.mark.parametrize("name", ["fig4", "fig8"])
def test_pops_is_subsystem_pseudopure(name, request):
    sys = request.getfixturevalue(name)
    n = sys.n_qubits
    state = pops_prepare(sys)
    ground = np.zeros((2 ** (n - 1),) * 2)
    ground[0, 0] = 1
    assert np.allclose(state.rho, np.kron(operator("Iz", 0, 1), ground), atol=1e-10)
    diag = np.diagonal(state.rho).real
    assert np.flatnonzero(np.abs(diag) > 1e-12).tolist() == [0, 2 ** (n - 1)]
    assert diag[0] == pytest.approx(0.5) and diag[2 ** (n - 1)] == pytest.approx(-0.5)
    assert np.allclose(state.rho, np.diag(diag))
    assert np.trace(state.rho) == pytest.approx(0)


def test_pops_components_sum_to_rho(fig4):
    state = pops_prepare(fig4)
    total = sum(w * rho for _, rho, w in state.components)
    assert np.allclose(total, state.rho)
    assert [name for name, _, _ in state.components][0] == "equilibrium"


def test_subtraction_linearity(fig4):
    state = pops_prepare(fig4)
    times = np.arange(512) * 2e-3
    fids = [w * observer_fid(rho, fig4, times, fig4.linewidth) for _, rho, w in state.components]
    direct = observer_fid(state.rho, fig4, times, fig4.linewidth)
    assert np.max(np.abs(sum(fids) - direct)) < 1e-10


def test_work_populations(fig4):
    assert np.allclose(work_populations(pops_prepare(fig4).rho), [1, 0, 0, 0])
    assert np.allclose(work_populations(equilibrium_state(fig4)), 1)


def test_unknown_method(fig4):
    with pytest.raises(ValueError, match="cat"):
        prepare(fig4, "cat")
