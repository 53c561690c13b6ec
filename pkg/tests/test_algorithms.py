import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectralqc import algorithms as alg
from spectralqc.compiler import CompileError, parse_formula
from spectralqc.engine import run_program
from spectralqc.prep import pops_prepare, work_populations
from spectralqc.spins import label

# Reference output supports for counting and for the SAT instances, qubit 1 first.
COUNTING_SUPPORT = {"f00": {"00"}, "f01": {"00", "01", "10", "11"}, "f10": {"00", "01", "10", "11"},
          "f11": {"10"}}
SAT_SUPPORT = {
    "V1": {"100", "110", "101", "111"}, "~V1": {"000", "010", "001", "011"},
    "V2": {"010", "110", "011", "111"}, "~V2": {"000", "100", "001", "101"},
    "V3": {"001", "101", "011", "111"}, "~V3": {"000", "100", "010", "110"},
    "V3&V2&V1": {"111"}, "V3&V2&~V1": {"011"}, "V3&~V2&V1": {"101"}, "V3&~V2&~V1": {"001"},
    "~V3&V2&V1": {"110"}, "~V3&V2&~V1": {"010"}, "~V3&~V2&V1": {"100"}, "~V3&~V2&~V1": {"000"},
}

ALL_CASES = ([("grover", x, "fig4") for x in alg.CASES["grover"]]
             + [("count", f, "fig4") for f in alg.CASES["count"]]
             + [("bv", a, "fig4") for a in alg.CASES["bv2"]]
             + [("bv", a, "fig8") for a in alg.CASES["bv3"]]
             + [("hogg", h, "fig8") for h in alg.CASES["hogg"]])


def up_to_phase(a, b):
    return abs(np.vdot(a, b)) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), abs=1e-9)


@pytest.mark.parametrize("x", ["00", "01", "10", "11"])
def test_grover_amplifies_target(x):
    pops = np.abs(alg.grover_state(x)) ** 2
    assert pops[int(x, 2)] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("f", sorted(COUNTING_SUPPORT))
def test_counting_matches_table(f):
    state = alg.counting_state(f)
    assert up_to_phase(state, alg.table_state(alg.COUNTING_TABLE[f], 2))
    assert alg.ExpectedReadout.from_state(state, 2).lines == COUNTING_SUPPORT[f]


def test_counting_f01_quarter_populations():
    assert np.allclose(np.abs(alg.counting_state("f01")) ** 2, 0.25)


def test_count_phase():
    assert alg.count_phase(0) == 0
    assert alg.count_phase(1) == pytest.approx(math.pi / 2)
    assert alg.count_phase(2) == pytest.approx(math.pi)


@pytest.mark.parametrize("a", alg.CASES["bv2"] + alg.CASES["bv3"])
def test_bv_single_line(a):
    state = alg.bv_state(a)
    assert alg.ExpectedReadout.from_state(state, len(a)).lines == {a}


def test_bv_zero_string_has_no_z_pulses(fig4):
    assert "Zpi" not in alg.bv_program("00", fig4).circuit


def test_hamming_examples():
    assert alg.hamming_distance("000", "000") == 0
    assert alg.hamming_distance("011", "110") == 2


def test_hamming_exhaustive():
    for r, s in itertools.product(range(8), repeat=2):
        a, b = label(r, 3), label(s, 3)
        assert alg.hamming_distance(a, b) == sum(x != y for x, y in zip(a, b))


@given(st.text("01", min_size=1, max_size=8), st.data())
def test_hamming_metric(r, data):
    s = data.draw(st.text("01", min_size=len(r), max_size=len(r)))
    assert alg.hamming_distance(r, s) == alg.hamming_distance(s, r) >= 0
    assert (alg.hamming_distance(r, s) == 0) == (r == s)


def test_conflict_count():
    clauses = parse_formula("V3&~V2&V1")
    assert alg.conflicts("101", clauses) == 0
    assert alg.conflicts("111", clauses) == 1
    assert alg.conflicts("100", clauses) == 1
    assert alg.conflicts("010", clauses) == 3


@pytest.mark.parametrize("m", [1, 2, 3])
def test_phase_magnitudes(m):
    for c in range(m + 1):
        assert abs(alg.hogg_phase(c, m)) == pytest.approx(1)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_mixing_unitary_and_walsh_diagonal(m):
    u = alg.hogg_mixing(3, m)
    assert np.allclose(u @ u.conj().T, np.eye(8), atol=1e-12)
    w = np.array([[(-1) ** bin(r & s).count("1") for s in range(8)] for r in range(8)]) / math.sqrt(8)
    walsh = w @ u @ w
    assert np.allclose(walsh, np.diag(np.diagonal(walsh)), atol=1e-12)
    assert np.allclose(np.abs(np.diagonal(walsh)), np.abs(np.diagonal(alg.hogg_gamma(3, m))))


@pytest.mark.parametrize("formula", sorted(SAT_SUPPORT))
def test_hogg_oracle_matches_table(formula):
    lines = alg.hogg_table_lines(formula)
    assert lines == SAT_SUPPORT[formula]
    state = alg.hogg_state(parse_formula(formula))
    want = np.zeros(8, dtype=complex)
    for s in lines:
        want[int(s, 2)] = 1
    assert up_to_phase(state, want)


def test_hogg_even_m_oracle_normalised():
    state = alg.hogg_state(parse_formula("V2&V1"))
    assert np.linalg.norm(state) == pytest.approx(1)


def test_sample_readouts(fig4, fig8):
    assert alg.hogg_program("V1", fig8).expected.lines == {"100", "101", "110", "111"}
    assert alg.hogg_program("V3&V2&V1", fig8).expected.lines == {"111"}
    assert alg.grover_program("11", fig4).expected.lines == {"11"}
    assert alg.counting_program("f11", fig4).expected.lines == {"10"}
    assert sum(alg.counting_program("f01", fig4).expected.relative_intensities.values()) == pytest.approx(1)


@pytest.mark.parametrize("name, case, mol", ALL_CASES)
def test_pulse_vs_gate(name, case, mol, request):
    sys = request.getfixturevalue(mol)
    a = alg.build(name, case, sys)
    ideal = np.abs(a.ideal_state) ** 2
    start = pops_prepare(sys).rho
    zee = work_populations(run_program(start, a.program, sys, "zeeman-only"))
    full = work_populations(run_program(start, a.program, sys, "full"))
    assert np.max(np.abs(zee - ideal)) <= 1e-9
    assert np.max(np.abs(full - ideal)) <= 5e-3
    assert alg.ExpectedReadout.from_state(a.ideal_state, sys.n_work).lines == a.expected.lines


@pytest.mark.parametrize("call, args", [
    (alg.grover_program, ("2",)),
    (alg.counting_program, ("f22",)),
    (alg.bv_program, ("1",)),
    (alg.hogg_program, ("V1&V2",)),
])
def test_invalid_parameters(call, args, fig4):
    with pytest.raises(CompileError):
        call(*args, fig4)


def test_width_mismatch(fig8):
    with pytest.raises(CompileError):
        alg.grover_program("01", fig8)


def test_expected_readout_normalises():
    r = alg.ExpectedReadout((("00", 2.0), ("11", 2.0), ("01", 0.0)))
    assert r.lines == {"00", "11"}
    assert r.relative_intensities == {"00": 0.5, "11": 0.5}
    with pytest.raises(ValueError):
        alg.ExpectedReadout(())
