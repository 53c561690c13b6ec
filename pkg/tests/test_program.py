import math

import pytest
from hypothesis import given, settings, strategies as st

from spectralqc.program import (Delay, Gradient, HardPulse, ProgramError, PulseProgram,
                                TransitionPulse, evaluate, format_angle, parse_event, parse_program)


def test_evaluate_expressions():
    assert evaluate("pi/2") == pytest.approx(math.pi / 2)
    assert evaluate("1/(4*nu)", {"nu": 323.0}) == pytest.approx(1 / 1292)
    with pytest.raises(ProgramError):
        evaluate("__import__('os')")
    with pytest.raises(ProgramError):
        evaluate("1/(4*nu)")


def test_format_angle():
    assert format_angle(math.pi / 2) == "pi/2"
    assert format_angle(math.pi) == "pi"
    assert format_angle(3 * math.pi / 4) == "3*pi/4"


def test_parse_documented_lines():
    assert parse_event("pulse targets=1,2 angle=pi/2 phase=-y") == HardPulse((1, 2), math.pi / 2, "-y")
    assert parse_event("delay t=0.061951").duration == 0.061951
    d = parse_event("delay t=1/(4*nu) mode=zeeman", {"nu": 323.0})
    assert d.mode == "zeeman" and d.duration == pytest.approx(1 / 1292)
    assert isinstance(parse_event("grad"), Gradient)
    tp = parse_event("tpulse from=000 to=100 angle=pi")
    assert (tp.source, tp.target, tp.angle) == ("000", "100", pytest.approx(math.pi))


@pytest.mark.parametrize("line", [
    "pulse targets= angle=pi",
    "pulse targets=1 angle=pi phase=z",
    "pulse targets=1 angle=0",
    "pulse targets=1 angle=7",
    "delay t=-1",
    "tpulse from=000 to=110 angle=pi",
    "grad now",
    "wait t=1",
])
def test_invalid_events(line):
    with pytest.raises(ProgramError):
        parse_event(line)


def test_empty_program_needs_identity_flag():
    with pytest.raises(ProgramError):
        PulseProgram(())
    assert len(PulseProgram.identity()) == 0


events = st.one_of(
    st.builds(HardPulse, st.lists(st.integers(0, 4), min_size=1, max_size=3).map(tuple),
              st.floats(1e-3, 2 * math.pi), st.sampled_from(["x", "-x", "y", "-y"])),
    st.builds(Delay, st.floats(0, 1), st.sampled_from(["full", "zeeman"])),
    st.just(Gradient()),
    st.builds(TransitionPulse, st.just("000"), st.sampled_from(["100", "010", "001"]),
              st.floats(1e-3, 2 * math.pi), st.sampled_from(["x", "y"])),
)


@settings(max_examples=200, deadline=None)
@given(st.lists(events, min_size=1, max_size=8), st.text("abc 01", max_size=10))
def test_round_trip_bit_exact(evs, label):
    prog = PulseProgram(tuple(evs), label.strip())
    text = prog.to_text()
    again = parse_program(text)
    assert again == prog
    assert again.to_text() == text


def test_symbolic_delay_round_trip():
    prog = parse_program("delay t=1/(8*nu) mode=zeeman\n", {"nu": 280.0})
    assert prog.to_text().splitlines()[1] == "delay t=1/(8*nu) mode=zeeman"
