import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uhatcot import programs as P
from uhatcot.programs.turing import written_symbol
from uhatcot.tasks import median_oracle
from uhatcot.vm import check_one_hot_output, decode, run


def _word(bits):
    return [str(b) for b in bits]


@pytest.mark.parametrize("n", [1, 2, 5])
def test_and_head_truth_table(n):
    prog = P.and_head(n)
    for bits in itertools.product((0, 1), repeat=n):
        trace, _ = decode(prog, _word(bits), max_steps=1)
        assert trace.cot == (str(int(all(bits))),)
        assert check_one_hot_output(prog, trace)


def test_and_head_attends_leftmost_zero():
    tr = run(P.and_head(5), _word((1, 1, 0, 1, 0)))
    assert tr.attended[-1][0] == (3,)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dot_by_dot_parity(n):
    prog = P.parity_dot_by_dot(n)
    for bits in itertools.product((0, 1), repeat=n):
        trace, _ = decode(prog, _word(bits), stop={"0", "1"})
        assert trace.cot == P.dot_by_dot_cot(n) + (str(sum(bits) % 2),)
        assert check_one_hot_output(prog, trace)


def test_dot_by_dot_cap():
    with pytest.raises(ValueError):
        P.parity_dot_by_dot(P.DOT_BY_DOT_CAP + 1)


def test_dot_bitstrings_enumerate_cube():
    n = 3
    seen = {P.dot_bitstring(n, i) for i in range(1, 2 ** n + 1)}
    assert seen == set(itertools.product((0, 1), repeat=n))


def test_ordering_matrix_prefers_next_larger():
    m = P.ordering_matrix(6)
    # column w: the best u is the smallest value strictly above w
    for w in range(5):
        assert int(np.argmax(m[:, w])) == w + 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 60), min_size=1, max_size=7, unique=True))
def test_median_sorter_emits_sorted_lower_half(values):
    prog = P.median_sorter(len(values), 61)
    trace, _ = decode(prog, P.median_program_input(values), stop={P.EOS})
    got = [int(t) for t in trace.cot[:-1]]
    want = sorted(values)[: len(values) // 2 + 1]
    assert got == want
    assert got[-1] == median_oracle(values)


def test_median_sorter_rejects_duplicates():
    with pytest.raises(ValueError):
        P.median_program_input([3, 3])


# -- Turing machines ----------------------------------------------------------------------


def test_parity_tm_simulation():
    res = P.tm_simulate(P.parity_tm(), "1 0 1", 100)
    assert res.answer == "0" and res.final_state == "halt_even"
    assert res.tokens == ("1|RIGHT|odd", "2|RIGHT|odd", "3|RIGHT|even", "4|RIGHT|halt_even")
    assert P.tm_simulate(P.parity_tm(), "1 1 1", 100).answer == "1"


def test_unary_increment_tape():
    res = P.tm_simulate(P.unary_increment_tm(), "1 1", 100)
    assert res.tape == ("1", "1", "1", "#")


def test_halting_tm_stops_immediately():
    res = P.tm_simulate(P.halting_tm(), "0 1", 10)
    assert res.steps == () and res.answer == "1"


def test_step_bound_exceeded_and_bad_symbols():
    with pytest.raises(P.StepBoundExceeded):
        P.tm_simulate(P.parity_tm(), "1 1 1 1", 2)
    with pytest.raises(ValueError):
        P.tm_simulate(P.parity_tm(), "2", 10)


def test_head_underflow():
    spec = """
alphabet: 0 1 # _
states: go end
start: go
terminating: end
answer end: 0
go 0 -> LEFT go
go 1 -> LEFT go
go # -> LEFT go
go _ -> LEFT go
"""
    with pytest.raises(P.HeadUnderflow):
        P.tm_simulate(P.parse_tm_spec(spec), "1", 10)


def test_delta_must_be_total():
    with pytest.raises(ValueError):
        P.parse_tm_spec("alphabet: 0 1 # _\nstates: a b\nstart: a\nterminating: b\na 0 -> RIGHT b\n")


@pytest.mark.parametrize("name", sorted(P.FIXTURES))
def test_spec_roundtrip(name):
    tm = P.FIXTURES[name]()
    back = P.parse_tm_spec(tm.to_spec())
    assert back == tm


def test_step_label_roundtrip():
    assert P.parse_step_label(P.step_label(4, P.write("1"), "q")) == (4, "WRITE(1)", "q")
    assert written_symbol("WRITE(#)") == "#" and written_symbol(P.LEFT) is None


@pytest.mark.parametrize("name,n", [("parity", 4), ("unary_increment", 3), ("halting", 2)])
def test_compiled_tm_matches_simulator(name, n):
    tm = P.FIXTURES[name]()
    prog = P.tm_compile(tm, n)
    assert prog.n_layers == 1 and prog.n_heads == 2
    stop = set(prog.meta["answers"])
    for k in range(n + 1):
        for word in itertools.product(tm.input_symbols, repeat=k):
            sim = P.tm_simulate(tm, word, 10_000)
            trace, _ = decode(prog, P.tm_input(tm, word), stop=stop)
            assert trace.cot == sim.tokens + (sim.answer,), word


def test_compiled_tm_output_is_one_hot():
    tm = P.unary_increment_tm()
    prog = P.tm_compile(tm, 3)
    trace, _ = decode(prog, P.tm_input(tm, "1 1 1"), stop=set(prog.meta["answers"]))
    assert check_one_hot_output(prog, trace)
