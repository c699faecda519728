import io
from fractions import Fraction

import numpy as np
import pytest

from uhatcot.core import Alphabet, TokenTrace
from uhatcot.vm import (
    AttentionHead, ContextOverflow, DecodeError, Layer, MlpRef, UhatProgram, UnknownToken,
    attention_scores, check_one_hot_output, decode, dump_program, load_program, run, scaled, step,
)
from uhatcot import programs as P


def _copy_first_program(tie_break="leftmost", n_max=6):
    """Width 5: [one, is_a, is_b, got_a, got_b].  All scores tie; output is the attended token."""
    d = 5
    embed = {"a": np.array([1, 1, 0, 0, 0]), "b": np.array([1, 0, 1, 0, 0])}
    key = np.zeros((d, d), dtype=np.int64)
    query = np.zeros((d, d), dtype=np.int64)
    value = np.zeros((d, d), dtype=np.int64)
    value[3, 1] = value[4, 2] = 1
    out = np.array([[0, 0, 0, 1, 0], [0, 0, 0, 0, 1]])
    return UhatProgram(
        width=d,
        layers=(Layer((AttentionHead(key, query, value),)),),
        embed=embed,
        pos=np.zeros((n_max, d), dtype=np.int64),
        out_map=out,
        out_alphabet=Alphabet(("a", "b")),
        tie_break=tie_break,
    )


def test_tie_break_leftmost_and_rightmost():
    left = _copy_first_program("leftmost")
    right = _copy_first_program("rightmost")
    tr = run(left, ["b", "a", "a"])
    assert [h[0][0] for h in tr.attended] == [1, 1, 1]
    tr = run(right, ["b", "a", "a"])
    assert [h[0][0] for h in tr.attended] == [1, 2, 3]


def test_scores_are_causal_bilinear():
    prog = P.and_head(4)
    tr = run(prog, ["1", "0", "1", "0"])
    s = attention_scores(prog, tr, 1, 1, 4)
    assert list(s) == [0, 1, 0, 1]
    # leftmost zero wins the tie
    assert tr.attended[3][0] == (2,)


def test_context_overflow_and_unknown_token():
    prog = _copy_first_program(n_max=2)
    with pytest.raises(ContextOverflow):
        run(prog, ["a", "a", "a"])
    with pytest.raises(UnknownToken):
        run(prog, ["z"])


def test_decode_requires_stop_or_budget():
    prog = _copy_first_program()
    with pytest.raises(ValueError):
        decode(prog, ["a"])
    trace, _ = decode(prog, ["b", "a"], max_steps=3)
    assert trace.cot == ("b", "b", "b")
    with pytest.raises(DecodeError):
        decode(prog, ["b"], stop={"a"}, max_steps=2)


def test_step_returns_next_token():
    tok, tr = step(P.and_head(3), ["1", "1", "1"])
    assert tok == "1" and len(tr.tokens) == 3
    with pytest.raises(ValueError):
        step(P.and_head(3), [])


def test_scaling_preserves_decoding():
    prog = P.and_head(5)
    for bits in ("10111", "11111", "00000"):
        a, _ = decode(prog, list(bits), max_steps=1)
        b, _ = decode(scaled(prog, 7), list(bits), max_steps=1)
        assert a == b
    with pytest.raises(ValueError):
        scaled(prog, 0)


def test_fraction_weights_run_exactly():
    prog = _copy_first_program()
    half = np.full((5, 5), Fraction(1, 3), dtype=object)
    prog = UhatProgram(prog.width, (Layer((AttentionHead(half, half, prog.layers[0].heads[0].value),)),),
                       prog.embed, prog.pos, prog.out_map, prog.out_alphabet)
    assert not prog.integral
    tr = run(prog, ["a", "b"])
    scores = attention_scores(prog, tr, 1, 1, 2)
    assert list(scores) == [Fraction(20, 9), Fraction(20, 9)]
    assert tr.attended[1][0] == (1,)


def test_one_hot_check():
    prog = P.and_head(3)
    assert check_one_hot_output(prog, TokenTrace(("1", "0", "1", "0"), 3))
    bad = check_one_hot_output(prog, TokenTrace(("1", "0", "1", "1"), 3))
    assert not bad and bad.position == 3


def test_program_serialization_roundtrip():
    tm = P.parity_tm()
    prog = P.tm_compile(tm, 3)
    buf = io.StringIO()
    dump_program(prog, buf)
    back = load_program(io.StringIO(buf.getvalue()))
    x = P.tm_input(tm, "1 1 0")
    a, _ = decode(prog, x, stop=prog.meta["answers"])
    b, _ = decode(back, x, stop=back.meta["answers"])
    assert a == b


def test_head_shape_validation():
    with pytest.raises(ValueError):
        AttentionHead(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        _copy_first_program("middle")


def test_unknown_mlp_name():
    prog = _copy_first_program()
    broken = UhatProgram(prog.width, (Layer(prog.layers[0].heads, MlpRef("no-such-mlp")),),
                         prog.embed, prog.pos, prog.out_map, prog.out_alphabet)
    with pytest.raises(KeyError):
        run(broken, ["a"])
