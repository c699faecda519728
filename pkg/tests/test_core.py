import io

import pytest
from hypothesis import given, strategies as st

from uhatcot.core import (
    Alphabet, CorpusRecord, TokenTrace, bits_from_str, bits_to_int, bits_to_str, csv_text,
    hamming_neighbor, int_to_bits, read_jsonl, rng, trace_parse, write_jsonl,
)


def test_alphabet_index_and_duplicates():
    a = Alphabet(("0", "1", "#"))
    assert a.index("#") == 2 and "1" in a and len(a) == 3
    with pytest.raises(ValueError):
        Alphabet(("0", "0"))
    with pytest.raises(KeyError):
        a.index("x")


def test_trace_split_and_render():
    t = trace_parse("1 0 1 0 1 # 0", 3)
    assert t.input == ("1", "0", "1")
    assert t.cot == ("0", "1", "#", "0")
    assert t.ends_with(["#", "0"])
    assert not t.ends_with(["1", "0", "1", "0", "1", "#", "0"])  # suffix reaches into input
    assert t.render() == "1 0 1 0 1 # 0"
    with pytest.raises(ValueError):
        trace_parse("1 0", 3)
    with pytest.raises(ValueError):
        TokenTrace(("a",), 2)


def test_hamming_neighbor():
    assert hamming_neighbor((0, 1, 1), 1) == (1, 1, 1)
    assert hamming_neighbor((0, 1, 1), 3) == (0, 1, 0)
    with pytest.raises(IndexError):
        hamming_neighbor((0, 1), 0)


@given(st.integers(1, 40), st.data())
def test_bits_roundtrip(width, data):
    v = data.draw(st.integers(0, 2 ** width - 1))
    bits = int_to_bits(v, width)
    assert len(bits) == width and bits_to_int(bits) == v
    assert bits_from_str(bits_to_str(bits)) == bits


def test_int_to_bits_rejects_overflow():
    with pytest.raises(ValueError):
        int_to_bits(4, 2)
    with pytest.raises(ValueError):
        bits_from_str("012")


def test_rng_streams_are_keyed():
    a = rng(7, 1).integers(0, 1 << 30, size=5)
    b = rng(7, 1).integers(0, 1 << 30, size=5)
    c = rng(7, 2).integers(0, 1 << 30, size=5)
    assert (a == b).all() and not (a == c).all()
    with pytest.raises(ValueError):
        rng(-1)


def test_jsonl_roundtrip():
    t = trace_parse("1 1 1 # 1", 2)
    recs = [CorpusRecord.from_trace("parity", t, ["1"], {"N": 2}), CorpusRecord("x", "a", "b", "c")]
    buf = io.StringIO()
    assert write_jsonl(recs, buf) == 2
    back = list(read_jsonl(io.StringIO(buf.getvalue())))
    assert back == recs
    assert back[0].trace() == t


def test_csv_text_floats_exact():
    text = csv_text(["a", "b"], [(1, 0.1), ("x", 2.5)])
    assert text == "a,b\n1,0.1\nx,2.5\n"
