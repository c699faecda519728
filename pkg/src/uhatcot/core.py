"""Shared vocabulary: alphabets, token traces, bit strings, seeds and file formats."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence

import numpy as np

Bits = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of token labels. Index order fixes output-map rows."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if len(set(symbols)) != len(symbols):
            dupes = sorted({s for s in symbols if symbols.count(s) > 1})
            raise ValueError(f"duplicate labels in alphabet: {dupes}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __contains__(self, label: object) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"label {label!r} not in alphabet") from None


@dataclass(frozen=True)
class TokenTrace:
    """A token sequence whose first `input_len` tokens are the original input."""

    tokens: tuple[str, ...]
    input_len: int

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(str(t) for t in self.tokens))
        if not 0 <= self.input_len <= len(self.tokens):
            raise ValueError(
                f"input_len={self.input_len} outside [0, {len(self.tokens)}]"
            )

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def input(self) -> tuple[str, ...]:
        return self.tokens[: self.input_len]

    @property
    def cot(self) -> tuple[str, ...]:
        return self.tokens[self.input_len :]

    def ends_with(self, suffix: Sequence[str]) -> bool:
        suffix = tuple(suffix)
        return len(suffix) <= len(self.cot) and self.tokens[len(self.tokens) - len(suffix) :] == suffix

    def render(self) -> str:
        return trace_render(self)

    def extend(self, tokens: Iterable[str]) -> "TokenTrace":
        return TokenTrace(self.tokens + tuple(tokens), self.input_len)


def trace_render(trace: TokenTrace) -> str:
    return " ".join(trace.tokens)


def trace_parse(text: str, input_len: int) -> TokenTrace:
    tokens = text.split()
    if not tokens:
        raise ValueError("empty trace text")
    if input_len > len(tokens):
        raise ValueError(f"input_len={input_len} exceeds token count {len(tokens)}")
    return TokenTrace(tuple(tokens), input_len)


@dataclass(frozen=True)
class TaskInstance:
    task: str
    input: TokenTrace
    answer: tuple[str, ...]


# -- bit strings -------------------------------------------------------------


def bits_from_str(text: str) -> Bits:
    text = "".join(text.split())
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(c) for c in text)


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def hamming_neighbor(x: Sequence[int], i: int) -> Bits:
    """Flip the i-th bit (1-based)."""
    if not 1 <= i <= len(x):
        raise IndexError(f"position {i} outside [1, {len(x)}]")
    out = list(x)
    out[i - 1] ^= 1
    return tuple(out)


def int_to_bits(value: int, width: int) -> Bits:
    """MSB-left binary of `value`, zero padded to `width`."""
    if value < 0 or value >= 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def bits_to_int(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


# -- randomness ---------------------------------------------------------------


def rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator determined by (seed, keys); keys derive per-item streams."""
    if seed < 0 or seed >= 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.default_rng([seed, *keys])


# -- corpus / table formats ------------------------------------------------------


@dataclass
class CorpusRecord:
    task: str
    input: str
    cot: str
    answer: str
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_trace(cls, task: str, trace: TokenTrace, answer: Sequence[str], meta=None):
        return cls(task, " ".join(trace.input), " ".join(trace.cot), " ".join(answer), dict(meta or {}))

    def trace(self) -> TokenTrace:
        inp = self.input.split()
        return TokenTrace(tuple(inp + self.cot.split()), len(inp))

    def to_json(self) -> str:
        return json.dumps(
            {"task": self.task, "input": self.input, "cot": self.cot,
             "answer": self.answer, "meta": self.meta},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "CorpusRecord":
        d = json.loads(line)
        return cls(d["task"], d["input"], d["cot"], d["answer"], d.get("meta", {}))


def write_jsonl(records: Iterable[CorpusRecord], stream: IO[str]) -> int:
    n = 0
    for r in records:
        stream.write(r.to_json() + "\n")
        n += 1
    return n


def read_jsonl(stream: IO[str]) -> Iterator[CorpusRecord]:
    for line in stream:
        if line.strip():
            yield CorpusRecord.from_json(line)


def write_csv(stream: IO[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
