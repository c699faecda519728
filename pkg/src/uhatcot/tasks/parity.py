"""Parity with prefix-parity CoTs, and DFA membership with prefix-state CoTs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..core import Bits, TokenTrace
from .common import Verdict, compare_cot

HASH = "#"


@dataclass(frozen=True)
class ParityInstance:
    x: Bits

    def __post_init__(self):
        if len(self.x) < 1:
            raise ValueError("parity needs N >= 1")


def parity_oracle(x: Sequence[int]) -> int:
    v = 0
    for b in x:
        v ^= int(b)
    return v


def parity_answer(inst: ParityInstance) -> tuple[str, ...]:
    return (str(parity_oracle(inst.x)),)


def parity_input(inst: ParityInstance) -> TokenTrace:
    toks = tuple(str(b) for b in inst.x)
    return TokenTrace(toks, len(toks))


def parity_cot(x: Sequence[int], stride: int = 1) -> TokenTrace:
    """Prefix parities at positions k, 2k, ..., then '#', then the answer."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    x = tuple(int(b) for b in x)
    inst = ParityInstance(x)
    prefix, acc = [], 0
    for i, b in enumerate(x, start=1):
        acc ^= b
        if i % stride == 0:
            prefix.append(str(acc))
    return parity_input(inst).extend(prefix + [HASH, str(acc)])


def parity_verify(inst: ParityInstance, trace: TokenTrace, stride: int = 1) -> Verdict:
    return compare_cot(trace, parity_cot(inst.x, stride), parity_answer(inst))


def parity_from_input(tokens: Sequence[str]) -> ParityInstance:
    return ParityInstance(tuple(int(t) for t in tokens))


# -- DFA -------------------------------------------------------------------------------


@dataclass(frozen=True)
class Dfa:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    delta: dict  # (state, symbol) -> state
    start: str
    accepting: frozenset

    def __post_init__(self):
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        for q in self.states:
            for s in self.alphabet:
                if (q, s) not in self.delta:
                    raise ValueError(f"transition missing for ({q}, {s})")
        if self.start not in self.states or not self.accepting <= set(self.states):
            raise ValueError("start/accepting states must be declared")

    def run(self, word: Sequence[str]) -> list[str]:
        q, out = self.start, []
        for s in word:
            if s not in self.alphabet:
                raise ValueError(f"symbol {s!r} not in DFA alphabet")
            q = self.delta[q, s]
            out.append(q)
        return out

    def accepts(self, word: Sequence[str]) -> bool:
        states = self.run(word)
        return (states[-1] if states else self.start) in self.accepting


def parity_dfa() -> Dfa:
    """q1 after an odd number of ones; accepts odd parity."""
    delta = {("q0", "0"): "q0", ("q0", "1"): "q1", ("q1", "0"): "q1", ("q1", "1"): "q0"}
    return Dfa(("q0", "q1"), ("0", "1"), delta, "q0", frozenset({"q1"}))


def empty_dfa() -> Dfa:
    delta = {("q0", s): "q0" for s in ("0", "1")}
    return Dfa(("q0",), ("0", "1"), delta, "q0", frozenset())


@dataclass(frozen=True)
class DfaInstance:
    dfa: Dfa
    word: tuple[str, ...]


def dfa_answer(inst: DfaInstance) -> tuple[str, ...]:
    return ("1" if inst.dfa.accepts(inst.word) else "0",)


def dfa_prefix_cot(dfa: Dfa, word: Sequence[str]) -> TokenTrace:
    """State after each prefix, then the membership bit."""
    word = tuple(str(s) for s in word)
    states = dfa.run(word)
    return TokenTrace(word, len(word)).extend(states + list(dfa_answer(DfaInstance(dfa, word))))


def dfa_verify(inst: DfaInstance, trace: TokenTrace) -> Verdict:
    return compare_cot(trace, dfa_prefix_cot(inst.dfa, inst.word), dfa_answer(inst))
