"""Median of N numbers with a sorted-enumeration CoT."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..core import TokenTrace
from .common import Verdict, compare_cot

BOS, SEP, EOS, SEMI = "BOS", "SEP", "EOS", ";"


@dataclass(frozen=True)
class MedianInstance:
    numbers: tuple[int, ...]
    digits: int = 3
    base: int = 10
    unique: bool = False

    def __post_init__(self):
        if not self.numbers:
            raise ValueError("median of an empty list")
        if self.base not in (2, 10) or self.digits < 1:
            raise ValueError("base must be 2 or 10 and digits >= 1")
        top = self.base ** self.digits
        if any(not 0 <= v < top for v in self.numbers):
            raise ValueError(f"numbers must lie in [0, {top})")
        if self.unique and len(set(self.numbers)) != len(self.numbers):
            raise ValueError("numbers are required to be distinct")


def median_oracle(numbers: Sequence[int]) -> int:
    """The (floor(N/2)+1)-th smallest element."""
    if not numbers:
        raise ValueError("median of an empty list")
    return sorted(numbers)[len(numbers) // 2]


def number_tokens(v: int, digits: int, base: int = 10) -> list[str]:
    out = []
    for _ in range(digits):
        out.append(str(v % base))
        v //= base
    return out[::-1]


def median_answer(inst: MedianInstance) -> tuple[str, ...]:
    return (*number_tokens(median_oracle(inst.numbers), inst.digits, inst.base), SEMI, EOS)


def median_input(inst: MedianInstance) -> TokenTrace:
    toks = [BOS]
    for v in inst.numbers:
        toks += number_tokens(v, inst.digits, inst.base) + [SEMI]
    toks.append(SEP)
    return TokenTrace(tuple(toks), len(toks))


def median_from_input(tokens: Sequence[str], base: int = 10) -> MedianInstance:
    if len(tokens) < 3 or tokens[0] != BOS or tokens[-1] != SEP:
        raise ValueError("median input is 'BOS d.. ; ... SEP'")
    groups, cur = [], []
    for t in tokens[1:-1]:
        if t == SEMI:
            groups.append(cur)
            cur = []
        else:
            cur.append(int(t))
    if cur or not groups or len({len(g) for g in groups}) != 1:
        raise ValueError("numbers must be ';'-terminated and equally wide")
    nums = []
    for g in groups:
        v = 0
        for d in g:
            v = v * base + d
        nums.append(v)
    return MedianInstance(tuple(nums), len(groups[0]), base)


def scratchpad_numbers(numbers: Sequence[int], stride: int = 1) -> list[int]:
    """Every stride-th of the floor(N/2) smallest numbers (the stride-th, 2*stride-th, ...)."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    low = sorted(numbers)[: len(numbers) // 2]
    return low[stride - 1 :: stride]


def median_cot(inst: MedianInstance, stride: int = 1) -> TokenTrace:
    cot = []
    for v in scratchpad_numbers(inst.numbers, stride):
        cot += number_tokens(v, inst.digits, inst.base) + [SEMI]
    return median_input(inst).extend(cot + list(median_answer(inst)))


def median_verify(inst: MedianInstance, trace: TokenTrace, stride: int = 1) -> Verdict:
    body = trace.cot[: len(trace.cot) - len(median_answer(inst))]
    emitted, cur = [], []
    for t in body:
        if t == SEMI:
            emitted.append(cur)
            cur = []
        else:
            cur.append(t)
    for i, g in enumerate(emitted):
        if len(g) != inst.digits:
            return Verdict(False, i, f"scratchpad number {i} has {len(g)} digits")
    values = [int("".join(g), inst.base) for g in emitted if all(c.isdigit() for c in g)]
    for i in range(1, len(values)):
        if values[i] < values[i - 1]:
            return Verdict(False, i, "scratchpad is not ascending")
    pool = sorted(inst.numbers)
    for i, v in enumerate(values):
        if v not in pool:
            return Verdict(False, i, f"{v} is not among the inputs")
    return compare_cot(trace, median_cot(inst, stride), median_answer(inst))
