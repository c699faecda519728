"""Shared verdict type and length measures for task CoTs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..core import TokenTrace

# structural tokens that delimit segments rather than carry a computation step
DELIMITERS = frozenset({"#", ";", "-1", "BOS", "SEP", "EOS", "QUERY1", "QUERY2"})


@dataclass(frozen=True)
class Verdict:
    ok: bool
    index: int | None = None  # first bad token / segment / step
    message: str = ""

    def __bool__(self):
        return self.ok

    @classmethod
    def good(cls) -> "Verdict":
        return cls(True)


def first_mismatch(got: Sequence[str], want: Sequence[str]) -> int | None:
    for i, (a, b) in enumerate(zip(got, want)):
        if a != b:
            return i
    if len(got) != len(want):
        return min(len(got), len(want))
    return None


def compare_cot(trace: TokenTrace, expected: TokenTrace, answer: Sequence[str]) -> Verdict:
    """Input must match, the trace must end in `answer`, and every CoT token must match."""
    if trace.input != expected.input:
        return Verdict(False, first_mismatch(trace.input, expected.input), "input differs")
    if not trace.ends_with(answer):
        return Verdict(False, len(trace) - 1, f"trace does not end in the answer {' '.join(answer)}")
    i = first_mismatch(trace.cot, expected.cot)
    if i is not None:
        got = trace.cot[i] if i < len(trace.cot) else "<end>"
        want = expected.cot[i] if i < len(expected.cot) else "<end>"
        return Verdict(False, i, f"CoT token {i}: got {got}, expected {want}")
    return Verdict.good()


def cot_length(trace: TokenTrace, exclude_delimiters: bool = True) -> int:
    """Number of CoT tokens, by default ignoring structural delimiters."""
    if not exclude_delimiters:
        return len(trace.cot)
    return sum(1 for t in trace.cot if t not in DELIMITERS)


def split_segments(tokens: Sequence[str], sep: str) -> list[list[str]]:
    """Tokens between consecutive `sep` tokens; leading/trailing separators required."""
    segs: list[list[str]] = []
    cur: list[str] | None = None
    for t in tokens:
        if t == sep:
            if cur is not None:
                segs.append(cur)
            cur = []
        elif cur is None:
            raise ValueError(f"segment text must start with {sep!r}")
        else:
            cur.append(t)
    if cur:
        raise ValueError(f"segment text must end with {sep!r}")
    return segs
