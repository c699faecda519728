"""Binary multiplication: oracle, digit model, schoolbook and NTT scratchpads."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .. import ntt
from ..core import Bits, TokenTrace, bits_to_int, int_to_bits
from .common import Verdict, split_segments

SEP = "-1"
COMPACT = "compact"
BUTTERFLIES = "butterflies"
SCHOOLBOOK = "schoolbook"
MODES = (COMPACT, BUTTERFLIES, SCHOOLBOOK)


@dataclass(frozen=True)
class MultiplicationInstance:
    X: Bits
    Y: Bits

    def __post_init__(self):
        if len(self.X) != len(self.Y) or not self.X:
            raise ValueError("operands must be nonempty and of equal length")

    @property
    def n(self) -> int:
        return len(self.X)


def _bits(v) -> Bits:
    if isinstance(v, str):
        v = "".join(v.split())
    return tuple(int(b) for b in v)


def mult_oracle(X: Sequence[int], Y: Sequence[int]) -> Bits:
    """Product as 2N bits, MSB left."""
    X, Y = _bits(X), _bits(Y)
    if len(X) != len(Y):
        raise ValueError("operands must have equal length")
    return int_to_bits(bits_to_int(X) * bits_to_int(Y), 2 * len(X))


def mult_digit(X: Sequence[int], Y: Sequence[int], k: int) -> int:
    """M_k, counted from the least significant end (M_1 = LSB)."""
    n = len(X)
    if not 1 <= k <= 2 * n:
        raise IndexError(f"digit {k} outside [1, {2 * n}]")
    return (bits_to_int(_bits(X)) * bits_to_int(_bits(Y)) >> (k - 1)) & 1


def mult_answer(inst: MultiplicationInstance) -> tuple[str, ...]:
    return tuple(str(b) for b in mult_oracle(inst.X, inst.Y)) + (SEP,)


def mult_input(inst: MultiplicationInstance) -> TokenTrace:
    toks = (SEP, *map(str, inst.X), SEP, *map(str, inst.Y), SEP)
    return TokenTrace(toks, len(toks))


def mult_from_input(tokens: Sequence[str]) -> MultiplicationInstance:
    segs = split_segments(tokens, SEP)
    if len(segs) != 2:
        raise ValueError("multiplication input is '-1 X -1 Y -1'")
    return MultiplicationInstance(_bits(segs[0]), _bits(segs[1]))


def index_hint(k: int) -> str:
    """a, b, ..., z, a1, b1, ..."""
    return chr(97 + k % 26) + (str(k // 26) if k >= 26 else "")


def _with_hints(vec: Sequence[int]) -> list[str]:
    out = []
    for k, v in enumerate(vec):
        out += [index_hint(k), str(v)]
    return out


def _strs(vec) -> list[str]:
    return [str(v) for v in vec]


def schoolbook_segments(inst: MultiplicationInstance) -> list[tuple[str, list[str]]]:
    """Shifted partial product and running sum per multiplier bit (LSB first), then the result."""
    n, x = inst.n, bits_to_int(inst.X)
    segs, total = [], 0
    for i, yb in enumerate(reversed(inst.Y)):
        part = x * yb << i
        total += part
        segs.append((f"partial[{i}]", _strs(int_to_bits(part, 2 * n))))
        segs.append((f"sum[{i}]", _strs(int_to_bits(total, 2 * n))))
    segs.append(("result", _strs(mult_oracle(inst.X, inst.Y))))
    return segs


def ntt_params(n_digits: int) -> ntt.NttPlan:
    return ntt.plan(max(2, ntt.next_power_of_two(2 * n_digits)))


def ntt_segments(inst: MultiplicationInstance, mode: str = COMPACT) -> list[tuple[str, list[str]]]:
    if mode not in (COMPACT, BUTTERFLIES):
        raise ValueError(f"unknown NTT mode {mode!r}")
    pl = ntt_params(inst.n)
    a = list(reversed(inst.X)) + [0] * (pl.n - inst.n)
    b = list(reversed(inst.Y)) + [0] * (pl.n - inst.n)
    A, levels_a = ntt.forward(pl, a, capture_levels=True)
    B, levels_b = ntt.forward(pl, b, capture_levels=True)
    C = ntt.pointwise(pl, A, B)
    c, levels_c = ntt.inverse(pl, C, capture_levels=True)
    if max(c) >= pl.p or ntt.cyclic_convolution(a, b) != c:
        raise AssertionError("convolution wrapped modulo p")

    def staged(name, levels, final):
        out = []
        if mode == BUTTERFLIES:
            m = 2
            for lvl in levels[:-1]:
                out.append((f"{name}.level[{m}]", _strs(lvl)))
                m *= 2
        out.append((name, _strs(final)))
        return out

    segs = [("rev_pad[X]", _strs(a)), ("rev_pad[Y]", _strs(b))]
    segs += staged("ntt[X]", levels_a, A)
    segs += staged("ntt[Y]", levels_b, B)
    segs += [("hints[X]", _with_hints(A)), ("hints[Y]", _with_hints(B)),
             ("hints[conv]", _with_hints(C)), ("conv", _strs(C))]
    segs += staged("intt", levels_c, c)
    segs.append(("result", _strs(ntt.recombine(c, 2 * inst.n))))
    return segs


def mult_segments(inst: MultiplicationInstance, mode: str) -> list[tuple[str, list[str]]]:
    if mode == SCHOOLBOOK:
        return schoolbook_segments(inst)
    return ntt_segments(inst, mode)


def _assemble(inst: MultiplicationInstance, segs) -> TokenTrace:
    cot: list[str] = []
    for _, toks in segs:
        cot += [SEP, *toks]
    cot.append(SEP)
    return mult_input(inst).extend(cot)


def mult_cot_schoolbook(X, Y) -> TokenTrace:
    inst = MultiplicationInstance(_bits(X), _bits(Y))
    return _assemble(inst, schoolbook_segments(inst))


def mult_cot_ntt(X, Y, mode: str = COMPACT) -> TokenTrace:
    inst = MultiplicationInstance(_bits(X), _bits(Y))
    return _assemble(inst, ntt_segments(inst, mode))


def mult_cot(inst: MultiplicationInstance, mode: str = COMPACT) -> TokenTrace:
    return _assemble(inst, mult_segments(inst, mode))


def mult_meta(inst: MultiplicationInstance, mode: str) -> dict:
    meta = {"N": inst.n, "mode": mode}
    if mode != SCHOOLBOOK:
        pl = ntt_params(inst.n)
        meta.update(n=pl.n, p=pl.p, omega=pl.omega)
    return meta


def mult_cot_verify(X, Y, trace: TokenTrace, mode: str = COMPACT) -> Verdict:
    """Recompute every segment and report the first (0-based) that differs."""
    inst = MultiplicationInstance(_bits(X), _bits(Y))
    if trace.input != mult_input(inst).tokens:
        return Verdict(False, None, "input does not encode the operands")
    try:
        got = split_segments(trace.cot, SEP)
    except ValueError as e:
        return Verdict(False, None, str(e))
    want = mult_segments(inst, mode)
    for i, (name, toks) in enumerate(want):
        if i >= len(got):
            return Verdict(False, i, f"segment {i} ({name}) missing")
        if got[i] != toks:
            return Verdict(False, i, f"segment {i} ({name}) is {' '.join(got[i])}, expected {' '.join(toks)}")
    if len(got) != len(want):
        return Verdict(False, len(want), "extra segments after the result")
    return Verdict.good()
