"""Pointwise, exact-average and sampled-average sensitivity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..core import rng
from .functions import BooleanFunction, all_inputs, default_median_bits, median_last_bit_fn, mult_digit_fn

EXHAUSTIVE_CAP = 20
CHUNK = 1 << 16


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    def __iter__(self):
        return iter((self.value, self.stderr))


def sensitivity(f: BooleanFunction, x: Sequence[int]) -> int:
    x = np.asarray(x, dtype=np.uint8)
    if x.shape != (f.arity,):
        raise ValueError(f"arity mismatch: f takes {f.arity} bits, x has {x.size}")
    flips = np.repeat(x[None, :], f.arity, axis=0)
    flips[np.arange(f.arity), np.arange(f.arity)] ^= 1
    return int((f.evaluate(flips) != f(x)).sum())


def _chunks(n: int):
    total = 2 ** n
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def total_sensitivity(f: BooleanFunction, cap: int = EXHAUSTIVE_CAP) -> int:
    """Sum over all x of s(f, x)."""
    n = f.arity
    if n > cap:
        raise CapExceeded(f"exhaustive enumeration capped at {cap} bits, f has {n}")
    total = 0
    for rows in _chunks(n):
        base = f.evaluate(rows)
        for i in range(n):
            rows[:, i] ^= 1
            total += int((f.evaluate(rows) != base).sum())
            rows[:, i] ^= 1
    return total


def avg_sensitivity_exact(f: BooleanFunction, cap: int = EXHAUSTIVE_CAP) -> Fraction:
    return Fraction(total_sensitivity(f, cap), 2 ** f.arity)


def avg_sensitivity_sampled(f: BooleanFunction, n_inputs: int = 200, n_flips: int = 200,
                            seed: int = 0) -> Estimate:
    """N * P[flipping a uniform bit changes f], with inputs and flip positions drawn uniformly.

    The standard error treats the per-input flip rates as i.i.d.
    """
    if n_inputs < 1 or n_flips < 1:
        raise ValueError("n_inputs and n_flips must be >= 1")
    n = f.arity
    g = rng(seed)
    xs = g.integers(0, 2, size=(n_inputs, n), dtype=np.uint8)
    pos = g.integers(0, n, size=(n_inputs, n_flips))
    base = f.evaluate(xs)
    flipped = np.repeat(xs, n_flips, axis=0)
    flipped[np.arange(len(flipped)), pos.ravel()] ^= 1
    changed = (f.evaluate(flipped) != np.repeat(base, n_flips)).reshape(n_inputs, n_flips)
    rates = changed.mean(axis=1)
    se = n * rates.std(ddof=1) / math.sqrt(n_inputs) if n_inputs > 1 else float("nan")
    return Estimate(float(n * rates.mean()), float(se))


def mult_digit_sensitivity(n: int, k: int | None = None, sampled: bool | None = None,
                           n_inputs: int = 200, n_flips: int = 200, seed: int = 0,
                           cap: int = 16) -> list[tuple[int, float, float]]:
    """(k, as(M_k), stderr) for one digit or all 2n digits; exact (stderr 0) when 2n <= cap."""
    ks = range(1, 2 * n + 1) if k is None else [k]
    exact = (2 * n <= cap) if sampled is None else not sampled
    rows = []
    for kk in ks:
        f = mult_digit_fn(n, kk)
        if exact:
            rows.append((kk, float(avg_sensitivity_exact(f, cap)), 0.0))
        else:
            est = avg_sensitivity_sampled(f, n_inputs, n_flips, seed=seed + kk)
            rows.append((kk, est.value, est.stderr))
    return rows


def median_lastdigit_sensitivity(n: int, bits: int | None = None, n_inputs: int = 200,
                                 n_flips: int = 200, seed: int = 0) -> Estimate:
    bits = default_median_bits(n) if bits is None else bits
    return avg_sensitivity_sampled(median_last_bit_fn(n, bits), n_inputs, n_flips, seed)


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """(slope, intercept) by least squares."""
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope), float(intercept)
