"""Correlation of a product digit with parities of input and earlier product digits (+-1 encoding)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import rng
from .functions import MAX_OPERAND_BITS
from .sensitivity import Estimate

EXACT_CAP = 12  # 2N input bits


@dataclass(frozen=True)
class FourierQuery:
    """Indices are 1-based from the least significant end for X, Y and M."""

    n: int
    t: int
    a: frozenset = frozenset()
    b: frozenset = frozenset()
    c: frozenset = frozenset()

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, frozenset(int(i) for i in getattr(self, name)))
        if not 1 <= self.n <= MAX_OPERAND_BITS:
            raise ValueError(f"n must be in [1, {MAX_OPERAND_BITS}]")
        if not 1 <= self.t <= self.n:
            raise ValueError("T must lie in [1, N]")
        if not all(1 <= i <= self.n for i in self.a | self.b):
            raise ValueError("A, B must be subsets of [1, N]")
        if not all(1 <= k < self.t for k in self.c):
            raise ValueError("C must be a subset of [1, T-1]")


def _signed_product(q: FourierQuery, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    prod = x * y
    out = 2 * ((prod >> (q.t - 1)) & 1) - 1
    for i in q.a:
        out = out * (2 * ((x >> (i - 1)) & 1) - 1)
    for j in q.b:
        out = out * (2 * ((y >> (j - 1)) & 1) - 1)
    for k in q.c:
        out = out * (2 * ((prod >> (k - 1)) & 1) - 1)
    return out


def fourier_correlation(q: FourierQuery, samples: int = 100_000, seed: int = 0) -> Estimate:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    g = rng(seed)
    x = g.integers(0, 2 ** q.n, size=samples, dtype=np.int64)
    y = g.integers(0, 2 ** q.n, size=samples, dtype=np.int64)
    v = _signed_product(q, x, y).astype(float)
    se = v.std(ddof=1) / math.sqrt(samples) if samples > 1 else float("nan")
    return Estimate(float(v.mean()), float(se))


def fourier_exact(q: FourierQuery, cap: int = EXACT_CAP) -> Fraction:
    if 2 * q.n > cap:
        raise ValueError(f"exhaustive evaluation capped at {cap} input bits")
    vals = np.arange(2 ** q.n, dtype=np.int64)
    x, y = np.meshgrid(vals, vals, indexing="ij")
    return Fraction(int(_signed_product(q, x.ravel(), y.ravel()).sum()), 4 ** q.n)


def random_query(n: int, t: int, gen: np.random.Generator) -> FourierQuery:
    """A, B uniform subsets of [1, T]; C a uniform subset of [1, T-1]."""
    pick = lambda m: frozenset(int(i) + 1 for i in np.flatnonzero(gen.integers(0, 2, size=m)))
    return FourierQuery(n, t, pick(t), pick(t), pick(t - 1))


def fourier_scan(n: int, ts, combos: int = 100, samples: int = 100_000, seed: int = 0):
    """Rows (T, combo, estimate, stderr, |A|, |B|, |C|)."""
    rows = []
    for t in ts:
        for j in range(combos):
            q = random_query(n, t, rng(seed, t, j, 0))
            est = fourier_correlation(q, samples, seed=_mix(seed, t, j))
            rows.append((t, j, est.value, est.stderr, len(q.a), len(q.b), len(q.c)))
    return rows


def _mix(seed: int, *keys: int) -> int:
    return int(rng(seed, *keys, 1).integers(0, 2 ** 63))


def max_abs_by_t(rows) -> dict[int, tuple[float, float]]:
    """T -> (max |estimate|, stderr of that estimate)."""
    best: dict[int, tuple[float, float]] = {}
    for t, _, est, se, *_ in rows:
        if t not in best or abs(est) > best[t][0]:
            best[t] = (abs(est), se)
    return dict(sorted(best.items()))
