"""Restrictions, constancy checks and the search for large constancy-forcing restrictions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import rng
from .functions import BooleanFunction

STAR = None
CONSTANCY_CAP = 22
TABLE_CAP = 20
DEFAULT_BUDGET = 100_000
_CHUNK = 1 << 16


@dataclass(frozen=True)
class Restriction:
    """values[i] is 0, 1 or STAR (None)."""

    values: tuple

    def __post_init__(self):
        vals = tuple(STAR if v is STAR or v == "*" else int(v) for v in self.values)
        if any(v not in (0, 1, STAR) for v in vals):
            raise ValueError("restriction entries must be 0, 1 or *")
        object.__setattr__(self, "values", vals)

    @classmethod
    def parse(cls, text: str) -> "Restriction":
        text = "".join(text.split())
        if set(text) - set("01*"):
            raise ValueError(f"not a restriction: {text!r}")
        return cls(tuple(STAR if c == "*" else int(c) for c in text))

    @classmethod
    def all_stars(cls, n: int) -> "Restriction":
        return cls((STAR,) * n)

    def __len__(self):
        return len(self.values)

    def __str__(self):
        return "".join("*" if v is STAR else str(v) for v in self.values)

    @property
    def stars(self) -> int:
        return sum(v is STAR for v in self.values)

    @property
    def free(self) -> tuple[int, ...]:
        """0-based free positions, ascending."""
        return tuple(i for i, v in enumerate(self.values) if v is STAR)

    def star_fraction(self) -> float:
        return self.stars / len(self.values) if self.values else 0.0

    def merge(self, inner: "Restriction") -> "Restriction":
        """Apply `inner` (over this restriction's free positions) on top of this one."""
        if len(inner) != self.stars:
            raise ValueError("inner restriction must cover exactly the free positions")
        vals = list(self.values)
        for pos, v in zip(self.free, inner.values):
            vals[pos] = v
        return Restriction(tuple(vals))

    def fill(self, free_rows: np.ndarray) -> np.ndarray:
        rows = np.empty((len(free_rows), len(self.values)), dtype=np.uint8)
        for i, v in enumerate(self.values):
            if v is not STAR:
                rows[:, i] = v
        if self.free:
            rows[:, list(self.free)] = free_rows
        return rows


def restrict_apply(f: BooleanFunction, rho: Restriction) -> BooleanFunction:
    if len(rho) != f.arity:
        raise ValueError(f"restriction length {len(rho)} != arity {f.arity}")
    return BooleanFunction(rho.stars, lambda rows: f.evaluate(rho.fill(rows)), f"{f.name}|{rho}")


def _completions(m: int):
    total = 2 ** m
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        yield ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def is_constant_on(f: BooleanFunction, rho: Restriction, cap: int = CONSTANCY_CAP) -> bool:
    if len(rho) != f.arity:
        raise ValueError(f"restriction length {len(rho)} != arity {f.arity}")
    if rho.stars > cap:
        raise ValueError(f"{rho.stars} stars exceed the constancy cap {cap}")
    g = restrict_apply(f, rho)
    first = None
    for rows in _completions(rho.stars):
        vals = g.evaluate(rows)
        if first is None:
            first = vals[0]
        if (vals != first).any():
            return False
    return True


@dataclass(frozen=True)
class SearchResult:
    rho: Restriction | None  # best constancy-forcing restriction with >= ceil(C N) stars
    best: Restriction  # largest constancy-forcing restriction seen (a full assignment at worst)
    max_stars: int
    value: int  # the constant on `best`
    method: str
    checked: int
    exhaustive: bool

    @property
    def max_star_fraction(self) -> float:
        return self.max_stars / len(self.best) if len(self.best) else 0.0


def _from_mask(n: int, star_set: Sequence[int], flat_index: int) -> Restriction:
    fixed = [i for i in range(n) if i not in star_set]
    vals: list = [STAR] * n
    for r, pos in enumerate(fixed):
        vals[pos] = (flat_index >> (len(fixed) - 1 - r)) & 1
    return Restriction(tuple(vals))


def _table_search(f: BooleanFunction, need: int, budget: int):
    """Largest star set S such that some assignment of the rest makes f constant.

    Works on the truth table as a (2,)*N tensor: f is constant for a fixed
    assignment iff min == max over the axes in S.
    """
    n = f.arity
    table = f.truth_table().reshape((2,) * n) if n else f.truth_table()
    checked = 0
    for s in range(n, -1, -1):
        for star_set in itertools.combinations(range(n), s):
            checked += 1
            if checked > budget:
                return None, checked, s
            axes = tuple(star_set)
            lo = table.min(axis=axes) if axes else table
            hi = table.max(axis=axes) if axes else table
            hits = np.flatnonzero(np.asarray(lo == hi).ravel())
            if len(hits):
                rho = _from_mask(n, star_set, int(hits[0]))
                value = int(np.asarray(lo).ravel()[hits[0]])
                return (rho, value), checked, s
    return None, checked, 0


def _influences(f: BooleanFunction, gen, samples: int = 2000) -> np.ndarray:
    xs = gen.integers(0, 2, size=(samples, f.arity), dtype=np.uint8)
    base = f.evaluate(xs)
    inf = np.zeros(f.arity)
    for i in range(f.arity):
        xs[:, i] ^= 1
        inf[i] = (f.evaluate(xs) != base).mean()
        xs[:, i] ^= 1
    return inf


def _greedy(f: BooleanFunction, gen, cap: int) -> tuple[Restriction, int, int]:
    """Fix the most influential free bit to its more biased value until f is constant."""
    n = f.arity
    rho = Restriction.all_stars(n)
    checked = 0
    order = list(np.argsort(-_influences(f, gen), kind="stable"))
    while True:
        if rho.stars <= cap:
            checked += 1
            if is_constant_on(f, rho, cap):
                val = int(restrict_apply(f, rho).evaluate(np.zeros((1, rho.stars), np.uint8))[0])
                return rho, val, checked
        pos = int(order.pop(0))
        best_v, best_bias = 0, -1.0
        for v in (0, 1):
            vals = list(rho.values)
            vals[pos] = v
            trial = Restriction(tuple(vals))
            g = restrict_apply(f, trial)
            sample = g.evaluate(gen.integers(0, 2, size=(256, trial.stars), dtype=np.uint8))
            bias = abs(float(sample.mean()) - 0.5)
            if bias > best_bias:
                best_v, best_bias = v, bias
        vals = list(rho.values)
        vals[pos] = best_v
        rho = Restriction(tuple(vals))


def restriction_search(f: BooleanFunction, c: float, budget: int = DEFAULT_BUDGET, seed: int = 0,
                       cap: int = CONSTANCY_CAP) -> SearchResult:
    """Look for a restriction with >= ceil(c N) stars on which f is constant.

    Small arities are searched exhaustively over star sets from largest to
    smallest; otherwise an influence-greedy restriction seeds a randomized
    search over restrictions with more stars.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError("C must lie in [0, 1]")
    n = f.arity
    need = math.ceil(c * n)
    if n <= TABLE_CAP:
        found, checked, s = _table_search(f, need, budget)
        if found is not None:
            rho, value = found
            exhaustive = True
            hit = rho if rho.stars >= need else None
            return SearchResult(hit, rho, rho.stars, value, "exhaustive", checked, exhaustive)
    gen = rng(seed)
    best, value, checked = _greedy(f, gen, cap)
    tries = 0
    while tries < budget and best.stars < need:
        tries += 1
        s = int(gen.integers(best.stars + 1, min(n, cap) + 1)) if best.stars < min(n, cap) else best.stars
        free = set(int(i) for i in gen.choice(n, size=s, replace=False))
        bits = gen.integers(0, 2, size=n)
        cand = Restriction(tuple(STAR if i in free else int(bits[i]) for i in range(n)))
        checked += 1
        if is_constant_on(f, cand, cap):
            best = cand
            value = int(restrict_apply(f, cand).evaluate(np.zeros((1, cand.stars), np.uint8))[0])
    hit = best if best.stars >= need and best.stars > 0 else None
    return SearchResult(hit, best, best.stars, value, "greedy+random", checked, False)
