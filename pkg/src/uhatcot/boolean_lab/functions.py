"""Boolean functions evaluated on batches of 0/1 rows."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

MAX_OPERAND_BITS = 31  # products stay inside int64


@dataclass(frozen=True)
class BooleanFunction:
    arity: int
    batch: Callable[[np.ndarray], np.ndarray]  # (m, arity) uint8 -> (m,) uint8
    name: str = ""

    def __call__(self, x: Sequence[int]) -> int:
        x = np.asarray(x, dtype=np.uint8)
        if x.shape != (self.arity,):
            raise ValueError(f"{self.name or 'f'} takes {self.arity} bits, got {x.shape[0] if x.ndim else 0}")
        return int(self.batch(x[None, :])[0])

    def evaluate(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[1] != self.arity:
            raise ValueError(f"expected rows of width {self.arity}")
        return np.asarray(self.batch(rows), dtype=np.uint8)

    def truth_table(self) -> np.ndarray:
        return self.evaluate(all_inputs(self.arity))


def all_inputs(n: int) -> np.ndarray:
    """All 2^n rows, first column most significant."""
    idx = np.arange(2 ** n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def from_callable(arity: int, f: Callable[[tuple], int], name: str = "") -> BooleanFunction:
    def batch(rows):
        return np.array([int(f(tuple(int(b) for b in r))) & 1 for r in rows], dtype=np.uint8)

    return BooleanFunction(arity, batch, name)


def parity(n: int) -> BooleanFunction:
    return BooleanFunction(n, lambda r: (r.sum(axis=1) & 1).astype(np.uint8), f"parity_{n}")


def and_(n: int) -> BooleanFunction:
    return BooleanFunction(n, lambda r: r.all(axis=1).astype(np.uint8), f"and_{n}")


def or_(n: int) -> BooleanFunction:
    return BooleanFunction(n, lambda r: r.any(axis=1).astype(np.uint8), f"or_{n}")


def majority(n: int) -> BooleanFunction:
    return BooleanFunction(n, lambda r: (2 * r.sum(axis=1) > n).astype(np.uint8), f"majority_{n}")


def constant(n: int, value: int = 0) -> BooleanFunction:
    return BooleanFunction(n, lambda r: np.full(len(r), value & 1, dtype=np.uint8), f"const{value}_{n}")


def rows_to_ints(rows: np.ndarray) -> np.ndarray:
    """Row bits read MSB first."""
    w = rows.shape[1]
    if w > 62:
        raise ValueError("rows too wide for int64")
    weights = (1 << np.arange(w - 1, -1, -1, dtype=np.int64))
    return rows.astype(np.int64) @ weights


def mult_digit_fn(n: int, k: int) -> BooleanFunction:
    """M_k (k=1 is the LSB) of X*Y; input is X then Y, each MSB first."""
    if not 1 <= n <= MAX_OPERAND_BITS:
        raise ValueError(f"operand length must be in [1, {MAX_OPERAND_BITS}]")
    if not 1 <= k <= 2 * n:
        raise ValueError(f"digit {k} outside [1, {2 * n}]")

    def batch(rows):
        x, y = rows_to_ints(rows[:, :n]), rows_to_ints(rows[:, n:])
        return (((x * y) >> (k - 1)) & 1).astype(np.uint8)

    return BooleanFunction(2 * n, batch, f"mult_digit_{n}_{k}")


def median_last_bit_fn(n: int, bits: int) -> BooleanFunction:
    """Least significant bit of the (floor(n/2)+1)-th smallest of n numbers, each `bits` wide, MSB first."""

    def batch(rows):
        vals = rows_to_ints(rows.reshape(-1, bits)).reshape(len(rows), n)
        med = np.sort(vals, axis=1)[:, n // 2]
        return (med & 1).astype(np.uint8)

    return BooleanFunction(n * bits, batch, f"median_last_bit_{n}x{bits}")


FUNCTIONS = {
    "parity": parity,
    "and": and_,
    "or": or_,
    "majority": majority,
    "const0": lambda n: constant(n, 0),
    "const1": lambda n: constant(n, 1),
}


def by_name(name: str, n: int) -> BooleanFunction:
    """parity/and/or/majority/const0/const1, mult_digit:K (arity 2n), median_last_bit:B (arity n*B)."""
    base, _, arg = name.partition(":")
    if base in FUNCTIONS and not arg:
        return FUNCTIONS[base](n)
    if base == "mult_digit":
        return mult_digit_fn(n, int(arg) if arg else n)
    if base == "median_last_bit":
        return median_last_bit_fn(n, int(arg) if arg else default_median_bits(n))
    raise KeyError(f"unknown function {name!r}")


def default_median_bits(n: int) -> int:
    return 1 + max(0, (n - 1).bit_length())  # 1 + ceil(log2 n)
