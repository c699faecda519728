"""Number-theoretic transform over Z/p with per-level Cooley-Tukey capture."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

PRIME_CAP = 1 << 31


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


def _prime_factors(m: int) -> list[int]:
    out, f = [], 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1
    if m > 1:
        out.append(m)
    return out


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def next_power_of_two(m: int) -> int:
    n = 1
    while n < m:
        n *= 2
    return n


@dataclass(frozen=True)
class NttPlan:
    n: int
    p: int
    omega: int
    omega_inv: int
    n_inv: int

    def check(self) -> None:
        n, p, w = self.n, self.p, self.omega
        assert is_prime(p) and p % n == 1
        assert pow(w, n, p) == 1
        assert all(pow(w, k, p) != 1 for k in range(1, n))
        assert w * self.omega_inv % p == 1 and n * self.n_inv % p == 1


def is_primitive_root_of_unity(w: int, n: int, p: int) -> bool:
    if pow(w, n, p) != 1:
        return False
    return all(pow(w, n // q, p) != 1 for q in _prime_factors(n))


def plan(n: int) -> NttPlan:
    """Smallest prime p = 1 (mod n) with p > n, and its smallest primitive n-th root."""
    if n < 2 or not is_power_of_two(n):
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    p = n + 1
    while not is_prime(p):
        p += n
        if p > PRIME_CAP:
            raise ValueError(f"no NTT prime below {PRIME_CAP} for n={n}")
    omega = next(w for w in range(2, p) if is_primitive_root_of_unity(w, n, p))
    return NttPlan(n, p, omega, pow(omega, -1, p), pow(n, -1, p))


def _check_len(pl: NttPlan, a: Sequence[int]) -> list[int]:
    if len(a) != pl.n:
        raise ValueError(f"vector length {len(a)} != plan length {pl.n}")
    return [int(v) % pl.p for v in a]


def _levels(a: list[int], root: int, p: int) -> list[list[int]]:
    """States for block sizes 2, 4, ..., n.

    The level for block size m concatenates, over r < n/m, the length-m
    transform of a[r::n/m] (natural order).  Level n is the full transform.
    """
    n = len(a)
    blocks = [[v] for v in a]  # level 1: block r is a[r]
    out = []
    m = 1
    while m < n:
        half = n // (2 * m)
        w = pow(root, half, p)  # primitive (2m)-th root
        nxt = []
        for r in range(half):
            even, odd = blocks[r], blocks[r + half]
            merged = [0] * (2 * m)
            t = 1
            for k in range(m):
                o = t * odd[k] % p
                merged[k] = (even[k] + o) % p
                merged[k + m] = (even[k] - o) % p
                t = t * w % p
            nxt.append(merged)
        blocks = nxt
        m *= 2
        out.append([v for b in blocks for v in b])
    return out


def forward(pl: NttPlan, a: Sequence[int], capture_levels: bool = False):
    """A_k = sum_j a_j w^(jk) mod p.  Returns (A, levels) when capture_levels."""
    vec = _check_len(pl, a)
    levels = _levels(vec, pl.omega, pl.p)
    result = levels[-1]
    return (result, levels) if capture_levels else result


def inverse(pl: NttPlan, A: Sequence[int], capture_levels: bool = False):
    """a_j = n^-1 sum_k A_k w^(-jk) mod p.  Captured levels are unscaled."""
    vec = _check_len(pl, A)
    levels = _levels(vec, pl.omega_inv, pl.p)
    result = [v * pl.n_inv % pl.p for v in levels[-1]]
    return (result, levels) if capture_levels else result


def pointwise(pl: NttPlan, A: Sequence[int], B: Sequence[int]) -> list[int]:
    if len(A) != len(B):
        raise ValueError("length mismatch")
    return [int(x) * int(y) % pl.p for x, y in zip(A, B)]


def naive_dft(pl: NttPlan, a: Sequence[int], root: int | None = None) -> list[int]:
    """Direct O(n^2) evaluation; the reference for forward()."""
    vec = _check_len(pl, a)
    w = pl.omega if root is None else root
    return [sum(v * pow(w, j * k, pl.p) for j, v in enumerate(vec)) % pl.p for k in range(pl.n)]


def cyclic_convolution(a: Sequence[int], b: Sequence[int], p: int | None = None) -> list[int]:
    n = len(a)
    out = [0] * n
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[(i + j) % n] += int(x) * int(y)
    return [v % p for v in out] if p else out


def recombine(coeffs: Sequence[int], width: int | None = None) -> tuple[int, ...]:
    """sum_j c_j 2^j as MSB-left bits, zero padded to `width`."""
    value = sum(int(c) << j for j, c in enumerate(coeffs))
    width = max(width or 0, value.bit_length(), 1)
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))
