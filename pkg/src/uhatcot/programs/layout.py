"""Named coordinate blocks of the residual stream."""

from __future__ import annotations

import numpy as np


class Layout:
    def __init__(self, blocks: dict[str, tuple[int, int]] | None = None):
        self.blocks: dict[str, tuple[int, int]] = {}
        self.width = 0
        for name, (start, size) in (blocks or {}).items():
            self.blocks[name] = (start, size)
            self.width = max(self.width, start + size)

    def add(self, name: str, size: int = 1) -> "Layout":
        if name in self.blocks:
            raise ValueError(f"block {name!r} already defined")
        self.blocks[name] = (self.width, size)
        self.width += size
        return self

    def __getitem__(self, name: str) -> slice:
        start, size = self.blocks[name]
        return slice(start, start + size)

    def at(self, name: str, k: int = 0) -> int:
        start, size = self.blocks[name]
        if not 0 <= k < size:
            raise IndexError(f"offset {k} outside block {name!r} of size {size}")
        return start + k

    def size(self, name: str) -> int:
        return self.blocks[name][1]

    def zeros(self) -> np.ndarray:
        return np.zeros(self.width, dtype=np.int64)

    def matrix(self) -> np.ndarray:
        return np.zeros((self.width, self.width), dtype=np.int64)

    def to_params(self) -> dict:
        return {name: list(v) for name, v in self.blocks.items()}

    @classmethod
    def from_params(cls, blocks: dict) -> "Layout":
        return cls({k: tuple(v) for k, v in blocks.items()})


def one_hot_index(vec: np.ndarray) -> int | None:
    """Index of the single 1 in `vec` (all else 0), or None."""
    nz = np.flatnonzero(vec)
    if len(nz) == 1 and vec[nz[0]] == 1:
        return int(nz[0])
    return None
