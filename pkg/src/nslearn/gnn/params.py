"""Flat parameter vector with named slices."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["ParamSpec"]


class ParamSpec:
    """Maps slice names to (offset, shape) inside one flat float64 vector.

    Views returned by :meth:`view` share memory with the flat vector, so
    writing through a view mutates the vector (used for init and gradient
    accumulation).
    """

    def __init__(self, entries: list[tuple[str, tuple[int, ...]]]):
        self.entries = list(entries)
        self._index: dict[str, tuple[int, tuple[int, ...]]] = {}
        off = 0
        for name, shape in self.entries:
            if name in self._index:
                raise ValueError(f"duplicate parameter name {name!r}")
            self._index[name] = (off, shape)
            off += math.prod(shape)
        self.total = off

    def zeros(self) -> np.ndarray:
        return np.zeros(self.total, dtype=np.float64)

    def view(self, theta: np.ndarray, name: str) -> np.ndarray:
        if theta.shape != (self.total,):
            raise ValueError(f"parameter vector has size {theta.size}, expected {self.total}")
        off, shape = self._index[name]
        return theta[off : off + math.prod(shape)].reshape(shape)

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]
