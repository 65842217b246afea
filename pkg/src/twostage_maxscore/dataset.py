"""Observation containers shared by every stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class Observation(NamedTuple):
    d: int
    y: np.ndarray
    z: np.ndarray
    x: np.ndarray


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-stored sample of (d, y, z, x).

    ``y``, ``z`` and ``x`` are 2-d arrays of shape (N, p), (N, k) and (N, q);
    1-d inputs are promoted to a single column.
    """

    d: np.ndarray
    y: np.ndarray
    z: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d)
        if d.ndim != 1:
            raise ValueError("d must be one-dimensional")
        if d.size < 1:
            raise ValueError("dataset must contain at least one observation")
        if not np.all((d == 0) | (d == 1)):
            raise ValueError("d must be binary (0/1)")
        n = d.shape[0]
        cols = {}
        for name in ("y", "z", "x"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2 or arr.shape[0] != n:
                raise ValueError(f"{name} must have {n} rows, got shape {arr.shape}")
            if arr.shape[1] < 1:
                raise ValueError(f"{name} must have at least one column")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            arr.setflags(write=False)
            cols[name] = arr
        d = d.astype(np.int8)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        for name, arr in cols.items():
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    @property
    def dims(self) -> tuple[int, int, int]:
        """(k, p, q)."""
        return self.z.shape[1], self.y.shape[1], self.x.shape[1]

    def __len__(self) -> int:
        return self.n

    def observation(self, i: int) -> Observation:
        return Observation(int(self.d[i]), self.y[i], self.z[i], self.x[i])

    @property
    def observations(self) -> list[Observation]:
        return [self.observation(i) for i in range(self.n)]

    def subset(self, idx) -> Dataset:
        idx = np.asarray(idx)
        return Dataset(self.d[idx], self.y[idx], self.z[idx], self.x[idx])

    def mask(self, j: int) -> np.ndarray:
        return self.d == j
