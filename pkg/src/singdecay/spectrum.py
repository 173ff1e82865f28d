"""Nonincreasing singular-value sequences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# values below FLOOR_RTOL * s_1 are treated as numerically zero
FLOOR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("spectrum must be one-dimensional")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("spectrum must be nonnegative and nonincreasing")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_unsorted(cls, values) -> "SingularSpectrum":
        v = np.clip(np.asarray(values, dtype=float), 0.0, None)
        return cls(np.sort(v)[::-1])

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def s(self, n: int) -> float:
        """``s_n`` with 1-based ``n``; zero past the stored length."""
        if n < 1:
            raise IndexError("singular values are indexed from 1")
        return float(self.values[n - 1]) if n <= len(self.values) else 0.0

    @property
    def floor(self) -> float:
        return FLOOR_RTOL * (float(self.values[0]) if len(self.values) else 0.0)

    def numerical_rank(self) -> int:
        return int(np.count_nonzero(self.values > self.floor))

    def squared_sum(self) -> float:
        return float(np.sum(self.values ** 2))

    def tail_sums(self) -> np.ndarray:
        """``sum_{k >= n} s_k^2`` for n = 1..len."""
        sq = self.values ** 2
        return np.cumsum(sq[::-1])[::-1]

    def head(self, n: int) -> "SingularSpectrum":
        return type(self)(self.values[:n])

    def relative_deviation(self, other, count: int | None = None) -> np.ndarray:
        """``|other_n - s_n| / s_n`` over the first ``count`` entries."""
        other = np.asarray(other, dtype=float)
        count = min(len(self), len(other)) if count is None else count
        return np.abs(other[:count] - self.values[:count]) / self.values[:count]


class ExactSpectrum(SingularSpectrum):
    """Closed-form spectrum of a series kernel, multiplicities expanded."""
