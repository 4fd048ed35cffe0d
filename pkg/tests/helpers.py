"""Shared builders and statistical helpers for the test suite."""

import numpy as np

from privmine import Attribute, Schema


def make_schema(*sizes: int, name: str = "test") -> Schema:
    """Schema with anonymous attributes of the given category counts."""
    attrs = tuple(
        Attribute(name=f"a{j}", categories=tuple(f"c{v}" for v in range(s)))
        for j, s in enumerate(sizes)
    )
    return Schema(name=name, attributes=attrs)


class FixedUniformRng:
    """Stub generator returning a preset sequence of uniforms (cycled)."""

    def __init__(self, *values: float):
        self.values = values
        self.i = 0

    def random(self, size=None):
        if size is not None:
            out = np.array([self.random() for _ in range(int(size))])
            return out
        v = self.values[self.i % len(self.values)]
        self.i += 1
        return v


def gof_chisq(observed: np.ndarray, expected: np.ndarray) -> float:
    """Goodness-of-fit chi-square statistic, df = len - 1."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    return float(((observed - expected) ** 2 / expected).sum())


def two_sample_chisq(counts_a: np.ndarray, counts_b: np.ndarray) -> float:
    """Two-sample chi-square statistic for equal-length count vectors.

    With K1 = sqrt(N2/N1), K2 = 1/K1, the statistic
    sum (K1*a - K2*b)^2 / (a + b) is chi-square with df = cells - 1 under
    the hypothesis that both samples share one distribution.
    """
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    k1 = np.sqrt(b.sum() / a.sum())
    k2 = 1.0 / k1
    mask = (a + b) > 0
    return float(((k1 * a[mask] - k2 * b[mask]) ** 2 / (a + b)[mask]).sum())
