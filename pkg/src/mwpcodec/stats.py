"""Sample variance, covariance and correlation of coefficient populations.

All quantities use the unbiased n-1 denominator and two-pass summation in
double precision:

    var(x)    = sum((x_i - mean(x))^2) / (n - 1)
    cov(x, y) = sum((x_i - mean(x)) * (y_i - mean(y))) / (n - 1)
    corr      = cov(x, y) / sqrt(var(x) * var(y))

A correlation whose denominator vanishes is reported as the explicit
marker ``None`` ("undefined"), never NaN, so constant columns cannot
poison predictor selection downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np


def _as_vector(x, name="vector") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size < 2:
        raise ValueError(f"{name} needs at least 2 samples, got {arr.size}")
    return arr


def variance(x) -> float:
    x = _as_vector(x)
    d = x - x.mean()
    return float((d * d).sum() / (x.size - 1))


def covariance(x, y) -> float:
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    return float((dx * dy).sum() / (x.size - 1))


def correlation(x, y) -> Optional[float]:
    """Pearson correlation, or None when either variance is zero."""
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    vx = variance(x)
    vy = variance(y)
    if vx == 0.0 or vy == 0.0:
        return None
    if np.array_equal(x, y):
        return 1.0  # keep the diagonal exact; sqrt rounding could miss it
    return covariance(x, y) / math.sqrt(vx * vy)


@dataclass
class CorrelationMatrix:
    """Symmetric pairwise correlation grid; None marks undefined entries."""

    labels: list[str]
    entries: list[list[Optional[float]]]

    def get(self, a: str, b: str) -> Optional[float]:
        return self.entries[self.labels.index(a)][self.labels.index(b)]

    def to_csv(self) -> str:
        """Square CSV: label header row and column, 'NA' for undefined."""
        lines = ["," + ",".join(self.labels)]
        for label, row in zip(self.labels, self.entries):
            cells = ["NA" if v is None else repr(v) for v in row]
            lines.append(label + "," + ",".join(cells))
        return "\n".join(lines) + "\n"


def correlation_matrix(columns: Mapping[str, Sequence[float]] | Sequence[tuple[str, Sequence[float]]]) -> CorrelationMatrix:
    """Pairwise correlations over labeled equal-length columns.

    The matrix is assembled from the scalar ``correlation`` so the two
    paths agree entry by entry exactly; the diagonal is 1 wherever the
    column is non-constant.
    """
    pairs = list(columns.items()) if isinstance(columns, Mapping) else list(columns)
    labels = [label for label, _ in pairs]
    vectors = [_as_vector(v, label) for label, v in pairs]
    n = vectors[0].size if vectors else 0
    for label, v in zip(labels, vectors):
        if v.size != n:
            raise ValueError(f"column {label!r} has length {v.size}, expected {n}")
    k = len(vectors)
    entries: list[list[Optional[float]]] = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            r = correlation(vectors[i], vectors[j])
            entries[i][j] = r
            entries[j][i] = r
    return CorrelationMatrix(labels=labels, entries=entries)
