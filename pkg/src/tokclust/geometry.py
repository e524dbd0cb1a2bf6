"""Pairwise cosine-distance computation between token feature vectors.

Distances are ``1 - cosine similarity``, so they live in [0, 2]: 0 for
parallel vectors, 1 for orthogonal, 2 for antipodal. Pairwise results are
stored condensed (strict upper triangle, row major), which halves memory on
the O(n^2) hot path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import squareform

from .errors import ZeroNormVector

#: Norms below this are treated as degenerate (zero) vectors.
DEFAULT_NORM_FLOOR = 1e-12

#: Distances at or below this are rounding noise from the gram-matrix path;
#: they are snapped to exactly 0 so identical rows sit at distance 0.
_ZERO_SNAP = 1e-12


@dataclass(frozen=True)
class CondensedDistanceMatrix:
    """Strict upper triangle of an n x n distance matrix, row major.

    The entry for pair (i, j) with i < j lives at offset
    ``i*n - i*(i+1)//2 + (j - i - 1)``. Self-distances are implicitly zero
    and not stored.
    """

    values: np.ndarray
    n: int

    def __post_init__(self):
        expected = self.n * (self.n - 1) // 2
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.values.ndim != 1 or self.values.shape[0] != expected:
            raise ValueError(
                f"condensed matrix for n={self.n} needs {expected} values, "
                f"got shape {self.values.shape}"
            )

    def index(self, i: int, j: int) -> int:
        """Offset of pair (i, j), i != j, in the condensed vector."""
        if i == j:
            raise ValueError("self-distances are not stored")
        if i > j:
            i, j = j, i
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def value(self, i: int, j: int) -> float:
        return 0.0 if i == j else float(self.values[self.index(i, j)])

    def to_square(self, diagonal: float = 0.0) -> np.ndarray:
        """Materialize the full symmetric n x n matrix."""
        if self.n == 1:
            return np.full((1, 1), diagonal, dtype=np.float64)
        square = squareform(np.ascontiguousarray(self.values, dtype=np.float64))
        if diagonal != 0.0:
            np.fill_diagonal(square, diagonal)
        return square


def cosine_distance(a: np.ndarray, b: np.ndarray, norm_floor: float = DEFAULT_NORM_FLOOR) -> float:
    """Cosine distance ``1 - a.b / (|a||b|)`` between two vectors.

    Raises ZeroNormVector when either norm is below ``norm_floor``; a
    degenerate token feature signals an upstream bug rather than distance 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.shape[0] < 1:
        raise ValueError(f"expected equal-length 1-D vectors, got {a.shape} and {b.shape}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a < norm_floor or norm_b < norm_floor:
        raise ZeroNormVector(f"vector norm below floor {norm_floor:g}")
    d = 1.0 - float(np.dot(a, b)) / (norm_a * norm_b)
    if d <= _ZERO_SNAP:
        return 0.0
    return min(d, 2.0)


def pairwise_distances(
    features: np.ndarray, norm_floor: float = DEFAULT_NORM_FLOOR
) -> CondensedDistanceMatrix:
    """All-pairs cosine distances of the rows of an (n, d) feature matrix.

    Rows are unit-normalized once, so the cost is one n x n matmul. Entries
    are clamped to [0, 2] against floating-point overshoot.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
        raise ValueError(f"expected an (n>=2, d>=1) matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix contains non-finite values")
    norms = np.linalg.norm(x, axis=1)
    bad = np.flatnonzero(norms < norm_floor)
    if bad.size:
        raise ZeroNormVector(f"row {bad[0]} has norm below floor {norm_floor:g}")
    unit = x / norms[:, None]
    gram = unit @ unit.T
    dist = np.clip(1.0 - gram, 0.0, 2.0)
    dist[dist <= _ZERO_SNAP] = 0.0
    iu, ju = np.triu_indices(x.shape[0], k=1)
    return CondensedDistanceMatrix(values=dist[iu, ju], n=x.shape[0])
