"""Inter-cluster distance definitions and their incremental update rules.

Three linkages are supported: single (minimum cross-pair distance), complete
(maximum) and average (size-weighted mean over all cross pairs). The
efficient clusterers apply the recurrence form ``merged_distance``; the
set-based ``set_distance`` evaluates the defining formula directly and is
used only as a correctness oracle.
"""

from __future__ import annotations

import enum
from typing import Iterable

import numpy as np

from .errors import OverlappingClusters
from .geometry import CondensedDistanceMatrix


class LinkageKind(enum.Enum):
    SINGLE = "single"
    COMPLETE = "complete"
    AVERAGE = "average"

    @classmethod
    def parse(cls, name: str) -> "LinkageKind":
        """Parse a lowercase linkage name ("single" | "complete" | "average")."""
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown linkage {name!r} (expected one of {valid})") from None


def merged_distance(kind, d_ik, d_jk, size_i, size_j):
    """Distance from the merged cluster (I u J) to K, given d(I,K) and d(J,K).

    Works elementwise on arrays as well as scalars. For single and complete
    linkage the update is min/max; for average it is the size-weighted mean
    (size_i*d_ik + size_j*d_jk) / (size_i + size_j), which is exact for the
    mean-over-cross-pairs definition.
    """
    if kind is LinkageKind.SINGLE:
        return np.minimum(d_ik, d_jk)
    if kind is LinkageKind.COMPLETE:
        return np.maximum(d_ik, d_jk)
    if kind is LinkageKind.AVERAGE:
        return (size_i * d_ik + size_j * d_jk) / (size_i + size_j)
    raise TypeError(f"not a LinkageKind: {kind!r}")


def set_distance(
    kind: LinkageKind,
    dm: CondensedDistanceMatrix,
    members_i: Iterable[int],
    members_j: Iterable[int],
) -> float:
    """Literal evaluation of the linkage over all cross pairs of two clusters.

    O(|I| * |J|); oracle use only.
    """
    mi = np.asarray(sorted(members_i), dtype=np.intp)
    mj = np.asarray(sorted(members_j), dtype=np.intp)
    if mi.size == 0 or mj.size == 0:
        raise ValueError("cluster member sets must be non-empty")
    if np.intersect1d(mi, mj).size:
        raise OverlappingClusters("cluster member sets intersect")
    if mi[-1] >= dm.n or mj[-1] >= dm.n or mi[0] < 0 or mj[0] < 0:
        raise ValueError("member index out of range")

    ii = np.repeat(mi, mj.size)
    jj = np.tile(mj, mi.size)
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    cross = dm.values[lo * dm.n - lo * (lo + 1) // 2 + (hi - lo - 1)]
    if kind is LinkageKind.SINGLE:
        return float(cross.min())
    if kind is LinkageKind.COMPLETE:
        return float(cross.max())
    if kind is LinkageKind.AVERAGE:
        return float(cross.mean())
    raise TypeError(f"not a LinkageKind: {kind!r}")
