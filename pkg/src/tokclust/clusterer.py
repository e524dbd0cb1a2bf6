"""Agglomerative clustering engines over a condensed distance matrix.

Three engines produce identical flat partitions on tie-free inputs:

* ``cluster_naive`` — O(n^3) reference: scan all active pairs for the global
  minimum each step. Deterministic tie-break: the pair whose (smaller,
  larger) canonical member indices are lexicographically least wins.
* ``cluster_nn_chain`` — O(n^2) nearest-neighbour chain. Follows chains of
  nearest neighbours and merges mutual pairs; valid for the three reducible
  linkages handled here. Merges come out of height order, so they are
  stable-sorted by height and relabelled before the flat cut.
* ``cluster_mst_single`` — O(n^2) single linkage via Prim's minimum spanning
  tree; sorted tree edges define the dendrogram.

Dendrogram node ids follow the usual convention: leaves are 0..n-1 and the
k-th merge creates id n+k. Flat labels are canonicalized so that cluster
labels are ranked by their smallest member (token 0 is always in label 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import InvalidStop
from .geometry import CondensedDistanceMatrix
from .linkage import LinkageKind, merged_distance


class Merge(NamedTuple):
    left: int
    right: int
    height: float
    new_size: int


@dataclass(frozen=True)
class Dendrogram:
    """Ordered merge list; partial if the engine stopped before n-1 merges."""

    n_leaves: int
    merges: tuple[Merge, ...]

    @property
    def heights(self) -> np.ndarray:
        return np.array([m.height for m in self.merges], dtype=np.float64)

    def is_complete(self) -> bool:
        return len(self.merges) == self.n_leaves - 1


@dataclass(frozen=True)
class ClusterAssignment:
    """Flat partition: labels[p] in [0, k), canonicalized by smallest member."""

    labels: np.ndarray
    k: int


@dataclass(frozen=True)
class TargetClusters:
    """Stop once exactly k clusters remain (static reduction)."""

    k: int


@dataclass(frozen=True)
class DistanceThreshold:
    """Merge while the minimal inter-cluster distance is <= max_height (dynamic)."""

    max_height: float


StoppingRule = Union[TargetClusters, DistanceThreshold]


def _validate_stop(stop: StoppingRule, n: int) -> None:
    if isinstance(stop, TargetClusters):
        if not 1 <= stop.k <= n:
            raise InvalidStop(f"target cluster count {stop.k} not in [1, {n}]")
    elif isinstance(stop, DistanceThreshold):
        if not stop.max_height >= 0.0:
            raise InvalidStop(f"distance threshold {stop.max_height} must be >= 0")
    else:
        raise TypeError(f"not a stopping rule: {stop!r}")


def _canonical_labels(roots: np.ndarray) -> ClusterAssignment:
    """Relabel arbitrary per-token cluster roots by first appearance."""
    labels = np.empty(roots.shape[0], dtype=np.int64)
    mapping: dict[int, int] = {}
    for p, r in enumerate(roots.tolist()):
        if r not in mapping:
            mapping[r] = len(mapping)
        labels[p] = mapping[r]
    return ClusterAssignment(labels=labels, k=len(mapping))


def _assignment_from_merges(n: int, merges: tuple[Merge, ...]) -> ClusterAssignment:
    parent = np.arange(n + len(merges), dtype=np.int64)
    for idx, m in enumerate(merges):
        parent[m.left] = n + idx
        parent[m.right] = n + idx

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    roots = np.array([find(p) for p in range(n)], dtype=np.int64)
    return _canonical_labels(roots)


def _relabel(raw: list[tuple[int, int, float]], n: int) -> tuple[Merge, ...]:
    """Union-find pass turning (point-slot, point-slot, height) rows, already
    sorted by height, into dendrogram merges with proper node ids and sizes."""
    parent = list(range(2 * n - 1))
    size = [1] * (2 * n - 1)

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    merges = []
    for k, (x, y, h) in enumerate(raw):
        rx, ry = find(x), find(y)
        new = n + k
        parent[rx] = new
        parent[ry] = new
        size[new] = size[rx] + size[ry]
        merges.append(Merge(min(rx, ry), max(rx, ry), h, size[new]))
    return tuple(merges)


def cut_dendrogram(dendro: Dendrogram, stop: StoppingRule) -> ClusterAssignment:
    """Flat labels after applying a stopping rule to a complete dendrogram."""
    n = dendro.n_leaves
    if not dendro.is_complete():
        raise ValueError(
            f"dendrogram has {len(dendro.merges)} merges; cutting needs all {n - 1}"
        )
    _validate_stop(stop, n)
    if isinstance(stop, TargetClusters):
        applied = dendro.merges[: n - stop.k]
    else:
        m = 0
        while m < len(dendro.merges) and dendro.merges[m].height <= stop.max_height:
            m += 1
        applied = dendro.merges[:m]
    return _assignment_from_merges(n, applied)


def _working_upper(dm: CondensedDistanceMatrix) -> np.ndarray:
    """Upper-triangle working copy with +inf on and below the diagonal."""
    w = dm.to_square(np.inf)
    w[np.tri(dm.n, k=0, dtype=bool)] = np.inf
    return w


def cluster_naive(
    dm: CondensedDistanceMatrix, kind: LinkageKind, stop: StoppingRule
) -> tuple[Dendrogram, ClusterAssignment]:
    """O(n^3) reference engine: global minimum scan per merge step."""
    n = dm.n
    _validate_stop(stop, n)
    w = _working_upper(dm)
    size = np.ones(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    node_id = np.arange(n, dtype=np.int64)
    idx = np.arange(n)
    merges: list[Merge] = []

    max_merges = n - stop.k if isinstance(stop, TargetClusters) else n - 1
    for _ in range(max_merges):
        flat = int(np.argmin(w))
        i, j = divmod(flat, n)
        height = float(w[i, j])
        if isinstance(stop, DistanceThreshold) and height > stop.max_height:
            break
        # Current distances of clusters i and j to every slot, via the
        # (min, max) index map into the upper-triangle store.
        d_i = w[np.minimum(i, idx), np.maximum(i, idx)]
        d_j = w[np.minimum(j, idx), np.maximum(j, idx)]
        new = merged_distance(kind, d_i, d_j, size[i], size[j])
        others = idx[alive & (idx != i) & (idx != j)]
        w[np.minimum(i, others), np.maximum(i, others)] = new[others]
        w[j, :] = np.inf
        w[:, j] = np.inf
        alive[j] = False
        merges.append(
            Merge(
                min(int(node_id[i]), int(node_id[j])),
                max(int(node_id[i]), int(node_id[j])),
                height,
                int(size[i] + size[j]),
            )
        )
        size[i] += size[j]
        node_id[i] = n + len(merges) - 1

    merges_t = tuple(merges)
    return Dendrogram(n, merges_t), _assignment_from_merges(n, merges_t)


def cluster_nn_chain(
    dm: CondensedDistanceMatrix, kind: LinkageKind, stop: StoppingRule
) -> tuple[Dendrogram, ClusterAssignment]:
    """O(n^2) nearest-neighbour-chain engine."""
    n = dm.n
    _validate_stop(stop, n)
    w = dm.to_square(np.inf)
    size = np.ones(n, dtype=np.int64)
    chain: list[int] = []  # chain below the current head x
    raw: list[tuple[int, int, float]] = []

    for _ in range(n - 1):
        x = chain.pop() if chain else int(np.argmax(size > 0))
        while True:
            row = w[x]
            y = row.argmin()
            if chain:
                prev = chain[-1]
                # Prefer the chain predecessor on exact ties so mutual pairs
                # terminate the chain.
                if row[prev] <= row[y]:
                    y = prev
                    chain.pop()
                    break
            chain.append(x)
            x = y
        mn = float(w[x, y])
        if x > y:
            x, y = y, x
        nx, ny = int(size[x]), int(size[y])
        raw.append((int(x), int(y), mn))
        # Dead slots stay at +inf through their column writes; dead rows are
        # never read again, so only the merged slot needs fresh values.
        new = merged_distance(kind, w[x], w[y], nx, ny)
        w[y, :] = new
        w[:, y] = new
        w[y, y] = np.inf
        w[:, x] = np.inf
        size[y] = nx + ny
        size[x] = 0

    raw.sort(key=lambda t: t[2])  # stable
    merges = _relabel(raw, n)
    dendro = Dendrogram(n, merges)
    return dendro, cut_dendrogram(dendro, stop)


def cluster_mst_single(
    dm: CondensedDistanceMatrix, stop: StoppingRule
) -> tuple[Dendrogram, ClusterAssignment]:
    """Single-linkage clustering via Prim's minimum spanning tree."""
    n = dm.n
    _validate_stop(stop, n)
    w = dm.to_square(np.inf)
    best = np.full(n, np.inf, dtype=np.float64)
    in_tree = np.zeros(n, dtype=bool)
    raw: list[tuple[int, int, float]] = []

    x = 0
    for _ in range(n - 1):
        in_tree[x] = True
        np.minimum(best, w[x], out=best)
        best[in_tree] = np.inf
        y = int(np.argmin(best))
        raw.append((x, y, float(best[y])))
        x = y

    raw.sort(key=lambda t: t[2])  # stable
    merges = _relabel(raw, n)
    dendro = Dendrogram(n, merges)
    return dendro, cut_dendrogram(dendro, stop)
