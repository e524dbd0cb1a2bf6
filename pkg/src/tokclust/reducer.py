"""Token-level reduction: size-weighted merging, schedules and back-projection.

Each token carries a size (how many original patches it represents). Merging
a cluster produces the size-weighted average of its member rows and sums
their sizes, so the total token mass is conserved exactly. A MergeRecord
keeps the cluster assignment so reduced tokens can be projected back to the
original positions. A leading protected prefix (e.g. a classification token)
is never clustered and passes through unchanged.

Also provides the alternating bipartite matching baseline, which merges the
t highest-similarity edges between even- and odd-position tokens and is
therefore limited to removing at most half of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .clusterer import (
    ClusterAssignment,
    TargetClusters,
    _canonical_labels,
    cluster_mst_single,
    cluster_nn_chain,
)
from .errors import (
    BlockOutOfRange,
    InvalidStop,
    KeepRateTooLow,
    MisalignedAssignment,
    ShapeMismatch,
    ZeroNormVector,
)
from .geometry import DEFAULT_NORM_FLOOR, pairwise_distances
from .linkage import LinkageKind


@dataclass
class TokenBatch:
    """A batch of (possibly ragged) token sequences with per-token sizes."""

    features: list[np.ndarray]
    sizes: list[np.ndarray]
    protected_prefix: int = 0

    def __post_init__(self):
        if len(self.features) != len(self.sizes):
            raise ValueError("features and sizes must have one entry per sequence")
        if self.protected_prefix < 0:
            raise ValueError("protected_prefix must be >= 0")
        for x, sz in zip(self.features, self.sizes):
            if x.ndim != 2:
                raise ValueError("each sequence must be a 2-D (tokens, dim) matrix")
            if sz.shape != (x.shape[0],):
                raise ValueError("sizes must align with sequence rows")
            if np.any(sz < 1):
                raise ValueError("every token size must be >= 1")
            if x.shape[0] < self.protected_prefix + 1:
                raise ValueError("sequence too short for the protected prefix")

    def unprotected_counts(self) -> list[int]:
        return [x.shape[0] - self.protected_prefix for x in self.features]


@dataclass(frozen=True)
class ConstantSchedule:
    """Remove t tokens at each of n_blocks blocks."""

    t: int
    n_blocks: int

    def __post_init__(self):
        if self.t < 1 or self.n_blocks < 2:
            raise ValueError("constant schedule needs t >= 1 and n_blocks >= 2")


@dataclass(frozen=True)
class LinearSchedule:
    """Remove floor(2t - 2tl/(n_blocks-1)) tokens at block l: 2t at the first
    block, linearly decreasing to 0 at the last."""

    t: int
    n_blocks: int

    def __post_init__(self):
        if self.t < 1 or self.n_blocks < 2:
            raise ValueError("linear schedule needs t >= 1 and n_blocks >= 2")


@dataclass(frozen=True)
class StageSchedule:
    """Keep a fixed fraction of the current tokens at each listed block."""

    blocks: tuple[int, ...]
    keep_rate: float

    def __post_init__(self):
        if any(b < 0 for b in self.blocks):
            raise ValueError("stage block indices must be >= 0")
        if any(a >= b for a, b in zip(self.blocks, self.blocks[1:])):
            raise ValueError("stage block indices must be strictly increasing")
        if not 0.0 < self.keep_rate <= 1.0:
            raise ValueError("keep_rate must be in (0, 1]")


ReductionSchedule = Union[ConstantSchedule, LinearSchedule, StageSchedule]


@dataclass(frozen=True)
class MergeRecord:
    """How one sequence's unprotected tokens were grouped by a reduction."""

    assignment: ClusterAssignment
    pre_count: int
    post_count: int


def round_half_up(x: float) -> int:
    """Round to nearest integer with .5 going up; used for stage keep counts."""
    return int(math.floor(x + 0.5))


def schedule_removals(
    sched: ReductionSchedule, block: int, *, n_current: int | None = None
) -> int:
    """Number of tokens to remove at the given block index.

    Stage schedules derive the removal from the caller-supplied current
    unprotected token count: keep = round_half_up(keep_rate * n_current),
    remove the rest. Blocks not listed remove 0.
    """
    if isinstance(sched, (ConstantSchedule, LinearSchedule)):
        if not 0 <= block <= sched.n_blocks - 1:
            raise BlockOutOfRange(
                f"block {block} outside [0, {sched.n_blocks - 1}]"
            )
        if isinstance(sched, ConstantSchedule):
            return sched.t
        # Exact integer form of floor(2t - 2tl/(L-1)).
        return (2 * sched.t * (sched.n_blocks - 1 - block)) // (sched.n_blocks - 1)
    if isinstance(sched, StageSchedule):
        if block < 0:
            raise BlockOutOfRange(f"block {block} must be >= 0")
        if block not in sched.blocks:
            return 0
        if n_current is None:
            raise ValueError("stage schedules need the current token count")
        keep = round_half_up(sched.keep_rate * n_current)
        return n_current - keep
    raise TypeError(f"not a reduction schedule: {sched!r}")


def schedule_from_mapping(config: dict[str, str]) -> ReductionSchedule:
    """Build a schedule from plain-text key=value settings.

    Keys: schedule=constant|linear|stages, t, L, blocks (comma-separated),
    keep_rate.
    """
    name = config.get("schedule", "").strip().lower()
    if name in ("constant", "linear"):
        try:
            t = int(config["t"])
            n_blocks = int(config["L"])
        except KeyError as e:
            raise ValueError(f"{name} schedule needs key {e.args[0]!r}") from None
        cls = ConstantSchedule if name == "constant" else LinearSchedule
        return cls(t=t, n_blocks=n_blocks)
    if name == "stages":
        try:
            blocks = tuple(int(b) for b in config["blocks"].split(",") if b.strip())
            keep_rate = float(config["keep_rate"])
        except KeyError as e:
            raise ValueError(f"stages schedule needs key {e.args[0]!r}") from None
        return StageSchedule(blocks=blocks, keep_rate=keep_rate)
    raise ValueError(f"unknown schedule {name!r} (expected constant|linear|stages)")


def identity_assignment(n: int) -> ClusterAssignment:
    return ClusterAssignment(labels=np.arange(n, dtype=np.int64), k=n)


def merge_tokens(
    seq: np.ndarray, sizes: np.ndarray, assignment: ClusterAssignment
) -> tuple[np.ndarray, np.ndarray, MergeRecord]:
    """Collapse each cluster to the size-weighted average of its rows.

    The assignment covers the unprotected tail of the sequence; any leading
    rows not covered are treated as the protected prefix and copied through.
    Singleton clusters are copied bit-exactly. Output clusters appear in
    canonical (label) order after the prefix.
    """
    seq = np.asarray(seq, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.int64)
    labels = np.asarray(assignment.labels, dtype=np.int64)
    n_rows = seq.shape[0]
    n_unprot = labels.shape[0]
    prefix = n_rows - n_unprot
    if prefix < 0:
        raise MisalignedAssignment(
            f"assignment covers {n_unprot} tokens but the sequence has {n_rows} rows"
        )
    if sizes.shape != (n_rows,):
        raise MisalignedAssignment("sizes must align with sequence rows")
    k = assignment.k
    if n_unprot and (labels.min() < 0 or labels.max() >= k):
        raise MisalignedAssignment("labels outside [0, k)")

    out = np.empty((prefix + k, seq.shape[1]), dtype=np.float64)
    out_sizes = np.empty(prefix + k, dtype=np.int64)
    out[:prefix] = seq[:prefix]
    out_sizes[:prefix] = sizes[:prefix]

    tail = seq[prefix:]
    tail_sizes = sizes[prefix:]
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(k + 1))
    for c in range(k):
        members = order[bounds[c] : bounds[c + 1]]
        if members.size == 0:
            raise MisalignedAssignment(f"cluster {c} is empty")
        if members.size == 1:
            out[prefix + c] = tail[members[0]]
            out_sizes[prefix + c] = tail_sizes[members[0]]
        else:
            w = tail_sizes[members].astype(np.float64)
            total = w.sum()
            out[prefix + c] = (w[:, None] * tail[members]).sum(axis=0) / total
            out_sizes[prefix + c] = int(total)

    record = MergeRecord(assignment=assignment, pre_count=n_unprot, post_count=k)
    return out, out_sizes, record


def unmerge(reduced: np.ndarray, record: MergeRecord) -> np.ndarray:
    """Back-project reduced tokens to the original positions.

    Row p of the output is the representative of the cluster token p was
    merged into.
    """
    reduced = np.asarray(reduced)
    if reduced.ndim != 2 or reduced.shape[0] != record.post_count:
        raise ShapeMismatch(
            f"expected {record.post_count} reduced rows, got shape {reduced.shape}"
        )
    return reduced[record.assignment.labels]


def _resolve_keeps(keep, n_sequences: int) -> list[int]:
    if isinstance(keep, (int, np.integer)):
        return [int(keep)] * n_sequences
    keeps = [int(v) for v in keep]
    if len(keeps) != n_sequences:
        raise ValueError(f"need one keep count per sequence ({n_sequences})")
    return keeps


def reduce_block(
    batch: TokenBatch,
    kind: LinkageKind,
    keep: Union[int, Sequence[int]],
    *,
    metric: list[np.ndarray] | None = None,
) -> tuple[TokenBatch, list[MergeRecord]]:
    """Cluster the unprotected tokens of each sequence down to ``keep`` and
    merge them by size-weighted average.

    Distances are computed on ``metric`` when given (e.g. attention keys),
    while the merged content is the batch's feature rows. Single linkage runs
    on the MST engine, complete/average on the nearest-neighbour chain.
    """
    keeps = _resolve_keeps(keep, len(batch.features))
    if metric is not None and len(metric) != len(batch.features):
        raise ValueError("need one metric matrix per sequence")

    new_features: list[np.ndarray] = []
    new_sizes: list[np.ndarray] = []
    records: list[MergeRecord] = []
    for s, (x, sz) in enumerate(zip(batch.features, batch.sizes)):
        p = batch.protected_prefix
        n_unprot = x.shape[0] - p
        k = keeps[s]
        if not 1 <= k <= n_unprot:
            raise InvalidStop(f"keep {k} not in [1, {n_unprot}] for sequence {s}")
        m = x if metric is None else metric[s]
        if m.shape[0] != x.shape[0]:
            raise ValueError("metric rows must match sequence rows")
        if k == n_unprot:
            assignment = identity_assignment(n_unprot)
        else:
            dm = pairwise_distances(m[p:])
            if kind is LinkageKind.SINGLE:
                _, assignment = cluster_mst_single(dm, TargetClusters(k))
            else:
                _, assignment = cluster_nn_chain(dm, kind, TargetClusters(k))
        out, out_sz, rec = merge_tokens(x, sz, assignment)
        new_features.append(out)
        new_sizes.append(out_sz)
        records.append(rec)

    reduced = TokenBatch(
        features=new_features, sizes=new_sizes, protected_prefix=batch.protected_prefix
    )
    return reduced, records


def tome_bipartite_merge(
    seq: np.ndarray,
    sizes: np.ndarray,
    t: int,
    protected_prefix: int = 0,
    norm_floor: float = DEFAULT_NORM_FLOOR,
) -> tuple[np.ndarray, np.ndarray, MergeRecord]:
    """Alternating bipartite matching baseline.

    Unprotected tokens split alternately into sets A (even positions) and B
    (odd positions); each A-token's best edge is its highest-cosine-similarity
    B-token, and the t highest such edges are executed as merges (A into B,
    size-weighted). Because only A-to-B merges are possible, t is capped at
    half the unprotected tokens.
    """
    seq = np.asarray(seq, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.int64)
    n_unprot = seq.shape[0] - protected_prefix
    if t < 0:
        raise ValueError("t must be >= 0")
    if t > n_unprot // 2:
        raise KeepRateTooLow(
            f"t={t} exceeds the bipartite bound {n_unprot // 2} "
            f"(keep rate must stay at 50% or higher)"
        )

    roots = np.arange(n_unprot, dtype=np.int64)
    if t > 0:
        tail = seq[protected_prefix:]
        norms = np.linalg.norm(tail, axis=1)
        bad = np.flatnonzero(norms < norm_floor)
        if bad.size:
            raise ZeroNormVector(f"token row {bad[0]} has near-zero norm")
        unit = tail / norms[:, None]
        a_pos = np.arange(0, n_unprot, 2)
        b_pos = np.arange(1, n_unprot, 2)
        sim = unit[a_pos] @ unit[b_pos].T
        best_score = sim.max(axis=1)
        best_target = sim.argmax(axis=1)
        chosen = np.argsort(-best_score, kind="stable")[:t]
        roots[a_pos[chosen]] = b_pos[best_target[chosen]]

    assignment = _canonical_labels(roots)
    return merge_tokens(seq, sizes, assignment)
