"""Minimal deterministic transformer block demonstrating the reduction
insertion point.

The block is residual attention followed by a GELU MLP, with layer
normalization deliberately omitted: it is orthogonal to the reduction
mechanics. Attention is *proportional*: log(token size) is added to each
key's logit column so that merged tokens attract attention in proportion to
how many patches they represent. The reduction step, when enabled, runs
between attention and the MLP, clustering on the per-head-mean attention
keys and merging the hidden states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import erf

from .errors import NonPositiveSize
from .reducer import (
    MergeRecord,
    ReductionSchedule,
    StageSchedule,
    TokenBatch,
    reduce_block,
    schedule_removals,
)
from .linkage import LinkageKind


@dataclass(frozen=True)
class BlockWeights:
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    mlp_in: np.ndarray
    mlp_out: np.ndarray
    heads: int

    def __post_init__(self):
        d = self.wq.shape[0]
        for name in ("wq", "wk", "wv", "wo"):
            if getattr(self, name).shape != (d, d):
                raise ValueError(f"{name} must be ({d}, {d})")
        hidden = self.mlp_in.shape[1]
        if self.mlp_in.shape != (d, hidden) or self.mlp_out.shape != (hidden, d):
            raise ValueError("mlp_in must be (d, hidden) and mlp_out (hidden, d)")
        if self.heads < 1 or d % self.heads != 0:
            raise ValueError(f"heads must divide the model dim {d}")

    @property
    def dim(self) -> int:
        return self.wq.shape[0]


def random_block_weights(
    rng: np.random.Generator, dim: int, hidden: int, heads: int, scale: float = 0.02
) -> BlockWeights:
    """Seeded random weights for reproducible fixtures and demos."""
    return BlockWeights(
        wq=scale * rng.standard_normal((dim, dim)),
        wk=scale * rng.standard_normal((dim, dim)),
        wv=scale * rng.standard_normal((dim, dim)),
        wo=scale * rng.standard_normal((dim, dim)),
        mlp_in=scale * rng.standard_normal((dim, hidden)),
        mlp_out=scale * rng.standard_normal((hidden, dim)),
        heads=heads,
    )


_WEIGHT_FIELDS = ("wq", "wk", "wv", "wo", "mlp_in", "mlp_out")


def save_block_weights(directory: str | Path, blocks: list[BlockWeights]) -> None:
    """Write fixture weights for a block stack as one tensor file per matrix
    kind (stacked over blocks) plus a small meta file."""
    from .tensorio import write_tensor

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in _WEIGHT_FIELDS:
        stacked = np.stack([getattr(b, name) for b in blocks])
        write_tensor(directory / f"{name}.tensor", stacked)
    (directory / "meta.json").write_text(
        json.dumps({"heads": blocks[0].heads, "blocks": len(blocks)}) + "\n"
    )


def load_block_weights(directory: str | Path) -> list[BlockWeights]:
    from .tensorio import read_tensor

    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text())
    arrays = {
        name: read_tensor(directory / f"{name}.tensor").astype(np.float64)
        for name in _WEIGHT_FIELDS
    }
    return [
        BlockWeights(
            **{name: arrays[name][i] for name in _WEIGHT_FIELDS}, heads=meta["heads"]
        )
        for i in range(meta["blocks"])
    ]


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    n, d = x.shape
    return x.reshape(n, heads, d // heads).transpose(1, 0, 2)  # (heads, n, hd)


def attention_weights(
    q: np.ndarray, k: np.ndarray, sizes: np.ndarray, heads: int
) -> np.ndarray:
    """Per-head softmax attention weights with the log-size bias.

    Returns (heads, n, n); row j of the bias is log(sizes[j]) added to key
    column j. With unit sizes the bias vanishes and this is standard scaled
    dot-product attention.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    if sizes.shape != (q.shape[0],):
        raise ValueError("sizes must have one entry per token")
    if np.any(sizes <= 0):
        raise NonPositiveSize("token sizes must be strictly positive")
    qh = _split_heads(np.asarray(q, dtype=np.float64), heads)
    kh = _split_heads(np.asarray(k, dtype=np.float64), heads)
    head_dim = qh.shape[2]
    logits = qh @ kh.transpose(0, 2, 1) / np.sqrt(head_dim)
    logits = logits + np.log(sizes)[None, None, :]
    logits -= logits.max(axis=2, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=2, keepdims=True)
    return weights


def proportional_attention(
    q: np.ndarray, k: np.ndarray, v: np.ndarray, sizes: np.ndarray, heads: int
) -> np.ndarray:
    """Size-biased multi-head attention output, heads concatenated."""
    weights = attention_weights(q, k, sizes, heads)
    vh = _split_heads(np.asarray(v, dtype=np.float64), heads)
    out = weights @ vh  # (heads, n, hd)
    n = q.shape[0]
    return out.transpose(1, 0, 2).reshape(n, -1)


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def block_forward(
    x: np.ndarray,
    w: BlockWeights,
    sizes: np.ndarray,
    reduce: tuple[LinkageKind, int] | None = None,
    protected_prefix: int = 0,
) -> tuple[np.ndarray, np.ndarray, MergeRecord | None]:
    """One transformer block, optionally reducing tokens before the MLP.

    ``reduce`` is (linkage, keep-count for the unprotected tokens). The
    clustering metric is the attention keys mean-pooled over heads; the
    merged content is the post-attention residual stream.
    """
    x = np.asarray(x, dtype=np.float64)
    sizes = np.asarray(sizes, dtype=np.int64)
    q, k, v = x @ w.wq, x @ w.wk, x @ w.wv
    hidden = x + proportional_attention(q, k, v, sizes, w.heads) @ w.wo
    keys = k.reshape(k.shape[0], w.heads, -1).mean(axis=1)

    record: MergeRecord | None = None
    if reduce is not None:
        kind, keep = reduce
        batch = TokenBatch(
            features=[hidden], sizes=[sizes], protected_prefix=protected_prefix
        )
        reduced, records = reduce_block(batch, kind, keep, metric=[keys])
        hidden, sizes, record = reduced.features[0], reduced.sizes[0], records[0]

    out = hidden + gelu(hidden @ w.mlp_in) @ w.mlp_out
    return out, sizes, record


@dataclass
class StackResult:
    features: np.ndarray
    sizes: np.ndarray
    records: list[MergeRecord | None]
    unprotected_counts: list[int]


def run_stack(
    x: np.ndarray,
    weights: list[BlockWeights],
    schedule: ReductionSchedule,
    kind: LinkageKind,
    protected_prefix: int = 0,
    sizes: np.ndarray | None = None,
) -> StackResult:
    """Run a block stack, removing tokens per the schedule.

    Keep counts are clamped so at least one unprotected token survives.
    Stage blocks always run the reduction op (an identity reduction when the
    keep rate removes nothing) so each stage yields a merge record.
    """
    x = np.asarray(x, dtype=np.float64)
    if sizes is None:
        sizes = np.ones(x.shape[0], dtype=np.int64)
    records: list[MergeRecord | None] = []
    counts: list[int] = []
    for l, w in enumerate(weights):
        n_unprot = x.shape[0] - protected_prefix
        removals = schedule_removals(schedule, l, n_current=n_unprot)
        run_reduction = removals > 0 or _is_stage_block(schedule, l)
        if run_reduction:
            keep = max(1, n_unprot - removals)
            x, sizes, record = block_forward(
                x, w, sizes, reduce=(kind, keep), protected_prefix=protected_prefix
            )
        else:
            x, sizes, record = block_forward(
                x, w, sizes, protected_prefix=protected_prefix
            )
        records.append(record)
        counts.append(x.shape[0] - protected_prefix)
    return StackResult(features=x, sizes=sizes, records=records, unprotected_counts=counts)


def _is_stage_block(schedule: ReductionSchedule, block: int) -> bool:
    return isinstance(schedule, StageSchedule) and block in schedule.blocks
