#!/usr/bin/env python3
"""Size-weighted token merging, back-projection, and the bipartite baseline.

Merging near-duplicate tokens keeps the total "token mass" (each token's
patch count times its features) intact, and the merge record lets reduced
tokens be projected back onto the original positions. The bipartite
baseline can only pair even-position tokens with odd-position ones, so it
cannot remove more than half.
"""

import numpy as np

from tokclust import (
    KeepRateTooLow,
    LinkageKind,
    TokenBatch,
    reduce_block,
    tome_bipartite_merge,
    unmerge,
)

rng = np.random.default_rng(2)

# Twelve tokens made of three noisy copies of four prototypes.
prototypes = rng.standard_normal((4, 8))
tokens = np.repeat(prototypes, 3, axis=0) + 0.01 * rng.standard_normal((12, 8))
sizes = np.ones(12, dtype=np.int64)

batch = TokenBatch(features=[tokens], sizes=[sizes])
reduced, records = reduce_block(batch, LinkageKind.AVERAGE, keep=4)
record = records[0]

print("clustered 12 tokens down to 4:")
print("  assignment:", record.assignment.labels.tolist())
print("  new sizes :", reduced.sizes[0].tolist())

mass_before = (sizes[:, None] * tokens).sum(axis=0)
mass_after = (reduced.sizes[0][:, None] * reduced.features[0]).sum(axis=0)
print(f"  weighted feature mass drift: {np.abs(mass_after - mass_before).max():.2e}")

restored = unmerge(reduced.features[0], record)
print(f"  back-projected shape: {restored.shape} (original positions restored)")
residual = np.linalg.norm(restored - tokens, axis=1).max()
print(f"  max distance from original token to its representative: {residual:.4f}")

print("\nbipartite baseline on the same tokens:")
merged, new_sizes, rec = tome_bipartite_merge(tokens, sizes, t=4)
print(f"  t=4 merges -> {rec.post_count} tokens, sizes {new_sizes.tolist()}")

try:
    tome_bipartite_merge(tokens, sizes, t=7)
except KeepRateTooLow as e:
    print(f"  t=7 rejected: {e}")

print("\nthe clustering reducer has no such bound: keep=2 works fine")
reduced2, _ = reduce_block(batch, LinkageKind.AVERAGE, keep=2)
print(f"  keep=2 -> {reduced2.features[0].shape[0]} tokens, sizes {reduced2.sizes[0].tolist()}")
