#!/usr/bin/env python3
"""A 12-block mini transformer with staged token reduction.

Tokens form a 14x14 grid plus one protected classification token. At blocks
3, 6 and 9 the unprotected tokens are clustered on their attention keys and
merged, keeping 25% each time: 196 -> 49 -> 12 -> 3. Attention is
proportional, so merged tokens attract weight according to how many patches
they carry. The final grid shows which cluster each original patch ended in.
"""

import numpy as np

from tokclust import (
    LinkageKind,
    StageSchedule,
    proportional_attention,
    random_block_weights,
    run_stack,
)

rng = np.random.default_rng(3)
side, dim, heads = 14, 64, 4
n_patches = side * side

x = rng.standard_normal((1 + n_patches, dim))  # row 0 is the protected token
weights = [random_block_weights(rng, dim, 2 * dim, heads) for _ in range(12)]
schedule = StageSchedule(blocks=(3, 6, 9), keep_rate=0.25)

result = run_stack(x, weights, schedule, LinkageKind.AVERAGE, protected_prefix=1)
print("unprotected token count per block:")
print(" ", result.unprotected_counts)
print("final sizes:", result.sizes.tolist(), f"(sum {result.sizes.sum()} = 1 + {n_patches})")

# Compose the stage assignments back to the original grid positions.
labels = np.arange(n_patches)
for record in result.records:
    if record is not None:
        labels = record.assignment.labels[labels]

print(f"\nfinal cluster per original patch ({len(set(labels.tolist()))} clusters):")
for row in labels.reshape(side, side):
    print("  " + " ".join(str(v) for v in row))

# Proportional attention in isolation: a size-8 token soaks up attention.
q = np.zeros((3, 8))
k = np.zeros((3, 8))
v = np.eye(3, 8)
sizes = np.array([1, 1, 8])
out = proportional_attention(q, k, v, sizes, heads=2)
print("\nwith equal logits and sizes (1, 1, 8), attention mass goes 10/10/80:")
print("  first output row:", np.round(out[0], 3).tolist())
