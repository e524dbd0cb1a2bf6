"""Shared test utilities: partition metrics and synthetic data generators."""

import numpy as np

from tokclust import TargetClusters, cut_dendrogram


def comb2(v: int) -> int:
    return v * (v - 1) // 2


def adjusted_rand_index(a, b) -> float:
    """Exact ARI from the pair-counting contingency table."""
    a = list(a)
    b = list(b)
    n = len(a)
    assert n == len(b) and n > 1
    from collections import Counter

    joint = Counter(zip(a, b))
    sum_joint = sum(comb2(v) for v in joint.values())
    sum_a = sum(comb2(v) for v in Counter(a).values())
    sum_b = sum(comb2(v) for v in Counter(b).values())
    total = comb2(n)
    expected = sum_a * sum_b / total
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        return 1.0
    return (sum_joint - expected) / (max_index - expected)


def separated_groups(rng, n_groups=3, per_group=20, dim=16, sigma=0.02):
    """Gaussian blobs around orthonormal unit centers.

    Orthonormal centers are sqrt(2) apart in Euclidean distance, far beyond
    10*sigma, so the generating labels are the unique sensible partition.
    """
    m = rng.standard_normal((dim, n_groups))
    q, _ = np.linalg.qr(m)
    centers = q.T
    labels = np.repeat(np.arange(n_groups), per_group)
    points = centers[labels] + sigma * rng.standard_normal((len(labels), dim))
    return points, labels


def partitions_agree_at_every_k(reference, other) -> bool:
    """Compare the flat cuts of two complete dendrograms at every k."""
    n = reference.n_leaves
    for k in range(1, n + 1):
        a = cut_dendrogram(reference, TargetClusters(k))
        b = cut_dendrogram(other, TargetClusters(k))
        if not np.array_equal(a.labels, b.labels):
            return False
    return True
