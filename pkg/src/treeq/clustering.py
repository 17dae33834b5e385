"""Bottom-up agglomerative clustering with an adaptive distance threshold.

Clusters merge greedily by the chosen Euclidean linkage until the minimum
inter-cluster linkage distance exceeds the threshold. Ties pick the lowest
index pair, so results are deterministic in the input order. The adaptive
variant sweeps the threshold upward in fixed increments until the cluster
count drops to the requested maximum.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

LINKAGES = ("ward", "complete", "average")


@dataclass
class ClusterResult:
    """Flat clustering: one contiguous label per input point."""

    labels: np.ndarray
    n_clusters: int
    threshold_used: float


def _merge_sequence(points: np.ndarray, linkage: str) -> list[tuple[int, int, float]]:
    """Full greedy merge order as (i, j, height) triples over slot indices
    (a merged cluster keeps the lower slot). Heights are non-decreasing for
    all supported linkages."""
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}")
    n = len(points)
    if n == 1:
        return []
    diff = points[:, None, :] - points[None, :, :]
    D = np.sqrt((diff * diff).sum(axis=2))
    # only the upper triangle is searched; everything else is masked off
    masked = np.full((n, n), np.inf)
    iu = np.triu_indices(n, k=1)
    masked[iu] = D[iu]
    size = np.ones(n)
    active = np.ones(n, dtype=bool)

    merges = []
    for _ in range(n - 1):
        flat = int(np.argmin(masked))
        i, j = divmod(flat, n)
        height = masked[i, j]
        merges.append((i, j, float(height)))

        # Lance-Williams update of distances from the merged cluster (slot i)
        # to every other active cluster k.
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        if len(others):
            d_ik = np.where(others < i, masked[others, i], masked[i, others])
            d_jk = np.where(others < j, masked[others, j], masked[j, others])
            if linkage == "complete":
                d_new = np.maximum(d_ik, d_jk)
            elif linkage == "average":
                d_new = (size[i] * d_ik + size[j] * d_jk) / (size[i] + size[j])
            else:  # ward, on Euclidean distances
                s = size[i] + size[j] + size[others]
                d_new = np.sqrt(
                    (
                        (size[i] + size[others]) * d_ik**2
                        + (size[j] + size[others]) * d_jk**2
                        - size[others] * height**2
                    )
                    / s
                )
            lo = others < i
            masked[others[lo], i] = d_new[lo]
            masked[i, others[~lo]] = d_new[~lo]

        size[i] += size[j]
        active[j] = False
        masked[j, :] = np.inf
        masked[:, j] = np.inf
    return merges


def _labels_from_merges(
    n: int, merges: list[tuple[int, int, float]], n_merges: int
) -> np.ndarray:
    """Apply the first `n_merges` merges with union-find and relabel
    clusters contiguously by smallest member index."""
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j, _ in merges[:n_merges]:
        parent[find(j)] = find(i)

    roots: dict[int, int] = {}
    labels = np.empty(n, dtype=int)
    for p in range(n):
        r = find(p)
        if r not in roots:
            roots[r] = len(roots)
        labels[p] = roots[r]
    return labels


def agglomerate(points, threshold: float, linkage: str = "ward") -> ClusterResult:
    """Cluster `points` (n, d) or (n,), merging until the minimum linkage
    distance exceeds `threshold`."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) == 0:
        raise ValueError("need at least one point")
    merges = _merge_sequence(X, linkage)
    n_apply = sum(1 for _, _, h in merges if h <= threshold)
    labels = _labels_from_merges(len(X), merges, n_apply)
    return ClusterResult(labels, len(X) - n_apply, float(threshold))


def adaptive_cluster(
    points,
    start: float = 0.1,
    step: float = 0.001,
    max_clusters: int = 1,
    linkage: str = "ward",
) -> ClusterResult:
    """Sweep the threshold start, start+step, ... and return the first
    clustering with at most `max_clusters` clusters.

    Equivalent to repeated `agglomerate` calls at the swept thresholds
    because merge heights are non-decreasing; the merge order is computed
    once and cut at each threshold. Always terminates: a large enough
    threshold yields a single cluster.
    """
    if max_clusters < 1:
        raise ValueError("max_clusters must be >= 1")
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if len(X) == 0:
        raise ValueError("need at least one point")
    merges = _merge_sequence(X, linkage)
    heights = [h for _, _, h in merges]
    n = len(X)

    i = 0
    while True:
        t = start + i * step
        n_apply = bisect_right(heights, t)
        if n - n_apply <= max_clusters:
            break
        # jump straight to the first threshold past the next needed merge
        # height instead of stepping one increment at a time
        need = heights[n - max_clusters - 1]
        i = max(i + 1, int(np.ceil((need - start) / step - 1e-12)))
    labels = _labels_from_merges(n, merges, n_apply)
    return ClusterResult(labels, n - n_apply, float(t))
