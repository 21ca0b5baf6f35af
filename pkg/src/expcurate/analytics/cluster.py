"""Clustering: Lloyd's k-means with k-means++ seeding, and average-linkage
agglomerative merging. Both are deterministic (k-means given its seed)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from expcurate.errors import BadK

KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class KMeansResult:
    assignments: tuple
    centroids: tuple  # of coordinate tuples
    inertia: float
    inertia_history: tuple
    iterations: int

    def to_record(self):
        return {
            "assignments": list(self.assignments),
            "centroids": [list(c) for c in self.centroids],
            "inertia": self.inertia,
            "iterations": self.iterations,
        }


def _sq_dist_to(points, centroid):
    diff = points - centroid
    return np.einsum("ij,ij->i", diff, diff)


def _kmeanspp_init(points, k, rng):
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = _sq_dist_to(points, points[chosen[0]])
    while len(chosen) < k:
        total = float(d2.sum())
        if total <= 0.0:
            remaining = [i for i in range(n) if i not in set(chosen)]
            chosen.append(int(rng.choice(remaining)))
        else:
            idx = int(rng.choice(n, p=d2 / total))
            chosen.append(idx)
        d2 = np.minimum(d2, _sq_dist_to(points, points[chosen[-1]]))
    return points[chosen].copy()


def kmeans(matrix, k, seed) -> KMeansResult:
    """Lloyd's iterations from seeded k-means++; stops when assignments stabilize."""
    points = np.asarray(matrix, dtype=float)
    if points.ndim != 2:
        points = points.reshape(len(points), -1)
    n = points.shape[0]
    if k < 1 or k > n:
        raise BadK(f"k={k} with {n} rows")
    rng = np.random.default_rng(seed)
    centroids = _kmeanspp_init(points, k, rng)
    assignments = None
    history = []
    iterations = 0
    for iterations in range(1, KMEANS_MAX_ITER + 1):
        d2 = np.stack([_sq_dist_to(points, c) for c in centroids], axis=1)
        new_assignments = np.argmin(d2, axis=1)
        # repopulate empty clusters with the point farthest from its centroid
        for cluster in range(k):
            if not np.any(new_assignments == cluster):
                worst = int(np.argmax(d2[np.arange(n), new_assignments]))
                new_assignments[worst] = cluster
                centroids[cluster] = points[worst]
                d2[:, cluster] = _sq_dist_to(points, centroids[cluster])
        inertia = float(d2[np.arange(n), new_assignments].sum())
        history.append(inertia)
        if assignments is not None and np.array_equal(new_assignments, assignments):
            break
        assignments = new_assignments
        for cluster in range(k):
            members = points[assignments == cluster]
            if len(members):
                centroids[cluster] = members.mean(axis=0)
    return KMeansResult(
        assignments=tuple(int(a) for a in assignments),
        centroids=tuple(tuple(float(x) for x in c) for c in centroids),
        inertia=history[-1],
        inertia_history=tuple(history),
        iterations=iterations,
    )


def agglomerative(matrix, k) -> tuple:
    """Average-linkage merging with Euclidean distances, cut at k clusters.

    Ties break on the smallest (i, j) slot pair, where a cluster lives at
    the slot of its smallest member; duplicate points therefore merge first.
    """
    points = np.asarray(matrix, dtype=float)
    if points.ndim != 2:
        points = points.reshape(len(points), -1)
    n = points.shape[0]
    if k < 1 or k > n:
        raise BadK(f"k={k} with {n} rows")
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    upper_i, upper_j = np.triu_indices(n, 1)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=float)
    members = {i: [i] for i in range(n)}
    remaining = n
    while remaining > k:
        # argmin over the upper triangle scans row-major, so equal distances
        # resolve to the smallest (i, j) slot pair
        flat = dist[upper_i, upper_j]
        at = int(np.argmin(flat))
        i, j = int(upper_i[at]), int(upper_j[at])
        others = active.copy()
        others[i] = others[j] = False
        merged = (sizes[i] * dist[i, others] + sizes[j] * dist[j, others]) / (
            sizes[i] + sizes[j]
        )
        dist[i, others] = merged
        dist[others, i] = merged
        active[j] = False
        dist[j, :] = np.inf
        dist[:, j] = np.inf
        sizes[i] += sizes[j]
        members[i].extend(members.pop(j))
        remaining -= 1
    slots = sorted(slot for slot in members)
    relabel = {slot: rank for rank, slot in enumerate(slots)}
    assignments = [0] * n
    for slot, pts in members.items():
        for p in pts:
            assignments[p] = relabel[slot]
    return tuple(assignments)
