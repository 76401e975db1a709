"""Slow reference implementations used to check the engine.

Nothing here shares code with :mod:`pairoverlap.engine` beyond the
result types: distances are summed in plain Python loops, the assignment
matrix is materialized densely, and memberships are found by enumeration.
"""

from __future__ import annotations

from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .engine import NO_CLUSTER, Assignment, ClusterModel

__all__ = [
    "brute_force_assign",
    "membership_cost",
    "naive_objective",
    "reference_kmeans",
]

_TOLERANCE = 1e-10


def _sqdist(x: Sequence[float], mean: Sequence[float]) -> float:
    total = 0.0
    for a, b in zip(x, mean):
        total += (a - b) * (a - b)
    return total


def _rows(matrix) -> list[list[float]]:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr.tolist()


def membership_cost(x, means, clusters: Sequence[int], m: float) -> float:
    """One element's share of the objective for the given set of 1 or 2 clusters."""
    if len(clusters) not in (1, 2):
        raise ValueError("an element belongs to one or two clusters")
    rows = _rows(means)
    x = np.asarray(x, dtype=np.float64).ravel().tolist()
    numerator = 0.0
    for i in clusters:
        numerator += _sqdist(x, rows[i])
    return numerator / float(len(clusters)) ** m


def brute_force_assign(x, means, m: float) -> Assignment:
    """Try every singleton and every pair; keep the cheapest.

    Candidates are visited singletons first, then pairs in lexicographic
    order, and only a strictly cheaper candidate replaces the incumbent.
    The returned :class:`Assignment` lists the nearer cluster first.
    """
    rows = _rows(means)
    if not rows:
        raise ValueError("means must be non-empty")
    x = np.asarray(x, dtype=np.float64).ravel().tolist()
    if len(x) != len(rows[0]):
        raise ValueError("dimension mismatch between x and means")
    dist = [_sqdist(x, row) for row in rows]
    scale = 2.0**m

    best: tuple[int, ...] = (0,)
    best_cost = dist[0]
    for i in range(1, len(rows)):
        if dist[i] < best_cost:
            best, best_cost = (i,), dist[i]
    for i, j in combinations(range(len(rows)), 2):
        cost = (dist[i] + dist[j]) / scale
        if cost < best_cost:
            best, best_cost = (i, j), cost

    if len(best) == 1:
        return Assignment(best[0])
    i, j = best
    if dist[j] < dist[i]:
        i, j = j, i
    return Assignment(i, j)


def naive_objective(data, assignments, means, m: float) -> float:
    """Evaluate the objective term by term over a dense ``k x N`` indicator matrix."""
    points = _rows(getattr(data, "points", data))
    centers = _rows(means)
    k, n_points = len(centers), len(points)
    if isinstance(assignments, tuple) and len(assignments) == 2 and isinstance(assignments[0], np.ndarray):
        assignments = [
            Assignment(int(p), None if s == NO_CLUSTER else int(s))
            for p, s in zip(*assignments)
        ]
    if len(assignments) != n_points:
        raise ValueError(f"{len(assignments)} assignments for {n_points} points")
    if centers and points and len(centers[0]) != len(points[0]):
        raise ValueError("dimension mismatch between data and means")

    h = [[0] * n_points for _ in range(k)]
    for j, a in enumerate(assignments):
        for i in a.clusters:
            h[i][j] = 1

    total = 0.0
    for j in range(n_points):
        numerator = 0.0
        count = 0
        for i in range(k):
            numerator += _sqdist(points[j], centers[i]) * h[i][j]
            count += h[i][j]
        if not 1 <= count <= 2:
            raise ValueError(f"element {j} belongs to {count} clusters")
        total += numerator / float(count) ** m
    return total


def reference_kmeans(
    data,
    initial_means,
    max_iterations: int = 500,
    trace: Optional[list] = None,
) -> ClusterModel:
    """Plain Lloyd iteration from fixed initial means.

    Nearest mean with lowest-index tie-break, arithmetic-mean update, empty
    clusters re-seeded at the worst-served point, and the same stopping rule
    as the engine.  If ``trace`` is a list, the label vector produced by every
    assignment pass is appended to it (the initial pass included).
    """
    points = _rows(getattr(data, "points", data))
    means = _rows(initial_means)
    n_points, k = len(points), len(means)
    if k > n_points:
        raise ValueError(f"k={k} exceeds the number of points N={n_points}")

    def nearest(mu):
        labels = []
        for x in points:
            best, best_d = 0, _sqdist(x, mu[0])
            for i in range(1, k):
                d = _sqdist(x, mu[i])
                if d < best_d:
                    best, best_d = i, d
            labels.append(best)
        return labels

    labels = nearest(means)
    if trace is not None:
        trace.append(list(labels))

    converged = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        sums = [[0.0] * len(points[0]) for _ in range(k)]
        counts = [0] * k
        for x, c in zip(points, labels):
            counts[c] += 1
            for d, v in enumerate(x):
                sums[c][d] += v
        new_means = [
            [s / counts[i] for s in sums[i]] if counts[i] else None for i in range(k)
        ]
        empty = [i for i in range(k) if counts[i] == 0]
        if empty:
            cost = [_sqdist(x, new_means[c]) for x, c in zip(points, labels)]
            donors = sorted(range(n_points), key=lambda j: (-cost[j], j))
            for i, j in zip(empty, donors):
                new_means[i] = list(points[j])
        shift = max(abs(a - b) for old, new in zip(means, new_means) for a, b in zip(old, new))
        means = new_means

        new_labels = nearest(means)
        if trace is not None:
            trace.append(list(new_labels))
        unchanged = new_labels == labels
        labels = new_labels
        if unchanged and shift < _TOLERANCE:
            converged = True
            break

    objective = sum(_sqdist(x, means[c]) for x, c in zip(points, labels))
    return ClusterModel(
        means=np.array(means, dtype=np.float64),
        primary=np.array(labels, dtype=np.int64),
        secondary=np.full(n_points, NO_CLUSTER, dtype=np.int64),
        objective=objective,
        iterations=iterations,
        m=1.0,
        seed=0,
        converged=converged,
    )
