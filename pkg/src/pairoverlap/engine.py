"""Pairwise overlapping k-means.

Every element belongs to one or two clusters.  The fitted objective is

    J(H; A) = sum_j  sum_i h_ij * ||x_j - a_i||^2 / (sum_i h_ij)^m

so an element owned by a single cluster pays its squared distance to that
mean, while an element shared by two clusters pays the sum of both squared
distances divided by ``2**m``.  The fit alternates an Assignment step (each
element picks the cheapest of "nearest mean only" and "two nearest means")
with an Update step (weighted means, shared members weighted ``2**-m``).

Assignments are held internally as two integer arrays of length N:
``primary`` (nearest mean) and ``secondary`` (second nearest mean, or
``-1`` when the element is exclusive).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

__all__ = [
    "NO_CLUSTER",
    "INIT_METHODS",
    "Assignment",
    "ClusterModel",
    "Dataset",
    "FitConfig",
    "StepRecord",
    "assign_all",
    "assign_element",
    "fit",
    "fit_multi_restart",
    "greedy_spread",
    "initialize_means",
    "objective",
    "restart_seed",
    "run_restarts",
    "select_best",
    "update_means",
]

logger = logging.getLogger(__name__)

NO_CLUSTER = -1
INIT_METHODS = ("random-points", "greedy-spread")

#: Mean coordinates moving less than this are treated as unchanged.
MEAN_TOLERANCE = 1e-10


class Dataset:
    """An ``N x n`` matrix of finite reals with optional unique row labels."""

    __slots__ = ("points", "labels")

    def __init__(self, points, labels: Optional[Sequence[str]] = None):
        arr = np.array(points, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"points must be a non-empty N x n matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            row, col = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite value at row {row}, column {col}")
        arr.setflags(write=False)
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != arr.shape[0]:
                raise ValueError(f"got {len(labels)} labels for {arr.shape[0]} points")
            if len(set(labels)) != len(labels):
                seen = set()
                dup = next(s for s in labels if s in seen or seen.add(s))
                raise ValueError(f"duplicate row label {dup!r}")
        object.__setattr__(self, "points", arr)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("Dataset is immutable")

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return f"Dataset(N={self.n_points}, n={self.n_features}, labelled={self.labels is not None})"

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_features(self) -> int:
        return self.points.shape[1]


class Assignment(NamedTuple):
    """Membership of a single element: its nearest cluster and, if shared, the second one."""

    primary: int
    secondary: Optional[int] = None

    @property
    def is_dual(self) -> bool:
        return self.secondary is not None

    @property
    def clusters(self) -> tuple[int, ...]:
        if self.secondary is None:
            return (self.primary,)
        return (self.primary, self.secondary)


AssignmentsLike = Union[Sequence[Assignment], tuple[np.ndarray, np.ndarray]]


def _as_arrays(assignments: AssignmentsLike) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(assignments, tuple) and len(assignments) == 2 and isinstance(assignments[0], np.ndarray):
        primary, secondary = assignments
        return np.asarray(primary, dtype=np.int64), np.asarray(secondary, dtype=np.int64)
    primary = np.fromiter((a[0] for a in assignments), dtype=np.int64)
    secondary = np.fromiter(
        (NO_CLUSTER if a[1] is None else a[1] for a in assignments), dtype=np.int64
    )
    return primary, secondary


def _to_assignments(primary: np.ndarray, secondary: np.ndarray) -> list[Assignment]:
    return [
        Assignment(int(p), None if s == NO_CLUSTER else int(s))
        for p, s in zip(primary.tolist(), secondary.tolist())
    ]


def _points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    arr = np.asarray(data, dtype=np.float64)
    return arr.reshape(-1, 1) if arr.ndim == 1 else arr


def _check_means(means, n_features: int) -> np.ndarray:
    means = np.asarray(means, dtype=np.float64)
    if means.ndim == 1:
        means = means.reshape(-1, 1) if n_features == 1 else means.reshape(1, -1)
    if means.ndim != 2 or means.shape[0] == 0:
        raise ValueError("means must be a non-empty k x n matrix")
    if means.shape[1] != n_features:
        raise ValueError(
            f"dimension mismatch: data has {n_features} features, means have {means.shape[1]}"
        )
    return means


def _check_m(m: float) -> float:
    m = float(m)
    if not np.isfinite(m) or m < 1.0:
        raise ValueError(f"m must be a finite real >= 1, got {m!r}")
    return m


def squared_distances(points: np.ndarray, means: np.ndarray) -> np.ndarray:
    """``N x k`` matrix of squared Euclidean distances."""
    diff = points[:, None, :] - means[None, :, :]
    return np.einsum("jkd,jkd->jk", diff, diff)


def _canonical(primary: np.ndarray, secondary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    exclusive = secondary == NO_CLUSTER
    lo = np.where(exclusive, primary, np.minimum(primary, secondary))
    hi = np.where(exclusive, NO_CLUSTER, np.maximum(primary, secondary))
    return lo, hi


def same_memberships(a: tuple[np.ndarray, np.ndarray], b: tuple[np.ndarray, np.ndarray]) -> bool:
    """True when two assignment states encode the same matrix H.

    The order of a shared element's two clusters only records which mean
    was nearer, so it is ignored.
    """
    (lo_a, hi_a), (lo_b, hi_b) = _canonical(*a), _canonical(*b)
    return np.array_equal(lo_a, lo_b) and np.array_equal(hi_a, hi_b)


def _assign(dist: np.ndarray, m: float) -> tuple[np.ndarray, np.ndarray]:
    n_points, k = dist.shape
    if k == 1:
        return np.zeros(n_points, dtype=np.int64), np.full(n_points, NO_CLUSTER, dtype=np.int64)
    # stable sort: equal distances resolve to the lowest cluster index
    order = np.argsort(dist, axis=1, kind="stable")
    first, second = order[:, 0], order[:, 1]
    rows = np.arange(n_points)
    d1, d2 = dist[rows, first], dist[rows, second]
    exclusive = d1 < (d1 + d2) / 2.0**m
    secondary = np.where(exclusive, NO_CLUSTER, second)
    return first.astype(np.int64), secondary.astype(np.int64)


def assign_all(data, means, m: float) -> tuple[np.ndarray, np.ndarray]:
    """Assignment step for every element.

    Returns ``(primary, secondary)`` integer arrays; ``secondary`` holds
    ``NO_CLUSTER`` for exclusively assigned elements.
    """
    points = _points(data)
    means = _check_means(means, points.shape[1])
    return _assign(squared_distances(points, means), _check_m(m))


def assign_element(x, means, m: float) -> Assignment:
    """Cheapest membership of one element given fixed means.

    With ``d1 <= d2`` the two smallest squared distances, the element is
    exclusive to the nearest mean when ``d1 < (d1 + d2) / 2**m`` and shared
    by the two nearest means otherwise.
    """
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    means = _check_means(means, x.shape[1])
    primary, secondary = _assign(squared_distances(x, means), _check_m(m))
    s = int(secondary[0])
    return Assignment(int(primary[0]), None if s == NO_CLUSTER else s)


def _weights(secondary: np.ndarray, m: float) -> np.ndarray:
    return np.where(secondary == NO_CLUSTER, 1.0, 2.0**-m)


def _contributions(points, means, primary, secondary, m) -> np.ndarray:
    d_primary = np.einsum("jd,jd->j", points - means[primary], points - means[primary])
    dual = secondary != NO_CLUSTER
    contrib = d_primary.copy()
    if np.any(dual):
        diff = points[dual] - means[secondary[dual]]
        d_secondary = np.einsum("jd,jd->j", diff, diff)
        contrib[dual] = (d_primary[dual] + d_secondary) / 2.0**m
    return contrib


def update_means(data, assignments: AssignmentsLike, k: int, m: float) -> np.ndarray:
    """Update step: weighted mean of each cluster's members.

    Exclusive members carry weight 1 and shared members weight ``2**-m``.
    A cluster with no members is re-seeded at the data point that
    contributes most to the objective under the freshly updated means
    (several empty clusters take successive distinct points).
    """
    points = _points(data)
    primary, secondary = _as_arrays(assignments)
    m = _check_m(m)
    if primary.shape[0] != points.shape[0]:
        raise ValueError(f"{primary.shape[0]} assignments for {points.shape[0]} points")
    if primary.max(initial=0) >= k or secondary.max(initial=0) >= k:
        raise ValueError(f"assignment references a cluster >= k={k}")

    w = _weights(secondary, m)
    dual = secondary != NO_CLUSTER
    n_features = points.shape[1]
    totals = np.zeros((k, n_features))
    mass = np.zeros(k)
    np.add.at(totals, primary, points * w[:, None])
    np.add.at(mass, primary, w)
    np.add.at(totals, secondary[dual], points[dual] * w[dual, None])
    np.add.at(mass, secondary[dual], w[dual])

    means = np.zeros((k, n_features))
    filled = mass > 0
    means[filled] = totals[filled] / mass[filled, None]

    empty = np.flatnonzero(~filled)
    if empty.size:
        contrib = _contributions(points, means, primary, secondary, m)
        donors = np.argsort(-contrib, kind="stable")[: empty.size]
        means[empty] = points[donors]
        logger.debug("re-seeded empty clusters %s at points %s", empty.tolist(), donors.tolist())
    return means


def objective(data, assignments: AssignmentsLike, means, m: float) -> float:
    """Objective value ``J(H; A)`` for the given memberships and means."""
    points = _points(data)
    means = _check_means(means, points.shape[1])
    primary, secondary = _as_arrays(assignments)
    if primary.shape[0] != points.shape[0]:
        raise ValueError(f"{primary.shape[0]} assignments for {points.shape[0]} points")
    return float(_contributions(points, means, primary, secondary, _check_m(m)).sum())


def greedy_spread(points, k: int, first: int) -> np.ndarray:
    """Farthest-point seeding starting from row ``first``.

    Each next mean is the row with the largest squared distance to its
    nearest already chosen mean; ties go to the lowest row index.
    Returns the chosen row indices.
    """
    points = _points(points)
    chosen = [int(first)]
    nearest = np.einsum("jd,jd->j", points - points[first], points - points[first])
    for _ in range(1, k):
        nxt = int(np.argmax(nearest))
        chosen.append(nxt)
        diff = points - points[nxt]
        nearest = np.minimum(nearest, np.einsum("jd,jd->j", diff, diff))
    return np.array(chosen, dtype=np.int64)


def initialize_means(data, k: int, method: str = "random-points", seed: int = 0) -> np.ndarray:
    points = _points(data)
    n_points = points.shape[0]
    if k < 1 or k > n_points:
        raise ValueError(f"k must satisfy 1 <= k <= N={n_points}, got k={k}")
    rng = np.random.default_rng(seed)
    if method == "random-points":
        idx = rng.choice(n_points, size=k, replace=False)
    elif method == "greedy-spread":
        idx = greedy_spread(points, k, int(rng.integers(n_points)))
    else:
        raise ValueError(f"unknown init method {method!r}; expected one of {INIT_METHODS}")
    return points[idx].copy()


@dataclass(frozen=True)
class FitConfig:
    k: int
    m: float
    init: str = "random-points"
    restarts: int = 1
    max_iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        _check_m(self.m)
        if self.init not in INIT_METHODS:
            raise ValueError(f"unknown init method {self.init!r}; expected one of {INIT_METHODS}")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ValueError(f"restarts must be an integer >= 1, got {self.restarts!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be an integer >= 1, got {self.max_iterations!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Result of a fit.

    Attributes
    ----------
    means : ndarray, shape (k, n)
    primary, secondary : ndarray, shape (N,)
        Membership arrays; ``secondary`` is ``NO_CLUSTER`` for exclusive elements.
    objective : float
        ``J`` at the returned state.
    iterations : int
        Number of Update steps performed.
    converged : bool
        False only when ``max_iterations`` was exhausted first.
    objective_trace : tuple of float
        ``J`` after the initial Assignment step and after every later half-step.
    """

    means: np.ndarray
    primary: np.ndarray
    secondary: np.ndarray
    objective: float
    iterations: int
    m: float
    seed: int
    converged: bool = True
    objective_trace: tuple = ()

    def __post_init__(self):
        for arr in (self.means, self.primary, self.secondary):
            arr.setflags(write=False)
        k = self.means.shape[0]
        if self.primary.max(initial=0) >= k or self.secondary.max(initial=0) >= k:
            raise ValueError("assignment references a cluster >= k")
        dual = self.secondary != NO_CLUSTER
        if np.any(self.secondary[dual] == self.primary[dual]):
            raise ValueError("an element cannot be dual-assigned to the same cluster twice")

    @property
    def k(self) -> int:
        return self.means.shape[0]

    @property
    def n_points(self) -> int:
        return self.primary.shape[0]

    @property
    def assignments(self) -> list[Assignment]:
        return _to_assignments(self.primary, self.secondary)

    @property
    def dual_mask(self) -> np.ndarray:
        return self.secondary != NO_CLUSTER

    def cluster_sizes(self) -> np.ndarray:
        """Members per cluster; a shared element counts towards both of its clusters."""
        sizes = np.bincount(self.primary, minlength=self.k)
        sizes += np.bincount(self.secondary[self.dual_mask], minlength=self.k)
        return sizes

    def to_dict(self) -> dict:
        return {
            "schema": "pairoverlap.model/1",
            "k": self.k,
            "m": self.m,
            "seed": self.seed,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "means": self.means.tolist(),
            "assignments": [
                [p] if s == NO_CLUSTER else [p, s]
                for p, s in zip(self.primary.tolist(), self.secondary.tolist())
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ClusterModel":
        if payload.get("schema") != "pairoverlap.model/1":
            raise ValueError(f"unsupported model schema {payload.get('schema')!r}")
        rows = payload["assignments"]
        if any(len(r) not in (1, 2) for r in rows):
            raise ValueError("every element must belong to one or two clusters")
        primary = np.array([r[0] for r in rows], dtype=np.int64)
        secondary = np.array([r[1] if len(r) == 2 else NO_CLUSTER for r in rows], dtype=np.int64)
        return cls(
            means=np.array(payload["means"], dtype=np.float64),
            primary=primary,
            secondary=secondary,
            objective=float(payload["objective"]),
            iterations=int(payload["iterations"]),
            m=float(payload["m"]),
            seed=int(payload["seed"]),
            converged=bool(payload["converged"]),
        )


class StepRecord(NamedTuple):
    """One half-step of a fit, as collected by ``fit(..., trace=[])``."""

    stage: str  # "assign" or "update"
    iteration: int
    objective: float
    primary: np.ndarray
    secondary: np.ndarray


def fit(
    data,
    config: FitConfig,
    initial_means=None,
    trace: Optional[list] = None,
) -> ClusterModel:
    """Run one alternating fit from ``config.seed`` (or from ``initial_means``).

    The loop stops at a fixed point: an Assignment step that changes no
    membership, following an Update step that moved no mean coordinate by
    ``MEAN_TOLERANCE`` or more.  ``config.restarts`` is ignored here.

    If ``trace`` is a list, a :class:`StepRecord` is appended after every
    half-step, starting with the initial Assignment step (iteration 0).
    """
    points = _points(data)
    n_points = points.shape[0]
    if config.k > n_points:
        raise ValueError(f"k={config.k} exceeds the number of points N={n_points}")
    m = config.m
    if initial_means is None:
        means = initialize_means(points, config.k, config.init, config.seed)
    else:
        means = _check_means(initial_means, points.shape[1]).copy()
        if means.shape[0] != config.k:
            raise ValueError(f"initial_means has {means.shape[0]} rows, expected k={config.k}")

    def record(stage, it, p, s, mu):
        j = float(_contributions(points, mu, p, s, m).sum())
        history.append(j)
        if trace is not None:
            trace.append(StepRecord(stage, it, j, p, s))

    history: list[float] = []
    primary, secondary = _assign(squared_distances(points, means), m)
    record("assign", 0, primary, secondary, means)

    converged = False
    iterations = 0
    while iterations < config.max_iterations:
        iterations += 1
        new_means = update_means(points, (primary, secondary), config.k, m)
        shift = float(np.max(np.abs(new_means - means)))
        means = new_means
        record("update", iterations, primary, secondary, means)

        new_primary, new_secondary = _assign(squared_distances(points, means), m)
        unchanged = same_memberships((new_primary, new_secondary), (primary, secondary))
        primary, secondary = new_primary, new_secondary
        record("assign", iterations, primary, secondary, means)
        if unchanged and shift < MEAN_TOLERANCE:
            converged = True
            break

    if not converged:
        logger.warning("fit stopped after max_iterations=%d without reaching a fixed point", config.max_iterations)
    return ClusterModel(
        means=means,
        primary=primary,
        secondary=secondary,
        objective=history[-1],
        iterations=iterations,
        m=m,
        seed=int(config.seed),
        converged=converged,
        objective_trace=tuple(history),
    )


def restart_seed(seed: int, restart: int) -> int:
    """Seed for restart ``restart`` of a multi-restart fit.

    Restart 0 reuses ``seed`` itself, so a single restart reproduces
    :func:`fit`.  Later restarts draw one 64-bit word from
    ``numpy.random.SeedSequence(seed, spawn_key=(restart,))``, which is
    platform independent.
    """
    if restart == 0:
        return int(seed)
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(restart),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_restarts(data, config: FitConfig, workers: int = 1) -> list[ClusterModel]:
    """Fit ``config.restarts`` independent runs; results are in restart order."""
    points = _points(data)
    configs = [
        replace(config, restarts=1, seed=restart_seed(config.seed, r)) for r in range(config.restarts)
    ]
    if workers <= 1 or len(configs) == 1:
        return [fit(points, c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: fit(points, c), configs))


def select_best(models: Iterable[ClusterModel]) -> tuple[int, ClusterModel]:
    """Lowest objective wins; ties go to the lowest restart index."""
    return min(enumerate(models), key=lambda im: (im[1].objective, im[0]))


def fit_multi_restart(data, config: FitConfig, workers: int = 1) -> ClusterModel:
    return select_best(run_restarts(data, config, workers=workers))[1]
