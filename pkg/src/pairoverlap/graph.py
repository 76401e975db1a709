"""Cluster-relation graph built from pairwise overlaps.

Clusters ``i`` and ``j`` are joined by an edge when the number of elements
shared by exactly these two clusters is strictly greater than
``gamma * min(size_i, size_j)``.  Cluster sizes count every member, so a
shared element counts towards both of its clusters.

JSON layout (``schema`` = ``"pairoverlap.graph/1"``), keys in this order::

    {
      "schema": "pairoverlap.graph/1",
      "gamma": 0.1,
      "vertices": [{"cluster": 0, "size": 212}, ...],
      "edges": [{"i": 0, "j": 1, "overlap_count": 24, "ratio": 0.113...}, ...]
    }

``ratio`` is ``overlap_count / min(size_i, size_j)``, the quantity the
threshold is applied to.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .engine import NO_CLUSTER, ClusterModel

__all__ = [
    "GRAPH_SCHEMA",
    "ClusterGraph",
    "Edge",
    "Vertex",
    "count_overlaps",
    "extract_graph",
    "from_json",
    "graph_from_counts",
    "to_dot",
    "to_json",
]

GRAPH_SCHEMA = "pairoverlap.graph/1"


class GraphFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    cluster: int
    size: int


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    overlap_count: int
    ratio: float

    def __post_init__(self):
        if not self.i < self.j:
            raise GraphFormatError(f"edge must satisfy i < j, got ({self.i}, {self.j})")
        if self.overlap_count < 0:
            raise GraphFormatError("overlap_count must be nonnegative")


@dataclass(frozen=True)
class ClusterGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise GraphFormatError(f"gamma must lie in [0, 1], got {self.gamma!r}")
        k = len(self.vertices)
        if [v.cluster for v in self.vertices] != list(range(k)):
            raise GraphFormatError("vertices must be numbered 0..k-1 in order")
        pairs = [(e.i, e.j) for e in self.edges]
        if len(set(pairs)) != len(pairs):
            raise GraphFormatError("duplicate edge")
        if any(e.j >= k for e in self.edges):
            raise GraphFormatError("edge references a missing vertex")

    @property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset((e.i, e.j) for e in self.edges)

    @property
    def sizes(self) -> list[int]:
        return [v.size for v in self.vertices]


def count_overlaps(model: ClusterModel) -> dict[tuple[int, int], int]:
    """Number of elements shared by each unordered cluster pair; zero pairs are omitted."""
    dual = model.secondary != NO_CLUSTER
    lo = np.minimum(model.primary[dual], model.secondary[dual]).tolist()
    hi = np.maximum(model.primary[dual], model.secondary[dual]).tolist()
    return dict(sorted(Counter(zip(lo, hi)).items()))


def graph_from_counts(
    sizes: Sequence[int], overlaps: Mapping[tuple[int, int], int], gamma: float
) -> ClusterGraph:
    """Apply the edge rule to precomputed cluster sizes and overlap counts."""
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma!r}")
    vertices = tuple(Vertex(i, int(s)) for i, s in enumerate(sizes))
    edges = []
    for (a, b), count in sorted(overlaps.items()):
        i, j = min(a, b), max(a, b)
        smaller = min(sizes[i], sizes[j])
        if count > gamma * smaller:
            edges.append(Edge(i, j, int(count), count / smaller))
    return ClusterGraph(vertices, tuple(edges), gamma)


def extract_graph(model: ClusterModel, gamma: float = 0.1) -> ClusterGraph:
    return graph_from_counts(model.cluster_sizes().tolist(), count_overlaps(model), gamma)


def to_dot(graph: ClusterGraph, name: str = "clusters") -> str:
    lines = [f"graph {name} {{"]
    for v in graph.vertices:
        lines.append(f'  C{v.cluster} [label="C{v.cluster} (n={v.size})"];')
    for e in graph.edges:
        lines.append(f'  C{e.i} -- C{e.j} [label="{e.overlap_count}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _as_dict(graph: ClusterGraph) -> dict:
    return {
        "schema": GRAPH_SCHEMA,
        "gamma": graph.gamma,
        "vertices": [{"cluster": v.cluster, "size": v.size} for v in graph.vertices],
        "edges": [
            {"i": e.i, "j": e.j, "overlap_count": e.overlap_count, "ratio": e.ratio}
            for e in graph.edges
        ],
    }


def to_json(graph: ClusterGraph) -> str:
    return json.dumps(_as_dict(graph), indent=2) + "\n"


def from_json(text: str) -> ClusterGraph:
    """Parse the output of :func:`to_json`, enforcing the graph invariants."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from exc
    if payload.get("schema") != GRAPH_SCHEMA:
        raise GraphFormatError(f"unsupported graph schema {payload.get('schema')!r}")
    try:
        vertices = tuple(Vertex(int(v["cluster"]), int(v["size"])) for v in payload["vertices"])
        edges = tuple(
            Edge(int(e["i"]), int(e["j"]), int(e["overlap_count"]), float(e["ratio"]))
            for e in payload["edges"]
        )
        return ClusterGraph(vertices, edges, float(payload["gamma"]))
    except (KeyError, TypeError) as exc:
        raise GraphFormatError(f"malformed graph document: {exc!r}") from exc
