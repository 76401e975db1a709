"""Synthetic scenarios with known cluster relations, plus CSV ingestion.

A scenario is a set of isotropic Gaussian blobs and a set of "bridges".
Each bridge scatters points uniformly over the middle third of the segment
joining two blob centers, with Gaussian jitter perpendicular to the
segment.  The bridged pairs are the ground-truth edges of the cluster graph.

Scenario config files are JSON with the keys ``blobs``, ``bridges`` and
``seed``::

    {"seed": 3,
     "blobs": [{"center": [0, 0], "spread": 0.5, "count": 200}, ...],
     "bridges": [{"blob_a": 0, "blob_b": 1, "count": 25, "jitter": 0.2}, ...]}
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .engine import Dataset

__all__ = [
    "BlobSpec",
    "BridgeSpec",
    "DataError",
    "ScenarioError",
    "ScenarioTruth",
    "generate_scenario",
    "load_csv",
    "load_scenario_config",
    "square_scenario",
    "standardize",
    "write_csv",
]


class DataError(ValueError):
    """Input data cannot be turned into a valid dataset."""


class ScenarioError(ValueError):
    """A scenario description is malformed."""


@dataclass(frozen=True)
class BlobSpec:
    center: tuple[float, ...]
    spread: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.center:
            raise ScenarioError("blob center must have at least one coordinate")
        if not (self.spread > 0 and math.isfinite(self.spread)):
            raise ScenarioError(f"blob spread must be positive, got {self.spread!r}")
        if int(self.count) != self.count or self.count < 1:
            raise ScenarioError(f"blob count must be a positive integer, got {self.count!r}")


@dataclass(frozen=True)
class BridgeSpec:
    blob_a: int
    blob_b: int
    count: int
    jitter: float = 0.0

    def __post_init__(self):
        if self.blob_a == self.blob_b:
            raise ScenarioError(f"bridge joins blob {self.blob_a} to itself")
        if int(self.count) != self.count or self.count < 1:
            raise ScenarioError(f"bridge count must be a positive integer, got {self.count!r}")
        if not (self.jitter >= 0 and math.isfinite(self.jitter)):
            raise ScenarioError(f"bridge jitter must be nonnegative, got {self.jitter!r}")

    @property
    def pair(self) -> tuple[int, int]:
        return (min(self.blob_a, self.blob_b), max(self.blob_a, self.blob_b))


@dataclass(frozen=True)
class ScenarioTruth:
    """Generated points and the blob pairs that were bridged.

    ``origin[j]`` is the blob index a point was drawn from, or ``-1 - b``
    for a point of bridge ``b``.
    """

    dataset: Dataset
    true_bridges: frozenset[tuple[int, int]]
    origin: np.ndarray


def generate_scenario(
    blobs: Sequence[BlobSpec], bridges: Sequence[BridgeSpec], seed: int = 0
) -> ScenarioTruth:
    if len(blobs) < 2:
        raise ScenarioError(f"a scenario needs at least 2 blobs, got {len(blobs)}")
    dim = len(blobs[0].center)
    if any(len(b.center) != dim for b in blobs):
        raise ScenarioError("all blob centers must have the same dimension")
    for idx, br in enumerate(bridges):
        for end in (br.blob_a, br.blob_b):
            if not 0 <= end < len(blobs):
                raise ScenarioError(
                    f"bridge {idx} references blob {end}, but only blobs 0..{len(blobs) - 1} exist"
                )

    rng = np.random.default_rng(seed)
    chunks, origin = [], []
    for b_idx, blob in enumerate(blobs):
        center = np.asarray(blob.center)
        chunks.append(center + rng.normal(scale=blob.spread, size=(blob.count, dim)))
        origin.append(np.full(blob.count, b_idx))
    for br_idx, br in enumerate(bridges):
        a = np.asarray(blobs[br.blob_a].center)
        b = np.asarray(blobs[br.blob_b].center)
        direction = (b - a) / np.linalg.norm(b - a)
        t = rng.uniform(1.0 / 3.0, 2.0 / 3.0, size=br.count)
        noise = rng.normal(scale=br.jitter, size=(br.count, dim)) if br.jitter else np.zeros((br.count, dim))
        noise -= np.outer(noise @ direction, direction)
        chunks.append(a + t[:, None] * (b - a) + noise)
        origin.append(np.full(br.count, -1 - br_idx))

    return ScenarioTruth(
        dataset=Dataset(np.vstack(chunks)),
        true_bridges=frozenset(br.pair for br in bridges),
        origin=np.concatenate(origin),
    )


def square_scenario(
    side: float = 10.0,
    spread: float = 0.5,
    blob_count: int = 200,
    bridges: Sequence[tuple[int, int]] = ((0, 1), (1, 2)),
    bridge_count: int = 25,
    jitter: float = 0.2,
) -> tuple[list[BlobSpec], list[BridgeSpec]]:
    """Four blobs on the corners of a square, numbered counter-clockwise."""
    corners = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)]
    blob_specs = [BlobSpec(c, spread, blob_count) for c in corners]
    bridge_specs = [BridgeSpec(a, b, bridge_count, jitter) for a, b in bridges]
    return blob_specs, bridge_specs


def load_scenario_config(path) -> tuple[list[BlobSpec], list[BridgeSpec], int]:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = set(payload) - {"blobs", "bridges", "seed"}
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        blobs = [BlobSpec(tuple(b["center"]), float(b["spread"]), b["count"]) for b in payload["blobs"]]
        bridges = [
            BridgeSpec(int(b["blob_a"]), int(b["blob_b"]), b["count"], float(b.get("jitter", 0.0)))
            for b in payload.get("bridges", [])
        ]
        seed = int(payload.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc
    if seed < 0:
        raise ScenarioError("seed must be nonnegative")
    return blobs, bridges, seed


def load_csv(path, has_header: bool = False, label_column: Optional[str] = None) -> Dataset:
    """Read a comma-separated numeric matrix.

    Rows and columns in error messages are 1-based positions in the file.
    ``label_column`` names a header column whose values become row labels
    (so it requires ``has_header``).
    """
    if label_column is not None and not has_header:
        raise DataError("label_column requires a header row")
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    first_line = 1
    header = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        first_line = 2

    label_idx = None
    if label_column is not None:
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not in header {header}")
        label_idx = header.index(label_column)

    values, labels = [], []
    width = len(header) if header is not None else None
    for offset, row in enumerate(rows):
        line = first_line + offset
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} columns, expected {width}")
        parsed = []
        for col, cell in enumerate(row):
            if col == label_idx:
                labels.append(cell.strip())
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric value {cell!r} at row {line}, column {col + 1}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value {cell!r} at row {line}, column {col + 1}")
            parsed.append(v)
        values.append(parsed)
    if not values or not values[0]:
        raise DataError(f"{path}: no numeric data")
    try:
        return Dataset(np.array(values), labels if label_idx is not None else None)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_csv(path, data: Dataset, header: Optional[Sequence[str]] = None) -> None:
    """Write ``data`` so that :func:`load_csv` reproduces it exactly (``repr`` floats)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        labels = data.labels
        for j, row in enumerate(data.points.tolist()):
            cells = [repr(v) for v in row]
            writer.writerow(cells if labels is None else [labels[j], *cells])


def standardize(data: Dataset) -> Dataset:
    """Center each column and divide by its population standard deviation.

    Zero-variance columns stay at 0 after centering.
    """
    if data.n_points < 2:
        raise DataError("standardize needs at least 2 points")
    x = data.points
    constant = np.ptp(x, axis=0) == 0
    centered = x - x.mean(axis=0)
    sd = np.sqrt((centered**2).mean(axis=0))
    out = centered / np.where(constant, 1.0, sd)
    out[:, constant] = 0.0
    return Dataset(out, data.labels)
