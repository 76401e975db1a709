"""Pairwise overlapping k-means clustering and cluster-relation graphs."""

from .calibration import (
    CalibrationError,
    IntervalGeometry,
    OverlapSpec,
    interval_geometry,
    m_from_overlap,
    overlap_from_m,
)
from .engine import (
    Assignment,
    ClusterModel,
    Dataset,
    FitConfig,
    assign_element,
    fit,
    fit_multi_restart,
    initialize_means,
    objective,
    update_means,
)
from .graph import ClusterGraph, count_overlaps, extract_graph, to_dot, to_json

__version__ = "0.1.0"
