"""Conversion between the objective exponent ``m`` and the overlap level.

For two adjacent means the segment between them splits into a part owned
by the first cluster, a shared part, and a part owned by the second
cluster.  The relative length of the shared part (``r_overlap``) is a
closed-form function of ``m``:

    r = 1 - 2 / (1 + sqrt(2**m - 1))
    m = log2(((1 + r) / (1 - r))**2 + 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CalibrationError",
    "IntervalGeometry",
    "OverlapSpec",
    "interval_geometry",
    "m_from_overlap",
    "overlap_from_m",
]


class CalibrationError(ValueError):
    """Raised when ``m`` or ``r_overlap`` is outside its domain."""


def _check_m(m: float) -> float:
    m = float(m)
    if not math.isfinite(m) or m < 1.0:
        raise CalibrationError(f"m must be a finite real >= 1, got {m!r}")
    return m


def _check_overlap(r_overlap: float) -> float:
    r = float(r_overlap)
    if not (0.0 <= r < 1.0):
        raise CalibrationError(
            f"overlap must lie in the range [0, 1), got {r_overlap!r}"
        )
    return r


def m_from_overlap(r_overlap: float) -> float:
    """Return the exponent ``m`` that produces the relative overlap ``r_overlap``.

    >>> m_from_overlap(0.0)
    1.0
    """
    r = _check_overlap(r_overlap)
    ratio = (1.0 + r) / (1.0 - r)
    return math.log2(ratio * ratio + 1.0)


def overlap_from_m(m: float) -> float:
    """Inverse of :func:`m_from_overlap`."""
    m = _check_m(m)
    return 1.0 - 2.0 / (1.0 + math.sqrt(2.0**m - 1.0))


@dataclass(frozen=True)
class OverlapSpec:
    """A consistent ``(m, r_overlap)`` pair.

    Build one with :meth:`from_m` or :meth:`from_overlap`; the constructor
    itself checks that the two values agree.
    """

    m: float
    r_overlap: float

    def __post_init__(self) -> None:
        _check_m(self.m)
        _check_overlap(self.r_overlap)
        if not math.isclose(overlap_from_m(self.m), self.r_overlap, rel_tol=0, abs_tol=1e-10):
            raise CalibrationError(
                f"m={self.m!r} and r_overlap={self.r_overlap!r} are inconsistent"
            )

    @classmethod
    def from_m(cls, m: float) -> "OverlapSpec":
        m = _check_m(m)
        return cls(m=m, r_overlap=overlap_from_m(m))

    @classmethod
    def from_overlap(cls, r_overlap: float) -> "OverlapSpec":
        r = _check_overlap(r_overlap)
        return cls(m=m_from_overlap(r), r_overlap=r)


@dataclass(frozen=True)
class IntervalGeometry:
    """Lengths of the three pieces of the segment between two adjacent means.

    ``l_exclusive`` is the length owned by each cluster alone (the two are
    equal by symmetry), ``l_overlap`` the length of the shared middle piece.
    """

    l_exclusive: float
    l_overlap: float
    l_total: float

    @property
    def overlap_fraction(self) -> float:
        return self.l_overlap / self.l_total

    @property
    def overlap_bounds(self) -> tuple[float, float]:
        """Offsets of the shared piece measured from the first mean."""
        return self.l_exclusive, self.l_exclusive + self.l_overlap


def interval_geometry(m: float, l_total: float = 1.0) -> IntervalGeometry:
    """Split a segment of length ``l_total`` according to exponent ``m``.

    Parameters
    ----------
    m : float
        Objective exponent, ``m >= 1``.
    l_total : float
        Distance between the two means, must be positive.

    Returns
    -------
    IntervalGeometry
    """
    m = _check_m(m)
    l_total = float(l_total)
    if not math.isfinite(l_total) or l_total <= 0.0:
        raise CalibrationError(f"l_total must be a positive finite real, got {l_total!r}")
    l_exclusive = l_total / (1.0 + math.sqrt(2.0**m - 1.0))
    return IntervalGeometry(
        l_exclusive=l_exclusive,
        l_overlap=l_total - 2.0 * l_exclusive,
        l_total=l_total,
    )
