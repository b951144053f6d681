"""Emitter position estimation from RSS trace maxima.

Each qualifying trace maximum yields one triangulation line: perpendicular to
the patrol edge for omni sensing, or along the antenna's global boresight for
directional sensing. Two or more lines are intersected in the least-squares
sense; an estimate inside the map counts as a successful localization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import MapBounds
from .rf import Sensing
from .simulate import RssTrace

# Near-parallel line bundles produce an ill-conditioned normal matrix and
# wildly uncertain intersections; reject rather than regularize.
CONDITION_LIMIT = 1e8


class InsufficientLinesError(ValueError):
    """Fewer than two triangulation lines were supplied."""


class DegenerateGeometryError(ValueError):
    """The line bundle is (near-)parallel; no stable intersection exists."""


class TraceMaximum(NamedTuple):
    index: int
    position: np.ndarray  # (2,)
    heading: float


@dataclass(frozen=True)
class TriangulationLine:
    """An undirected localization constraint: the line through ``anchor`` at
    angle ``bearing`` (normalized to [0, pi))."""

    anchor: tuple[float, float]
    bearing: float
    provenance: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "bearing", float(self.bearing) % math.pi)


@dataclass
class LocalizationResult:
    predicted: tuple[float, float] | None
    line_count: int
    success: bool
    residual: float


def extract_maximum(
    trace: RssTrace,
    detection_threshold: float,
    min_prominence_db: float = 0.0,
) -> TraceMaximum | None:
    """The qualifying argmax sample of a trace, or None.

    The maximum must reach the detection threshold and be an interior sample.
    A maximum at either end means the closest approach (or boresight
    crossing, for rotation sweeps) lies beyond the traversed segment and
    carries no bearing information. ``min_prominence_db`` additionally
    requires the peak to stand above both trace ends, suppressing
    noise-induced peaks on flat traces. Ties resolve to the lowest index.
    """
    rss = trace.rss_dbm
    idx = int(np.argmax(rss))
    if rss[idx] < detection_threshold:
        return None
    if idx in (0, len(rss) - 1):
        return None
    if min_prominence_db > 0.0:
        if rss[idx] < rss[0] + min_prominence_db or rss[idx] < rss[-1] + min_prominence_db:
            return None
    return TraceMaximum(idx, trace.positions[idx], float(trace.headings[idx]))


def line_from_maximum(trace: RssTrace, maximum: TraceMaximum) -> TriangulationLine:
    """Triangulation line through a trace maximum.

    Omni: perpendicular to the edge direction. Directional: the antenna's
    global boresight at the maximum (heading plus mount offset), which for
    vertex traces points at the sweep angle of strongest reception.
    """
    if trace.sensing is Sensing.OMNI:
        bearing = maximum.heading + math.pi / 2.0
    else:
        bearing = maximum.heading + trace.mount_offset
    return TriangulationLine(
        anchor=(float(maximum.position[0]), float(maximum.position[1])),
        bearing=bearing,
        provenance=(trace.segment, trace.antenna_index),
    )


def least_squares_intersection(lines) -> tuple[np.ndarray, float]:
    """Least-squares intersection point of two or more lines.

    Solves A p = b with rows [-sin phi, cos phi] and offsets
    -x0 sin phi + y0 cos phi; returns the solution and the squared residual
    norm. Raises for fewer than two lines or a near-parallel bundle.
    """
    if len(lines) < 2:
        raise InsufficientLinesError(f"need at least 2 lines, got {len(lines)}")
    phi = np.array([line.bearing for line in lines])
    anchors = np.array([line.anchor for line in lines])
    a_mat = np.column_stack((-np.sin(phi), np.cos(phi)))
    b_vec = -anchors[:, 0] * np.sin(phi) + anchors[:, 1] * np.cos(phi)
    normal = a_mat.T @ a_mat
    if np.linalg.cond(normal) > CONDITION_LIMIT:
        raise DegenerateGeometryError("triangulation lines are near-parallel")
    solution, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    residual = float(np.sum((a_mat @ solution - b_vec) ** 2))
    return solution, residual


def localize(
    traces: list[RssTrace],
    bounds: MapBounds,
    detection_threshold: float,
    min_prominence_db: float = 0.0,
) -> LocalizationResult:
    """Full pipeline from trial traces to a localization outcome.

    Success requires at least two lines, a stable intersection, and an
    estimate inside the map; anything else is a recorded failure, not an
    error.
    """
    lines = []
    for trace in traces:
        maximum = extract_maximum(trace, detection_threshold, min_prominence_db)
        if maximum is not None:
            lines.append(line_from_maximum(trace, maximum))
    if len(lines) < 2:
        return LocalizationResult(None, len(lines), False, math.nan)
    try:
        point, residual = least_squares_intersection(lines)
    except DegenerateGeometryError:
        return LocalizationResult(None, len(lines), False, math.nan)
    if not bool(bounds.contains(point)[0]):
        return LocalizationResult(None, len(lines), False, residual)
    return LocalizationResult((float(point[0]), float(point[1])), len(lines), True, residual)
