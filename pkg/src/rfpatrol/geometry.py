"""Regular geometric patrol routes and their observation coverage.

A patrol route is a regular polygon (triangle, square, hexagon) traversed
clockwise. Each straight edge contributes one localization constraint per
antenna, so a point is "explicitly covered" when at least two distinct
edge/antenna units can observe it. The shape-specific relation between edge
length and the minimum sensing range needed for full internal coverage is
tabulated here together with its inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rf import Sensing

MIN_EDGE_LENGTH = 1.0  # m, optimizer lower bound for patrol edge length

# Nudge for the directional segment-parameter test: antenna rays anchored at a
# vertex are legitimate detections (the sweep covers the vertex pose), and the
# shape centroid lies exactly on such rays for the half-interior-angle offset.
# Scaled to the arithmetic precision of the kernel dtype.
_SEG_TOL = {np.dtype(np.float64): 1e-9, np.dtype(np.float32): 1e-5}


class ShapeKind(Enum):
    TRIANGLE = "triangle"
    SQUARE = "square"
    HEXAGON = "hexagon"

    @property
    def sides(self) -> int:
        return {"triangle": 3, "square": 4, "hexagon": 6}[self.value]


# Minimum sensing range for full internal coverage, as a multiple of edge
# length, per (shape, sensing) pair.
_MIN_RANGE_FACTOR = {
    (ShapeKind.TRIANGLE, Sensing.OMNI): 2.0 / math.sqrt(3.0),
    (ShapeKind.TRIANGLE, Sensing.DIRECTIONAL): 2.0 / math.sqrt(3.0),
    (ShapeKind.SQUARE, Sensing.OMNI): 0.5,
    (ShapeKind.SQUARE, Sensing.DIRECTIONAL): math.sqrt(2.0),
    (ShapeKind.HEXAGON, Sensing.OMNI): math.sqrt(3.0) / 2.0,
    (ShapeKind.HEXAGON, Sensing.DIRECTIONAL): 2.0,
}


@dataclass(frozen=True)
class MapBounds:
    """Axis-aligned rectangular map with origin at (0, 0)."""

    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0.0 or self.height <= 0.0:
            raise ValueError("map dimensions must be positive")

    def contains(self, points) -> np.ndarray:
        """Boolean mask of points inside the rectangle (inclusive edges)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = (
            (pts[:, 0] >= 0.0)
            & (pts[:, 0] <= self.width)
            & (pts[:, 1] >= 0.0)
            & (pts[:, 1] <= self.height)
        )
        return ok


@dataclass(frozen=True)
class PatrolShape:
    """Parameters of one regular patrol polygon."""

    kind: ShapeKind
    edge_length: float
    centroid: tuple[float, float]
    rotation: float

    def __post_init__(self):
        if self.edge_length <= 0.0:
            raise ValueError("edge length must be positive")

    @property
    def circumradius(self) -> float:
        n = self.kind.sides
        return self.edge_length / (2.0 * math.sin(math.pi / n))


@dataclass
class PatrolRoute:
    """A closed clockwise waypoint loop plus the sensing setup used on it."""

    shape: PatrolShape
    waypoints: np.ndarray  # (n, 2), closed loop implied (last -> first)
    sensing: Sensing
    antenna_offset: float = 0.0  # rad, +/- mount angle for directional sensing

    @property
    def n_edges(self) -> int:
        return len(self.waypoints)

    def edge(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints (start, end) of edge ``index`` in traversal order."""
        n = len(self.waypoints)
        return self.waypoints[index % n], self.waypoints[(index + 1) % n]

    def edge_bearing(self, index: int) -> float:
        a, b = self.edge(index)
        return math.atan2(b[1] - a[1], b[0] - a[0])


def min_sensing_range(kind: ShapeKind, sensing: Sensing, edge_length: float) -> float:
    """Smallest sensing range giving full internal coverage at this edge length."""
    if edge_length <= 0.0:
        raise ValueError("edge length must be positive")
    return _MIN_RANGE_FACTOR[(kind, sensing)] * edge_length


def max_edge_length(kind: ShapeKind, sensing: Sensing, sensing_range: float) -> float:
    """Longest edge fully covered internally at this sensing range (inverse of
    :func:`min_sensing_range`)."""
    if sensing_range <= 0.0:
        raise ValueError("sensing range must be positive")
    return sensing_range / _MIN_RANGE_FACTOR[(kind, sensing)]


def antenna_offset(kind: ShapeKind) -> float:
    """Directional mount angle: half the polygon's interior angle.

    Aligns each mount with the vertex-to-centroid direction at the edge ends,
    which leaves no internal blind spots at the critical edge length.
    """
    n = kind.sides
    return (n - 2) * math.pi / (2.0 * n)


def build_route(shape: PatrolShape, sensing: Sensing) -> PatrolRoute:
    """Construct the clockwise waypoint loop for a patrol shape.

    The first vertex sits at polar angle ``shape.rotation`` from the centroid;
    subsequent vertices step clockwise. Directional routes carry the
    shape-specific antenna offset.
    """
    n = shape.kind.sides
    r = shape.circumradius
    k = np.arange(n)
    angles = shape.rotation - 2.0 * np.pi * k / n
    waypoints = np.column_stack(
        (
            shape.centroid[0] + r * np.cos(angles),
            shape.centroid[1] + r * np.sin(angles),
        )
    )
    psi = antenna_offset(shape.kind) if sensing is Sensing.DIRECTIONAL else 0.0
    return PatrolRoute(shape=shape, waypoints=waypoints, sensing=sensing, antenna_offset=psi)


def _route_units(route: PatrolRoute):
    """Stacked observing units of a route: anchors, edge vectors, optional ray
    directions. One unit per edge (omni) or per edge/antenna pair (directional),
    each as a column vector ready to broadcast against query points."""
    n = route.n_edges
    a = route.waypoints
    e = np.roll(a, -1, axis=0) - a
    if route.sensing is Sensing.OMNI:
        return a, e, None
    bearings = np.arctan2(e[:, 1], e[:, 0])
    angles = np.concatenate((bearings + route.antenna_offset, bearings - route.antenna_offset))
    u = np.column_stack((np.cos(angles), np.sin(angles)))
    return np.tile(a, (2, 1)), np.tile(e, (2, 1)), u


def _observation_mask(sensing, anchors, evecs, dirs, ranges, qx, qy) -> np.ndarray:
    """(units, points) mask of which unit observes which query point."""
    tol = _SEG_TOL[qx.dtype]
    # Boundary-inclusive range: at the critical edge length the shape centroid
    # sits exactly at the sensing range, so "<= range" needs rounding slack.
    ranges = ranges * (1.0 + tol)
    ax, ay = anchors[:, :1], anchors[:, 1:]
    ex, ey = evecs[:, :1], evecs[:, 1:]
    wx, wy = qx - ax, qy - ay
    if sensing is Sensing.OMNI:
        inv_len_sq = 1.0 / (ex * ex + ey * ey)
        s = (wx * ex + wy * ey) * inv_len_sq
        cross = ex * wy - ey * wx
        # |cross| / L <= range, kept division-free
        return (s > 0.0) & (s < 1.0) & (np.abs(cross) <= ranges / np.sqrt(inv_len_sq))
    ux, uy = dirs[:, :1], dirs[:, 1:]
    inv_det = 1.0 / (ex * uy - ey * ux)  # never zero: mounts are tilted off the edge axis
    s = (wx * uy - wy * ux) * inv_det
    t = (ex * wy - ey * wx) * inv_det
    return (s >= -tol) & (s <= 1.0 + tol) & (t > 0.0) & (t <= ranges)


def multi_route_line_counts(
    routes: list[PatrolRoute],
    sensing_ranges,
    points,
    dtype=np.float64,
) -> np.ndarray:
    """Observing-unit counts per (route, point) in one batched kernel pass.

    All routes must share a sensing mode. ``dtype`` trades precision for
    speed; float32 is ample for raster work at centimeter resolutions.
    """
    sensing = routes[0].sensing
    if any(r.sensing is not sensing for r in routes):
        raise ValueError("routes must share one sensing mode")
    pts = np.atleast_2d(np.asarray(points))
    qx = np.ascontiguousarray(pts[:, 0], dtype=dtype)
    qy = np.ascontiguousarray(pts[:, 1], dtype=dtype)
    units = [_route_units(r) for r in routes]
    anchors = np.concatenate([u[0] for u in units]).astype(dtype)
    evecs = np.concatenate([u[1] for u in units]).astype(dtype)
    dirs = None
    if sensing is Sensing.DIRECTIONAL:
        dirs = np.concatenate([u[2] for u in units]).astype(dtype)
    ranges = np.concatenate(
        [np.full(len(u[0]), s) for u, s in zip(units, sensing_ranges)]
    ).astype(dtype)[:, None]
    mask = _observation_mask(sensing, anchors, evecs, dirs, ranges, qx, qy)
    counts = np.empty((len(routes), pts.shape[0]), dtype=np.int16)
    offset = 0
    for i, u in enumerate(units):
        n = len(u[0])
        counts[i] = mask[offset : offset + n].sum(axis=0, dtype=np.int16)
        offset += n
    return counts


def detection_line_counts(
    route: PatrolRoute, sensing_range: float, points, dtype=np.float64
) -> np.ndarray:
    """Number of observing units per query point.

    A unit is one edge (omni) or one edge/antenna pair (directional). Omni
    edges observe a point when its perpendicular foot falls strictly inside
    the edge within the sensing range; directional units observe along the
    mount's global bearing from some point of the edge, out to the sensing
    range.
    """
    return multi_route_line_counts([route], [sensing_range], points, dtype=dtype)[0]


def explicit_coverage_predicate(route: PatrolRoute, sensing_range: float, point) -> bool:
    """True when at least two distinct units can observe the point, i.e. an
    emitter there yields an exact position estimate from this route alone."""
    return bool(detection_line_counts(route, sensing_range, [point])[0] >= 2)


@dataclass
class CoverageRaster:
    """Per-cell, per-robot observation summary over a map grid.

    ``line_counts[r, iy, ix]`` is the number of robot ``r``'s units observing
    the cell center; ``explicit`` marks cells with at least two.
    """

    bounds: MapBounds
    resolution: float
    xs: np.ndarray  # (nx,) cell-center x coordinates
    ys: np.ndarray  # (ny,) cell-center y coordinates
    line_counts: np.ndarray  # (n_robots, ny, nx) int16

    @property
    def explicit(self) -> np.ndarray:
        return self.line_counts >= 2

    @property
    def n_cells(self) -> int:
        return self.line_counts.shape[1] * self.line_counts.shape[2]


def coverage_raster(
    routes: list[PatrolRoute],
    sensing_ranges: list[float],
    bounds: MapBounds,
    resolution: float,
    dtype=np.float64,
) -> CoverageRaster:
    """Evaluate observation counts for every robot on a regular cell grid."""
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if len(routes) != len(sensing_ranges):
        raise ValueError("need one sensing range per route")
    nx = math.ceil(bounds.width / resolution)
    ny = math.ceil(bounds.height / resolution)
    xs = (np.arange(nx) + 0.5) * resolution
    ys = (np.arange(ny) + 0.5) * resolution
    gx, gy = np.meshgrid(xs, ys)
    cells = np.column_stack((gx.ravel(), gy.ravel()))
    if routes:
        counts = multi_route_line_counts(routes, sensing_ranges, cells, dtype=dtype)
        line_counts = counts.reshape(len(routes), ny, nx)
    else:
        line_counts = np.zeros((0, ny, nx), dtype=np.int16)
    return CoverageRaster(bounds, resolution, xs, ys, line_counts)


def route_to_dict(route: PatrolRoute) -> dict:
    """JSON-ready route description: {kind, centroid, rotation, edge_length, sensing, psi}."""
    return {
        "kind": route.shape.kind.value,
        "centroid": [route.shape.centroid[0], route.shape.centroid[1]],
        "rotation": route.shape.rotation,
        "edge_length": route.shape.edge_length,
        "sensing": route.sensing.value,
        "psi": route.antenna_offset,
    }


def route_from_dict(data: dict) -> PatrolRoute:
    """Rebuild a route (including waypoints) from its JSON description."""
    shape = PatrolShape(
        kind=ShapeKind(data["kind"]),
        edge_length=float(data["edge_length"]),
        centroid=(float(data["centroid"][0]), float(data["centroid"][1])),
        rotation=float(data["rotation"]),
    )
    route = build_route(shape, Sensing(data["sensing"]))
    # psi is derived from the shape; tolerate explicit values from older files
    if "psi" in data and data["psi"] is not None:
        route.antenna_offset = float(data["psi"])
    return route
