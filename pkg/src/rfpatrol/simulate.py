"""Single-traversal RSS trace generation along patrol routes.

A trial walks every robot once around its loop, recording one RSS trace per
antenna per edge. Directional robots additionally record a trace while
rotating in place at each waypoint toward the next edge. Robot kinematics are
abstracted to pure geometry; only the spatial distribution of RSS matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .geometry import PatrolRoute
from .rf import (
    AntennaConfig,
    EmitterSource,
    NoiseModel,
    Sensing,
    directional_gain,
    friis_received_power,
    wrap_angle,
)

DEFAULT_SAMPLE_SPACING = 0.1  # m along edges
DEFAULT_ANGULAR_STEP = math.radians(1.0)  # vertex sweep step


class SegmentKind(Enum):
    EDGE = "edge"
    VERTEX = "vertex"


class SegmentId(NamedTuple):
    robot: int
    index: int
    kind: SegmentKind


@dataclass
class RssTrace:
    """Ordered RSS samples for one segment and one antenna mount."""

    segment: SegmentId
    antenna_index: int
    mount_offset: float  # rad relative to robot front
    sensing: Sensing
    positions: np.ndarray  # (n, 2)
    headings: np.ndarray  # (n,)
    rss_dbm: np.ndarray  # (n,)

    def __post_init__(self):
        if len(self.rss_dbm) < 3:
            raise ValueError("a trace needs at least 3 samples")

    def __len__(self) -> int:
        return len(self.rss_dbm)


@dataclass(frozen=True)
class SamplingConfig:
    sample_spacing: float = DEFAULT_SAMPLE_SPACING
    angular_step: float = DEFAULT_ANGULAR_STEP

    def __post_init__(self):
        if self.sample_spacing <= 0.0 or self.angular_step <= 0.0:
            raise ValueError("sampling steps must be positive")


def antenna_for_route(route: PatrolRoute, boresight_gain_dbi: float = 8.0) -> AntennaConfig:
    """The antenna a robot carries on this route: omni, or a +/-psi pair."""
    if route.sensing is Sensing.OMNI:
        return AntennaConfig.omni()
    return AntennaConfig.directional(boresight_gain_dbi, route.antenna_offset)


def _rss_batch(source, positions, headings, antenna, mount_index, noise):
    delta = np.asarray(source.position, dtype=float) - positions
    dist = np.hypot(delta[:, 0], delta[:, 1])
    if np.any(dist == 0.0):
        raise ValueError("source coincides with a sample point")
    theta = wrap_angle(np.arctan2(delta[:, 1], delta[:, 0]) - (headings + antenna.mount_offsets[mount_index]))
    gain_rx = directional_gain(antenna.gain_factor, theta)
    rss = friis_received_power(source.power_dbm, 0.0, gain_rx, source.wavelength, dist)
    if noise is not None:
        rss = rss + noise.sample(len(rss))
    return rss


def simulate_edge(
    route: PatrolRoute,
    edge_index: int,
    source: EmitterSource,
    antenna: AntennaConfig,
    noise: NoiseModel | None = None,
    sample_spacing: float = DEFAULT_SAMPLE_SPACING,
    robot: int = 0,
) -> list[RssTrace]:
    """Traces recorded while driving one edge, one per antenna mount.

    Samples are evenly spaced along the edge (at most ``sample_spacing``
    apart) and include both endpoints; the heading is the edge bearing.
    """
    a, b = route.edge(edge_index)
    length = float(np.hypot(*(b - a)))
    if not 0.0 < sample_spacing < length:
        raise ValueError("sample spacing must be positive and below the edge length")
    n = max(math.ceil(length / sample_spacing), 2) + 1
    frac = np.linspace(0.0, 1.0, n)
    positions = a + frac[:, None] * (b - a)
    headings = np.full(n, math.atan2(b[1] - a[1], b[0] - a[0]))
    segment = SegmentId(robot, edge_index, SegmentKind.EDGE)
    traces = []
    for m in range(antenna.n_mounts):
        rss = _rss_batch(source, positions, headings, antenna, m, noise)
        traces.append(
            RssTrace(segment, m, antenna.mount_offsets[m], antenna.kind, positions, headings, rss)
        )
    return traces


def simulate_vertex(
    route: PatrolRoute,
    vertex_index: int,
    source: EmitterSource,
    antenna: AntennaConfig,
    noise: NoiseModel | None = None,
    angular_step: float = DEFAULT_ANGULAR_STEP,
    robot: int = 0,
) -> list[RssTrace]:
    """Traces recorded while turning in place at a waypoint (directional only).

    The heading sweeps clockwise from the incoming edge bearing to the
    outgoing edge bearing, sampled at most ``angular_step`` apart.
    """
    if antenna.kind is not Sensing.DIRECTIONAL:
        raise ValueError("vertex rotation traces require directional sensing")
    if angular_step <= 0.0:
        raise ValueError("angular step must be positive")
    n_edges = route.n_edges
    h_in = route.edge_bearing((vertex_index - 1) % n_edges)
    h_out = route.edge_bearing(vertex_index)
    turn = float(wrap_angle(h_in - h_out))  # clockwise exterior angle, positive for convex loops
    k = max(math.ceil(turn / angular_step), 2)
    headings = h_in - np.linspace(0.0, turn, k + 1)
    positions = np.broadcast_to(route.waypoints[vertex_index % n_edges], (k + 1, 2)).copy()
    segment = SegmentId(robot, vertex_index % n_edges, SegmentKind.VERTEX)
    traces = []
    for m in range(antenna.n_mounts):
        rss = _rss_batch(source, positions, headings, antenna, m, noise)
        traces.append(
            RssTrace(segment, m, antenna.mount_offsets[m], antenna.kind, positions, headings, rss)
        )
    return traces


def run_trial(
    routes: list[PatrolRoute],
    antennas: list[AntennaConfig],
    source: EmitterSource,
    noise: NoiseModel | None = None,
    sampling: SamplingConfig = SamplingConfig(),
) -> list[RssTrace]:
    """All traces of one full patrol: every robot traverses its loop once.

    Noise is drawn from per-segment substreams keyed by (robot, segment kind,
    segment index), so trace values do not depend on execution order.
    """
    if not routes:
        raise ValueError("need at least one route")
    if len(antennas) != len(routes):
        raise ValueError("need one antenna config per route")
    traces = []
    for ri, (route, antenna) in enumerate(zip(routes, antennas)):
        for ei in range(route.n_edges):
            seg_noise = noise.substream(ri, 0, ei) if noise is not None else None
            traces += simulate_edge(
                route, ei, source, antenna, seg_noise, sampling.sample_spacing, robot=ri
            )
        if antenna.kind is Sensing.DIRECTIONAL:
            for vi in range(route.n_edges):
                seg_noise = noise.substream(ri, 1, vi) if noise is not None else None
                traces += simulate_vertex(
                    route, vi, source, antenna, seg_noise, sampling.angular_step, robot=ri
                )
    return traces
