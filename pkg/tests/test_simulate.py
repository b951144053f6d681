"""Trace generation tests: counts, geometry fidelity, determinism."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rfpatrol.geometry import PatrolShape, ShapeKind, build_route
from rfpatrol.rf import AntennaConfig, EmitterSource, NoiseModel, Sensing
from rfpatrol.simulate import (
    SamplingConfig,
    SegmentKind,
    antenna_for_route,
    run_trial,
    simulate_edge,
    simulate_vertex,
)

SRC = EmitterSource((21.0, 27.0), 25.0, 1.4e9)


def _omni_square(edge=10.0, centroid=(20.0, 20.0), rotation=0.0):
    return build_route(PatrolShape(ShapeKind.SQUARE, edge, centroid, rotation), Sensing.OMNI)


def _dir_square(edge=10.0, centroid=(20.0, 20.0), rotation=0.0):
    return build_route(PatrolShape(ShapeKind.SQUARE, edge, centroid, rotation), Sensing.DIRECTIONAL)


class TestTraceCounts:
    def test_four_omni_triangles_give_twelve_traces(self):
        routes = [
            build_route(PatrolShape(ShapeKind.TRIANGLE, 8.0, (10.0 + 7 * i, 10.0), 0.3 * i), Sensing.OMNI)
            for i in range(4)
        ]
        antennas = [antenna_for_route(r) for r in routes]
        traces = run_trial(routes, antennas, SRC, NoiseModel(0.0))
        assert len(traces) == 12

    def test_four_directional_triangles_give_48_traces(self):
        routes = [
            build_route(
                PatrolShape(ShapeKind.TRIANGLE, 8.0, (10.0 + 7 * i, 10.0), 0.3 * i),
                Sensing.DIRECTIONAL,
            )
            for i in range(4)
        ]
        antennas = [antenna_for_route(r, 8.0) for r in routes]
        traces = run_trial(routes, antennas, SRC, NoiseModel(0.0))
        assert len(traces) == 48  # 4 robots x (3 edges + 3 vertices) x 2 antennas

    def test_single_omni_square_gives_four_traces(self):
        route = _omni_square()
        traces = run_trial([route], [antenna_for_route(route)], SRC, NoiseModel(0.0))
        assert len(traces) == 4
        assert all(t.segment.kind is SegmentKind.EDGE for t in traces)


class TestEdgeSimulation:
    def test_peak_at_perpendicular_foot(self):
        route = _omni_square()
        a, b = route.edge(0)
        mid = 0.5 * (a + b)
        normal = np.array([-(b - a)[1], (b - a)[0]]) / np.linalg.norm(b - a)
        source = EmitterSource(tuple(mid + 3.0 * normal), 25.0, 1.4e9)
        trace = simulate_edge(route, 0, source, AntennaConfig.omni(), None, 0.1)[0]
        peak = int(np.argmax(trace.rss_dbm))
        assert_allclose(trace.positions[peak], mid, atol=0.051)

    def test_source_beyond_edge_extension_is_monotone(self):
        route = _omni_square()
        a, b = route.edge(0)
        beyond = b + 2.0 * (b - a)
        source = EmitterSource(tuple(beyond), 25.0, 1.4e9)
        trace = simulate_edge(route, 0, source, AntennaConfig.omni(), None, 0.1)[0]
        diffs = np.diff(trace.rss_dbm)
        assert np.all(diffs > 0)  # strictly approaching the source
        assert int(np.argmax(trace.rss_dbm)) == len(trace) - 1

    def test_directional_peak_on_mount_bearing(self):
        route = _dir_square()
        antenna = antenna_for_route(route, 8.0)
        trace_probe = simulate_edge(route, 0, SRC, antenna, None, 0.1)[0]
        k = 37
        bearing = trace_probe.headings[k] + antenna.mount_offsets[0]
        pos = trace_probe.positions[k] + 6.0 * np.array([math.cos(bearing), math.sin(bearing)])
        source = EmitterSource(tuple(pos), 25.0, 1.4e9)
        trace = simulate_edge(route, 0, source, antenna, None, 0.1)[0]
        assert abs(int(np.argmax(trace.rss_dbm)) - k) <= 1

    def test_samples_lie_on_segment_and_hit_endpoints(self):
        route = _omni_square(edge=7.3)
        a, b = route.edge(2)
        trace = simulate_edge(route, 2, SRC, AntennaConfig.omni(), None, 0.1)[0]
        assert_allclose(trace.positions[0], a, atol=1e-12)
        assert_allclose(trace.positions[-1], b, atol=1e-12)
        e = b - a
        w = trace.positions - a
        cross = np.abs(e[0] * w[:, 1] - e[1] * w[:, 0]) / np.linalg.norm(e)
        assert np.max(cross) < 1e-9
        spacing = np.linalg.norm(np.diff(trace.positions, axis=0), axis=1)
        assert np.max(spacing) <= 0.1 + 1e-12

    def test_minimum_three_samples(self):
        route = _omni_square(edge=1.0)
        trace = simulate_edge(route, 0, SRC, AntennaConfig.omni(), None, 0.9)[0]
        assert len(trace) >= 3

    def test_invalid_spacing(self):
        route = _omni_square(edge=5.0)
        with pytest.raises(ValueError):
            simulate_edge(route, 0, SRC, AntennaConfig.omni(), None, 5.5)
        with pytest.raises(ValueError):
            simulate_edge(route, 0, SRC, AntennaConfig.omni(), None, 0.0)

    def test_source_on_sample_point_rejected(self):
        route = _omni_square()
        a, _ = route.edge(0)
        source = EmitterSource((float(a[0]), float(a[1])), 25.0, 1.4e9)
        with pytest.raises(ValueError):
            simulate_edge(route, 0, source, AntennaConfig.omni(), None, 0.1)

    def test_energy_ordering_with_shared_foot(self):
        route = _omni_square()
        a, b = route.edge(0)
        mid = 0.5 * (a + b)
        normal = np.array([-(b - a)[1], (b - a)[0]]) / np.linalg.norm(b - a)
        maxima = []
        for dist in (2.0, 4.0, 6.0, 8.0):
            source = EmitterSource(tuple(mid + dist * normal), 25.0, 1.4e9)
            trace = simulate_edge(route, 0, source, AntennaConfig.omni(), None, 0.1)[0]
            maxima.append(trace.rss_dbm.max())
        assert np.all(np.diff(maxima) < 0)


class TestVertexSimulation:
    def test_square_sweep_is_quarter_turn(self):
        route = _dir_square()
        antenna = antenna_for_route(route, 8.0)
        traces = simulate_vertex(route, 1, SRC, antenna, None, math.radians(1.0))
        assert len(traces) == 2
        sweep = traces[0].headings[0] - traces[0].headings[-1]
        assert_allclose(sweep, math.pi / 2.0, rtol=1e-12)
        assert np.all(np.diff(traces[0].headings) < 0)  # clockwise turn

    def test_vertex_position_constant(self):
        route = _dir_square()
        antenna = antenna_for_route(route, 8.0)
        trace = simulate_vertex(route, 3, SRC, antenna, None, math.radians(2.0))[0]
        assert_allclose(trace.positions, np.broadcast_to(route.waypoints[3], trace.positions.shape))

    def test_peak_heading_points_antenna_at_source(self):
        route = _dir_square(centroid=(20.0, 20.0))
        antenna = antenna_for_route(route, 8.0)
        vertex = route.waypoints[1]
        # place the source inside the sector swept by mount 0 at vertex 1
        from rfpatrol.rf import wrap_angle

        h_in = route.edge_bearing(0)
        turn = float(wrap_angle(h_in - route.edge_bearing(1)))
        h_mid = h_in - 0.5 * turn
        direction = h_mid + antenna.mount_offsets[0]
        source = EmitterSource(tuple(vertex + 8.0 * np.array([math.cos(direction), math.sin(direction)])), 25.0, 1.4e9)
        trace = simulate_vertex(route, 1, source, antenna, None, math.radians(1.0))[0]
        peak = int(np.argmax(trace.rss_dbm))
        aim = trace.headings[peak] + antenna.mount_offsets[0]
        assert abs(aim - direction) <= math.radians(1.0) + 1e-9

    def test_remote_source_stays_below_threshold(self):
        route = _dir_square()
        antenna = antenna_for_route(route, 8.0)
        # outside the swept sector and far away
        source = EmitterSource((2000.0, -1500.0), 20.0, 2.4e9)
        trace = simulate_vertex(route, 1, source, antenna, None, math.radians(1.0))[0]
        assert trace.rss_dbm.max() < -30.0

    def test_omni_vertex_rejected(self):
        route = _omni_square()
        with pytest.raises(ValueError):
            simulate_vertex(route, 0, SRC, AntennaConfig.omni(), None, math.radians(1.0))


class TestDeterminism:
    def test_noiseless_traces_seed_independent(self):
        route = _omni_square()
        antenna = antenna_for_route(route)
        a = run_trial([route], [antenna], SRC, NoiseModel(0.0, seed=1))
        b = run_trial([route], [antenna], SRC, NoiseModel(0.0, seed=999))
        for ta, tb in zip(a, b):
            assert np.array_equal(ta.rss_dbm, tb.rss_dbm)

    def test_noisy_traces_reproducible(self):
        route = _dir_square()
        antenna = antenna_for_route(route, 8.0)
        a = run_trial([route], [antenna], SRC, NoiseModel(0.5, seed=77))
        b = run_trial([route], [antenna], SRC, NoiseModel(0.5, seed=77))
        for ta, tb in zip(a, b):
            assert np.array_equal(ta.rss_dbm, tb.rss_dbm)

    def test_run_trial_requires_matching_antennas(self):
        route = _omni_square()
        with pytest.raises(ValueError):
            run_trial([route], [], SRC, NoiseModel(0.0))
        with pytest.raises(ValueError):
            run_trial([], [], SRC, NoiseModel(0.0))

    def test_sampling_config_validation(self):
        with pytest.raises(ValueError):
            SamplingConfig(sample_spacing=0.0)
        with pytest.raises(ValueError):
            SamplingConfig(angular_step=-1.0)
