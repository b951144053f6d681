"""Differential evolution and route objective tests."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rfpatrol.de import (
    CoverageMetrics,
    DEConfig,
    ObjectiveWeights,
    candidate_bounds,
    candidate_routes,
    differential_evolution,
    evaluate_objective,
    optimize_routes,
)
from rfpatrol.geometry import MapBounds, ShapeKind
from rfpatrol.rf import Sensing

BOUNDS = MapBounds(40.0, 40.0)
WEIGHTS = ObjectiveWeights()


def sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


class TestDECore:
    def test_sphere_quick_convergence(self):
        config = DEConfig(population_size=40, generations=400, weight_f=0.6, crossover_cr=0.9, seed=3)
        result = differential_evolution(sphere, [-5.0] * 8, [5.0] * 8, config)
        assert result.best_fitness < 1e-6

    def test_trace_non_increasing(self):
        config = DEConfig(population_size=12, generations=80, seed=1)
        result = differential_evolution(sphere, [-5.0] * 5, [5.0] * 5, config)
        assert len(result.trace) == 81
        assert np.all(np.diff(result.trace) <= 0.0)

    def test_zero_generations_returns_initial_best(self):
        config = DEConfig(population_size=10, generations=0, seed=4)
        result = differential_evolution(sphere, [-5.0] * 3, [5.0] * 3, config)
        assert len(result.trace) == 1
        assert result.best_fitness == result.trace[0]
        assert sphere(result.best) == result.best_fitness

    def test_seeded_determinism(self):
        config = DEConfig(population_size=15, generations=40, seed=42)
        a = differential_evolution(sphere, [-2.0] * 4, [2.0] * 4, config)
        b = differential_evolution(sphere, [-2.0] * 4, [2.0] * 4, config)
        assert np.array_equal(a.best, b.best)
        assert np.array_equal(a.trace, b.trace)

    def test_result_within_bounds(self):
        lower = np.array([1.0, -3.0, 10.0])
        upper = np.array([2.0, -1.0, 11.0])
        config = DEConfig(population_size=10, generations=30, seed=7)
        result = differential_evolution(sphere, lower, upper, config)
        assert np.all(result.best >= lower) and np.all(result.best <= upper)
        for row in result.trace_best:
            assert np.all(row >= lower) and np.all(row <= upper)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DEConfig(population_size=3)
        with pytest.raises(ValueError):
            DEConfig(weight_f=0.0)
        with pytest.raises(ValueError):
            DEConfig(weight_f=2.5)
        with pytest.raises(ValueError):
            DEConfig(crossover_cr=1.1)
        with pytest.raises(ValueError):
            DEConfig(generations=-1)

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            differential_evolution(sphere, [0.0, 1.0], [1.0], DEConfig())
        with pytest.raises(ValueError):
            differential_evolution(sphere, [2.0], [1.0], DEConfig())


class TestObjectiveWeights:
    def test_penalty_must_dominate(self):
        with pytest.raises(ValueError):
            ObjectiveWeights(explicit_w=5.0, overlap_w=3.0, cross_w=2.0, rotation_w=1.0, bounds_penalty=10.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            ObjectiveWeights(explicit_w=-1.0)

    def test_fitness_composition(self):
        w = ObjectiveWeights(2.0, 1.0, 1.0, 1.0, 10.0)
        m = CoverageMetrics(0.5, 0.25, 0.1, 0.4, 0.0)
        assert_allclose(m.fitness(w), -2.0 * 0.5 + 1.0 * 0.25 - 1.0 * 0.1 - 1.0 * 0.4)


def _random_candidates(n, shapes, sensing, rng, widen=0.0):
    lower, upper = candidate_bounds(shapes, sensing, BOUNDS, 9.58)
    span = upper - lower
    return lower - widen * span + rng.random((n, len(lower))) * (1.0 + 2.0 * widen) * span


class TestRouteObjective:
    def test_metric_ranges(self):
        rng = np.random.default_rng(8)
        shapes = [ShapeKind.TRIANGLE, ShapeKind.SQUARE, ShapeKind.HEXAGON, ShapeKind.TRIANGLE]
        for x in _random_candidates(40, shapes, Sensing.OMNI, rng, widen=0.2):
            x[3::4] = np.maximum(x[3::4], 1.0)  # keep edge lengths geometric
            _, m = evaluate_objective(x, shapes, Sensing.OMNI, WEIGHTS, BOUNDS, 9.58)
            for value in (m.explicit_frac, m.overlap_frac, m.cross_frac, m.rotation_diversity):
                assert 0.0 <= value <= 1.0
            assert m.bounds_penalty in (0.0, WEIGHTS.bounds_penalty)

    def test_out_of_bounds_candidate_penalized(self):
        shapes = [ShapeKind.SQUARE]
        x = np.array([50.0, 20.0, 0.0, 5.0])  # centroid beyond the map edge
        _, m = evaluate_objective(x, shapes, Sensing.OMNI, WEIGHTS, BOUNDS, 9.58)
        assert m.bounds_penalty == WEIGHTS.bounds_penalty

    def test_penalized_never_beats_feasible(self):
        rng = np.random.default_rng(9)
        shapes = [ShapeKind.TRIANGLE] * 4
        feasible, infeasible = [], []
        for x in _random_candidates(120, shapes, Sensing.OMNI, rng, widen=0.3):
            x[3::4] = np.maximum(x[3::4], 1.0)
            fit, m = evaluate_objective(x, shapes, Sensing.OMNI, WEIGHTS, BOUNDS, 9.58)
            (infeasible if m.bounds_penalty > 0 else feasible).append(fit)
        assert feasible and infeasible
        assert min(infeasible) > max(feasible)

    def test_identical_routes_give_full_overlap_and_zero_diversity(self):
        shapes = [ShapeKind.SQUARE] * 3
        x = np.tile([20.0, 20.0, 0.7, 8.0], 3)
        _, m = evaluate_objective(x, shapes, Sensing.OMNI, WEIGHTS, BOUNDS, 9.58)
        assert_allclose(m.overlap_frac, m.explicit_frac)
        assert_allclose(m.rotation_diversity, 0.0, atol=1e-12)

    def test_weight_scaling_leaves_argmin_unchanged(self):
        rng = np.random.default_rng(10)
        shapes = [ShapeKind.HEXAGON] * 2
        candidates = _random_candidates(25, shapes, Sensing.OMNI, rng)
        w1 = ObjectiveWeights(4.0, 1.0, 2.0, 1.0, 9.0)
        w3 = ObjectiveWeights(12.0, 3.0, 6.0, 3.0, 27.0)
        fits1 = [evaluate_objective(x, shapes, Sensing.OMNI, w1, BOUNDS, 9.58)[0] for x in candidates]
        fits3 = [evaluate_objective(x, shapes, Sensing.OMNI, w3, BOUNDS, 9.58)[0] for x in candidates]
        assert int(np.argmin(fits1)) == int(np.argmin(fits3))
        assert_allclose(np.asarray(fits3), 3.0 * np.asarray(fits1), rtol=1e-9)

    def test_candidate_length_checked(self):
        with pytest.raises(ValueError):
            candidate_routes([1.0, 2.0, 3.0], [ShapeKind.SQUARE], Sensing.OMNI)

    def test_unsupportable_sensing_range_rejected(self):
        with pytest.raises(ValueError):
            candidate_bounds([ShapeKind.SQUARE], Sensing.DIRECTIONAL, BOUNDS, 0.5)


class TestOptimizeRoutes:
    def test_small_run_produces_valid_routes(self):
        shapes = [ShapeKind.TRIANGLE, ShapeKind.SQUARE]
        config = DEConfig(population_size=8, generations=6, seed=2)
        routes, result, rows = optimize_routes(
            shapes, Sensing.OMNI, WEIGHTS, BOUNDS, 9.58, config, resolution=1.0
        )
        assert [r.shape.kind for r in routes] == shapes
        assert len(rows) == 7
        fits = [row["best_fitness"] for row in rows]
        assert np.all(np.diff(fits) <= 0.0)
        assert rows[-1]["best_fitness"] == result.best_fitness
        for route in routes:
            assert route.shape.edge_length >= 1.0
