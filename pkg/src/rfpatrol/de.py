"""Differential evolution for patrol route placement.

The optimizer is plain DE/rand/1/bin over box bounds. Each robot contributes
four decision variables (centroid x, centroid y, rotation, edge length); the
objective rewards explicit coverage and cross-robot observation geometry and
penalizes routes leaving the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    MIN_EDGE_LENGTH,
    CoverageRaster,
    MapBounds,
    PatrolRoute,
    PatrolShape,
    ShapeKind,
    build_route,
    coverage_raster,
    max_edge_length,
)
from .rf import Sensing

DEFAULT_OPT_RESOLUTION = 0.25  # m, coarse raster for the fitness hot loop


@dataclass(frozen=True)
class DEConfig:
    population_size: int = 40
    generations: int = 300
    weight_f: float = 0.6
    crossover_cr: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population size must be at least 4")
        if not 0.0 < self.weight_f <= 2.0:
            raise ValueError("differential weight must be in (0, 2]")
        if not 0.0 <= self.crossover_cr <= 1.0:
            raise ValueError("crossover rate must be in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")


@dataclass
class DEResult:
    best: np.ndarray
    best_fitness: float
    trace: np.ndarray  # (generations + 1,) best fitness after init and each generation
    trace_best: np.ndarray  # (generations + 1, dim) best candidate per row of trace


def differential_evolution(objective, lower, upper, config: DEConfig, map_fn=map) -> DEResult:
    """Minimize ``objective`` over a box with DE/rand/1/bin.

    Mutants are ``a + F (b - c)`` from three distinct non-target members,
    crossed over binomially with one forced gene and clamped to the bounds;
    replacement is greedy. A fixed seed makes the run fully deterministic.
    ``map_fn`` is applied to batched fitness evaluations and may be a parallel
    map; evaluation order does not affect the result.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or np.any(lower > upper):
        raise ValueError("invalid bounds")
    dim = len(lower)
    rng = np.random.default_rng(config.seed)
    p = config.population_size

    pop = lower + rng.random((p, dim)) * (upper - lower)
    fitness = np.fromiter(map_fn(objective, pop), dtype=float, count=p)

    trace = [float(fitness.min())]
    trace_best = [pop[int(fitness.argmin())].copy()]

    for _ in range(config.generations):
        trials = np.empty_like(pop)
        for i in range(p):
            choices = rng.choice(p - 1, size=3, replace=False)
            choices[choices >= i] += 1  # skip the target index
            a, b, c = pop[choices]
            mutant = np.clip(a + config.weight_f * (b - c), lower, upper)
            cross = rng.random(dim) < config.crossover_cr
            cross[rng.integers(dim)] = True
            trials[i] = np.where(cross, mutant, pop[i])
        trial_fitness = np.fromiter(map_fn(objective, trials), dtype=float, count=p)
        improved = trial_fitness <= fitness
        pop[improved] = trials[improved]
        fitness[improved] = trial_fitness[improved]
        trace.append(float(fitness.min()))
        trace_best.append(pop[int(fitness.argmin())].copy())

    best_idx = int(fitness.argmin())
    return DEResult(
        best=pop[best_idx].copy(),
        best_fitness=float(fitness[best_idx]),
        trace=np.asarray(trace),
        trace_best=np.asarray(trace_best),
    )


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights of the route-placement objective.

    The boundary penalty must dominate: it is required to be at least the sum
    of the four metric weights so that any route set leaving the map ranks
    strictly worse than every in-bounds set.
    """

    explicit_w: float = 4.0
    overlap_w: float = 1.0
    cross_w: float = 2.0
    rotation_w: float = 1.5
    bounds_penalty: float = 10.0

    def __post_init__(self):
        ws = (self.explicit_w, self.overlap_w, self.cross_w, self.rotation_w)
        if any(not math.isfinite(w) or w < 0.0 for w in ws):
            raise ValueError("metric weights must be finite and non-negative")
        if self.bounds_penalty < sum(ws):
            raise ValueError("bounds penalty must be at least the sum of the metric weights")


@dataclass
class CoverageMetrics:
    """Normalized coverage scores of one candidate route set (all in [0, 1],
    except the raw penalty term)."""

    explicit_frac: float  # cells explicitly covered by >= 1 robot
    overlap_frac: float  # cells explicitly covered by >= 2 robots
    cross_frac: float  # cells with no solo coverage but >= 2 robots observing
    rotation_diversity: float  # circular spread of rotations, symmetry-folded
    bounds_penalty: float  # 0 or the configured penalty

    def fitness(self, w: ObjectiveWeights) -> float:
        return (
            -w.explicit_w * self.explicit_frac
            + w.overlap_w * self.overlap_frac
            - w.cross_w * self.cross_frac
            - w.rotation_w * self.rotation_diversity
            + self.bounds_penalty
        )

    def as_dict(self) -> dict:
        return {
            "explicit_frac": self.explicit_frac,
            "overlap_frac": self.overlap_frac,
            "cross_frac": self.cross_frac,
            "rotation_diversity": self.rotation_diversity,
            "bounds_penalty": self.bounds_penalty,
        }


def candidate_bounds(
    shapes: list[ShapeKind],
    sensing: Sensing,
    bounds: MapBounds,
    sensing_range: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Box bounds of the flattened decision vector (4 genes per robot)."""
    lower, upper = [], []
    for kind in shapes:
        max_edge = max_edge_length(kind, sensing, sensing_range)
        if max_edge < MIN_EDGE_LENGTH:
            raise ValueError(
                f"sensing range {sensing_range} m cannot support the minimum edge length"
            )
        lower += [0.0, 0.0, 0.0, MIN_EDGE_LENGTH]
        upper += [bounds.width, bounds.height, 2.0 * np.pi, max_edge]
    return np.asarray(lower), np.asarray(upper)


def candidate_routes(candidate, shapes: list[ShapeKind], sensing: Sensing) -> list[PatrolRoute]:
    """Decode a flattened candidate into one route per robot."""
    x = np.asarray(candidate, dtype=float)
    if x.shape != (4 * len(shapes),):
        raise ValueError(f"candidate must have 4 genes per robot, got shape {x.shape}")
    routes = []
    for i, kind in enumerate(shapes):
        cx, cy, rot, edge = x[4 * i : 4 * i + 4]
        routes.append(build_route(PatrolShape(kind, edge, (cx, cy), rot), sensing))
    return routes


def rotation_diversity(routes: list[PatrolRoute]) -> float:
    """Circular dispersion of route rotations, folded by each shape's n-fold
    symmetry: 1 - |sum_k exp(i n_k w_k)| / R."""
    phasors = [
        np.exp(1j * route.shape.kind.sides * route.shape.rotation) for route in routes
    ]
    return 1.0 - abs(np.sum(phasors)) / len(routes)


def coverage_metrics(
    routes: list[PatrolRoute],
    bounds: MapBounds,
    sensing_range: float,
    weights: ObjectiveWeights,
    resolution: float = DEFAULT_OPT_RESOLUTION,
    raster: CoverageRaster | None = None,
    dtype=np.float32,
) -> CoverageMetrics:
    """Score a route set on the map raster.

    The default float32 kernel keeps the optimization hot loop fast; boundary
    cells a few micrometers either way are irrelevant at raster resolution.
    """
    if raster is None:
        raster = coverage_raster(
            routes, [sensing_range] * len(routes), bounds, resolution, dtype=dtype
        )
    explicit = raster.explicit
    n_cells = raster.n_cells
    solo_count = explicit.sum(axis=0)
    observing = (raster.line_counts >= 1).sum(axis=0)
    explicit_frac = float((solo_count >= 1).sum() / n_cells)
    overlap_frac = float((solo_count >= 2).sum() / n_cells)
    cross_frac = float(((solo_count == 0) & (observing >= 2)).sum() / n_cells)
    # The map is convex and edges are straight, so a route stays inside the
    # rectangle exactly when all of its waypoints do.
    in_bounds = all(bool(bounds.contains(r.waypoints).all()) for r in routes)
    return CoverageMetrics(
        explicit_frac=explicit_frac,
        overlap_frac=overlap_frac,
        cross_frac=cross_frac,
        rotation_diversity=rotation_diversity(routes),
        bounds_penalty=0.0 if in_bounds else weights.bounds_penalty,
    )


def evaluate_objective(
    candidate,
    shapes: list[ShapeKind],
    sensing: Sensing,
    weights: ObjectiveWeights,
    bounds: MapBounds,
    sensing_range: float,
    resolution: float = DEFAULT_OPT_RESOLUTION,
) -> tuple[float, CoverageMetrics]:
    """Fitness (lower is better) and component metrics of one candidate."""
    routes = candidate_routes(candidate, shapes, sensing)
    metrics = coverage_metrics(routes, bounds, sensing_range, weights, resolution)
    return metrics.fitness(weights), metrics


@dataclass(frozen=True)
class RouteObjective:
    """Picklable fitness callable, usable with process-pool ``map_fn``."""

    shapes: tuple
    sensing: Sensing
    weights: ObjectiveWeights
    bounds: MapBounds
    sensing_range: float
    resolution: float = DEFAULT_OPT_RESOLUTION

    def __call__(self, x) -> float:
        return evaluate_objective(
            x, list(self.shapes), self.sensing, self.weights, self.bounds,
            self.sensing_range, self.resolution,
        )[0]


def optimize_routes(
    shapes: list[ShapeKind],
    sensing: Sensing,
    weights: ObjectiveWeights,
    bounds: MapBounds,
    sensing_range: float,
    config: DEConfig,
    resolution: float = DEFAULT_OPT_RESOLUTION,
    map_fn=map,
) -> tuple[list[PatrolRoute], DEResult, list[dict]]:
    """Optimize route placement for a robot team.

    Returns the decoded best routes, the raw DE result, and one metrics row
    per generation (for the best candidate of that generation).
    """
    lower, upper = candidate_bounds(shapes, sensing, bounds, sensing_range)
    objective = RouteObjective(tuple(shapes), sensing, weights, bounds, sensing_range, resolution)
    result = differential_evolution(objective, lower, upper, config, map_fn=map_fn)
    trace_rows = []
    for gen, (fit, best) in enumerate(zip(result.trace, result.trace_best)):
        _, metrics = evaluate_objective(
            best, shapes, sensing, weights, bounds, sensing_range, resolution
        )
        trace_rows.append({"generation": gen, "best_fitness": float(fit), **metrics.as_dict()})
    routes = candidate_routes(result.best, shapes, sensing)
    return routes, result, trace_rows
