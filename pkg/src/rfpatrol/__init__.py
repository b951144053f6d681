"""Multi-robot patrol route optimization and RSS-based emitter localization."""

from .campaign import (
    CampaignConfig,
    Scenario,
    ShapeConfig,
    TrialRecord,
    all_scenarios,
    plan_routes,
    run_campaign,
    run_single_trial,
    summarize,
)
from .de import (
    DEConfig,
    DEResult,
    ObjectiveWeights,
    differential_evolution,
    evaluate_objective,
    optimize_routes,
)
from .geometry import (
    MapBounds,
    PatrolRoute,
    PatrolShape,
    ShapeKind,
    antenna_offset,
    build_route,
    coverage_raster,
    explicit_coverage_predicate,
    max_edge_length,
    min_sensing_range,
)
from .localize import (
    LocalizationResult,
    TriangulationLine,
    extract_maximum,
    least_squares_intersection,
    line_from_maximum,
    localize,
)
from .rf import (
    AntennaConfig,
    EmitterSource,
    NoiseModel,
    Sensing,
    directional_gain,
    friis_received_power,
    received_power_at_pose,
    sensing_range,
)
from .simulate import (
    RssTrace,
    SamplingConfig,
    SegmentId,
    SegmentKind,
    antenna_for_route,
    run_trial,
    simulate_edge,
    simulate_vertex,
)
from .stats import LogisticFit, error_summary, failure_heatmap, fit_logistic

__version__ = "0.1.0"
