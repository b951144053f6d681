"""Scenario configuration and Monte Carlo campaign execution.

Eight scenarios (four shape configurations times two sensing modes) each run
a fixed number of trials. Every trial places a random emitter, walks the
planned routes once, and records the localization outcome. All randomness is
derived from the master seed through per-trial substreams, so results are
independent of execution order and worker count.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np

from .de import DEConfig, ObjectiveWeights, optimize_routes
from .geometry import MapBounds, PatrolRoute, ShapeKind, route_from_dict, route_to_dict
from .localize import localize
from .rf import EmitterSource, NoiseModel, Sensing, sensing_range
from .simulate import SamplingConfig, antenna_for_route, run_trial
from .stats import error_summary, failure_heatmap, fit_logistic


class ShapeConfig(Enum):
    TRIANGLE = "triangle"
    SQUARE = "square"
    HEXAGON = "hexagon"
    MIXED = "mixed"


_SHAPE_ORDER = [ShapeConfig.TRIANGLE, ShapeConfig.SQUARE, ShapeConfig.HEXAGON, ShapeConfig.MIXED]
_SENSING_ORDER = [Sensing.OMNI, Sensing.DIRECTIONAL]


@dataclass(frozen=True)
class Scenario:
    shape_config: ShapeConfig
    sensing: Sensing

    @property
    def id(self) -> str:
        return f"{self.shape_config.value}_{self.sensing.value}"

    @property
    def seed_key(self) -> int:
        """Stable integer identity used to derive per-scenario substreams."""
        return _SHAPE_ORDER.index(self.shape_config) * 2 + _SENSING_ORDER.index(self.sensing)


def all_scenarios() -> list[Scenario]:
    return [Scenario(sc, sn) for sc in _SHAPE_ORDER for sn in _SENSING_ORDER]


def scenario_by_id(scenario_id: str) -> Scenario:
    for scenario in all_scenarios():
        if scenario.id == scenario_id:
            return scenario
    raise KeyError(f"unknown scenario id {scenario_id!r}")


def scenario_shapes(shape_config: ShapeConfig, robot_count: int) -> list[ShapeKind]:
    """Per-robot shape assignment; the mixed team is 2 triangles + square + hexagon."""
    if shape_config is ShapeConfig.MIXED:
        if robot_count != 4:
            raise ValueError("the mixed configuration is defined for 4 robots")
        return [ShapeKind.TRIANGLE, ShapeKind.TRIANGLE, ShapeKind.SQUARE, ShapeKind.HEXAGON]
    kind = ShapeKind(shape_config.value)
    return [kind] * robot_count


@dataclass
class CampaignConfig:
    """Campaign-wide parameters; defaults reproduce the reference protocol."""

    map_width_m: float = 40.0
    map_height_m: float = 40.0
    robot_count: int = 4
    trials_per_scenario: int = 100
    power_bounds_dbm: tuple[float, float] = (20.0, 30.0)
    frequency_bounds_hz: tuple[float, float] = (0.4e9, 2.4e9)
    detection_threshold_dbm: float = -30.0
    directional_gain_dbi: float = 8.0
    noise_std_db: float = 0.5
    sample_spacing_m: float = 0.1
    angular_step_deg: float = 1.0
    master_seed: int = 1234
    opt_resolution_m: float = 0.25
    de: DEConfig = field(default_factory=DEConfig)
    weights: dict = field(default_factory=dict)  # per shape-config overrides

    @property
    def bounds(self) -> MapBounds:
        return MapBounds(self.map_width_m, self.map_height_m)

    @property
    def sampling(self) -> SamplingConfig:
        return SamplingConfig(self.sample_spacing_m, math.radians(self.angular_step_deg))

    def planning_range(self, sensing: Sensing) -> float:
        """Sensing range used for route planning: the mid-range parameter
        estimate at the detection threshold (plus boresight gain when
        directional)."""
        gain = self.directional_gain_dbi if sensing is Sensing.DIRECTIONAL else 0.0
        return sensing_range(
            0.5 * (self.power_bounds_dbm[0] + self.power_bounds_dbm[1]),
            gain,
            0.5 * (self.frequency_bounds_hz[0] + self.frequency_bounds_hz[1]),
            self.detection_threshold_dbm,
        )

    def objective_weights(self, shape_config: ShapeConfig) -> ObjectiveWeights:
        preset = load_weight_presets()[shape_config.value]
        preset = {**preset, **self.weights.get(shape_config.value, {})}
        return ObjectiveWeights(**preset)

    def to_dict(self) -> dict:
        return {
            "map_width_m": self.map_width_m,
            "map_height_m": self.map_height_m,
            "robot_count": self.robot_count,
            "trials_per_scenario": self.trials_per_scenario,
            "power_bounds_dbm": list(self.power_bounds_dbm),
            "frequency_bounds_hz": list(self.frequency_bounds_hz),
            "detection_threshold_dbm": self.detection_threshold_dbm,
            "directional_gain_dbi": self.directional_gain_dbi,
            "noise_std_db": self.noise_std_db,
            "sample_spacing_m": self.sample_spacing_m,
            "angular_step_deg": self.angular_step_deg,
            "master_seed": self.master_seed,
            "opt_resolution_m": self.opt_resolution_m,
            "de": {
                "population_size": self.de.population_size,
                "generations": self.de.generations,
                "weight_f": self.de.weight_f,
                "crossover_cr": self.de.crossover_cr,
            },
            "weights": self.weights,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        kwargs = dict(data)
        if "power_bounds_dbm" in kwargs:
            kwargs["power_bounds_dbm"] = tuple(kwargs["power_bounds_dbm"])
        if "frequency_bounds_hz" in kwargs:
            kwargs["frequency_bounds_hz"] = tuple(kwargs["frequency_bounds_hz"])
        if "de" in kwargs:
            kwargs["de"] = DEConfig(**kwargs["de"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "CampaignConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def load_weight_presets() -> dict:
    """Shipped per-shape-configuration objective weight presets."""
    text = resources.files("rfpatrol").joinpath("presets/weights.json").read_text()
    return json.loads(text)


@dataclass
class TrialRecord:
    scenario_id: str
    trial: int
    x: float
    y: float
    power_dbm: float
    freq_hz: float
    success: bool
    lines: int
    pred_x: float | None
    pred_y: float | None
    abs_err_m: float | None


# ---------------------------------------------------------------------------
# Route planning (cached)

def _de_seed(config: CampaignConfig, scenario: Scenario) -> int:
    ss = np.random.SeedSequence(entropy=config.master_seed, spawn_key=(scenario.seed_key, 222))
    return int(ss.generate_state(1, np.uint64)[0])


def plan_path(plans_dir, scenario: Scenario, config: CampaignConfig) -> Path:
    return Path(plans_dir) / f"{scenario.id}_seed{config.master_seed}.json"


def plan_routes(
    scenario: Scenario,
    config: CampaignConfig,
    plans_dir=None,
    force: bool = False,
    map_fn=map,
) -> list[PatrolRoute]:
    """Optimized routes for a scenario, loaded from the plan cache when present.

    Planning runs differential evolution once per (scenario, master seed) and
    persists the result, including the per-generation fitness trace, so that
    repeated campaigns skip the expensive step.
    """
    cache = plan_path(plans_dir, scenario, config) if plans_dir is not None else None
    if cache is not None and cache.exists() and not force:
        with open(cache) as fh:
            payload = json.load(fh)
        return [route_from_dict(d) for d in payload["routes"]]

    shapes = scenario_shapes(scenario.shape_config, config.robot_count)
    weights = config.objective_weights(scenario.shape_config)
    srange = config.planning_range(scenario.sensing)
    de_config = replace(config.de, seed=_de_seed(config, scenario))
    routes, result, trace_rows = optimize_routes(
        shapes,
        scenario.sensing,
        weights,
        config.bounds,
        srange,
        de_config,
        resolution=config.opt_resolution_m,
        map_fn=map_fn,
    )
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "scenario": scenario.id,
            "master_seed": config.master_seed,
            "sensing_range_m": srange,
            "best_fitness": result.best_fitness,
            "weights": weights.__dict__,
            "de": config.to_dict()["de"],
            "routes": [route_to_dict(r) for r in routes],
        }
        with open(cache, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        write_fitness_trace(trace_rows, cache.with_name(cache.stem + "_trace.csv"))
    return routes


def write_fitness_trace(trace_rows: list[dict], path):
    fields = [
        "generation",
        "best_fitness",
        "explicit_frac",
        "overlap_frac",
        "cross_frac",
        "rotation_diversity",
        "bounds_penalty",
    ]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in trace_rows:
            writer.writerow([repr(row[f]) if isinstance(row[f], float) else row[f] for f in fields])


# ---------------------------------------------------------------------------
# Trial execution

def draw_source(scenario: Scenario, config: CampaignConfig, trial_index: int) -> EmitterSource:
    """The trial's emitter: uniform position, power, and frequency draws from
    the trial substream."""
    draw_ss = np.random.SeedSequence(
        entropy=config.master_seed, spawn_key=(scenario.seed_key, trial_index, 0)
    )
    rng = np.random.default_rng(draw_ss)
    x = rng.uniform(0.0, config.map_width_m)
    y = rng.uniform(0.0, config.map_height_m)
    power = rng.uniform(*config.power_bounds_dbm)
    freq = rng.uniform(*config.frequency_bounds_hz)
    return EmitterSource((x, y), power, freq)


def run_single_trial(
    scenario: Scenario,
    routes: list[PatrolRoute],
    config: CampaignConfig,
    trial_index: int,
) -> TrialRecord:
    """One seeded trial: draw a source, patrol, localize, record."""
    source = draw_source(scenario, config, trial_index)
    x, y = source.position

    noise_ss = np.random.SeedSequence(
        entropy=config.master_seed, spawn_key=(scenario.seed_key, trial_index, 1)
    )
    noise = NoiseModel(config.noise_std_db, int(noise_ss.generate_state(1, np.uint64)[0]))

    antennas = [antenna_for_route(r, config.directional_gain_dbi) for r in routes]
    traces = run_trial(routes, antennas, source, noise, config.sampling)
    result = localize(
        traces,
        config.bounds,
        config.detection_threshold_dbm,
        min_prominence_db=config.noise_std_db,
    )
    abs_err = None
    if result.success:
        abs_err = math.hypot(result.predicted[0] - x, result.predicted[1] - y)
    return TrialRecord(
        scenario_id=scenario.id,
        trial=trial_index,
        x=x,
        y=y,
        power_dbm=source.power_dbm,
        freq_hz=source.frequency_hz,
        success=result.success,
        lines=result.line_count,
        pred_x=result.predicted[0] if result.success else None,
        pred_y=result.predicted[1] if result.success else None,
        abs_err_m=abs_err,
    )


def _trial_task(args) -> TrialRecord:
    scenario, routes, config, trial_index = args
    return run_single_trial(scenario, routes, config, trial_index)


def run_scenario(
    scenario: Scenario,
    routes: list[PatrolRoute],
    config: CampaignConfig,
    workers: int = 1,
) -> list[TrialRecord]:
    tasks = [(scenario, routes, config, t) for t in range(config.trials_per_scenario)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=8))
    else:
        records = [_trial_task(task) for task in tasks]
    records.sort(key=lambda r: r.trial)
    return records


def run_campaign(
    config: CampaignConfig,
    scenarios: list[Scenario] | None = None,
    plans_dir=None,
    workers: int = 1,
) -> list[TrialRecord]:
    """Plan (or load) routes and run every trial of the selected scenarios."""
    scenarios = scenarios if scenarios is not None else all_scenarios()
    records = []
    for scenario in scenarios:
        routes = plan_routes(scenario, config, plans_dir=plans_dir)
        records += run_scenario(scenario, routes, config, workers=workers)
    return records


# ---------------------------------------------------------------------------
# Records I/O

RECORD_FIELDS = [
    "scenario",
    "trial",
    "x",
    "y",
    "power_dbm",
    "freq_hz",
    "success",
    "lines",
    "pred_x",
    "pred_y",
    "abs_err_m",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_records(records: list[TrialRecord], path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_FIELDS)
        for r in records:
            writer.writerow(
                [
                    r.scenario_id,
                    r.trial,
                    _fmt(r.x),
                    _fmt(r.y),
                    _fmt(r.power_dbm),
                    _fmt(r.freq_hz),
                    _fmt(r.success),
                    r.lines,
                    _fmt(r.pred_x),
                    _fmt(r.pred_y),
                    _fmt(r.abs_err_m),
                ]
            )


def read_records(path) -> list[TrialRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                TrialRecord(
                    scenario_id=row["scenario"],
                    trial=int(row["trial"]),
                    x=float(row["x"]),
                    y=float(row["y"]),
                    power_dbm=float(row["power_dbm"]),
                    freq_hz=float(row["freq_hz"]),
                    success=bool(int(row["success"])),
                    lines=int(row["lines"]),
                    pred_x=float(row["pred_x"]) if row["pred_x"] else None,
                    pred_y=float(row["pred_y"]) if row["pred_y"] else None,
                    abs_err_m=float(row["abs_err_m"]) if row["abs_err_m"] else None,
                )
            )
    return records


# ---------------------------------------------------------------------------
# Aggregation

def summarize(records: list[TrialRecord], config: CampaignConfig) -> dict:
    """Per-scenario and pooled statistics of a finished campaign.

    Pooled blocks are keyed by sensing mode and include a logistic regression
    of success on source power (dBm) and frequency (GHz). The failure heatmap
    covers pooled omni failures on a 20 x 20 grid.
    """
    by_scenario: dict[str, list[TrialRecord]] = {}
    for record in records:
        by_scenario.setdefault(record.scenario_id, []).append(record)

    summary: dict = {"master_seed": config.master_seed, "scenarios": {}, "pooled": {}}
    for scenario_id in sorted(by_scenario):
        recs = by_scenario[scenario_id]
        successes = [r for r in recs if r.success]
        summary["scenarios"][scenario_id] = {
            "trials": len(recs),
            "successes": len(successes),
            "success_rate_pct": 100.0 * len(successes) / len(recs),
            "error": error_summary([r.abs_err_m for r in successes]),
        }

    for sensing in _SENSING_ORDER:
        pool = [r for r in records if r.scenario_id.endswith(sensing.value)]
        if not pool:
            continue
        successes = [r for r in pool if r.success]
        feats = np.array([[r.power_dbm, r.freq_hz / 1e9] for r in pool])
        fit = fit_logistic(feats, np.array([r.success for r in pool], dtype=float))
        summary["pooled"][sensing.value] = {
            "trials": len(pool),
            "successes": len(successes),
            "success_rate_pct": 100.0 * len(successes) / len(pool),
            "error": error_summary([r.abs_err_m for r in successes]),
            "logistic": {
                "intercept": float(fit.coef[0]),
                "beta_power_dbm": float(fit.coef[1]),
                "beta_freq_ghz": float(fit.coef[2]),
                "z_values": [None if np.isnan(z) else float(z) for z in fit.z_values],
                "p_values": [None if np.isnan(p) else float(p) for p in fit.p_values],
                "converged": fit.converged,
                "separated": fit.separated,
            },
        }

    omni_failures = [
        (r.x, r.y)
        for r in records
        if r.scenario_id.endswith(Sensing.OMNI.value) and not r.success
    ]
    grid = failure_heatmap(omni_failures, config.bounds, bins=20)
    summary["failure_heatmap"] = {
        "sensing": Sensing.OMNI.value,
        "bins": 20,
        "total_failures": int(grid.sum()),
        "counts": grid.tolist(),
    }
    return summary


def write_summary(summary: dict, path):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_heatmap_csv(grid: np.ndarray, path):
    """20 rows x 20 columns of failure counts, y ascending by row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(grid):
            writer.writerow([int(v) for v in row])


def campaign_runtime(fn, *args, **kwargs):
    """Run a callable and report (result, elapsed seconds)."""
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start
