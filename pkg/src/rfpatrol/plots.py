"""Static SVG figures for campaign results."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .campaign import CampaignConfig, Scenario, TrialRecord
from .geometry import PatrolRoute


def plot_routes_and_sources(
    scenario: Scenario,
    routes: list[PatrolRoute],
    records: list[TrialRecord],
    config: CampaignConfig,
    path,
):
    """Patrol polygons with per-trial source positions, colored by outcome."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for route in routes:
        loop = np.vstack([route.waypoints, route.waypoints[:1]])
        ax.plot(loop[:, 0], loop[:, 1], "-o", markersize=3, linewidth=1.2)
    recs = [r for r in records if r.scenario_id == scenario.id]
    hits = [(r.x, r.y) for r in recs if r.success]
    misses = [(r.x, r.y) for r in recs if not r.success]
    if hits:
        pts = np.array(hits)
        ax.scatter(pts[:, 0], pts[:, 1], marker=".", c="tab:green", s=14, label="localized")
    if misses:
        pts = np.array(misses)
        ax.scatter(pts[:, 0], pts[:, 1], marker="x", c="tab:red", s=18, label="failed")
    ax.set_xlim(0, config.map_width_m)
    ax.set_ylim(0, config.map_height_m)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(scenario.id)
    if hits or misses:
        ax.legend(loc="upper right", fontsize=8)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def plot_error_boxes(records: list[TrialRecord], path):
    """Distribution of localization error per scenario (successful trials)."""
    by_scenario: dict[str, list[float]] = {}
    for r in records:
        if r.success:
            by_scenario.setdefault(r.scenario_id, []).append(r.abs_err_m)
    labels = sorted(by_scenario)
    fig, ax = plt.subplots(figsize=(1.2 * max(len(labels), 4), 4))
    if labels:
        ax.boxplot([by_scenario[k] for k in labels], tick_labels=labels)
        ax.tick_params(axis="x", rotation=45)
    ax.set_ylabel("absolute error [m]")
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def plot_success_vs_parameters(records: list[TrialRecord], path, bins: int = 8):
    """Binned success rate against source power and frequency, per sensing mode."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for sensing in ("omni", "directional"):
        pool = [r for r in records if r.scenario_id.endswith(sensing)]
        if not pool:
            continue
        power = np.array([r.power_dbm for r in pool])
        freq = np.array([r.freq_hz / 1e9 for r in pool])
        ok = np.array([r.success for r in pool], dtype=float)
        for ax, values, label in ((axes[0], power, "power [dBm]"), (axes[1], freq, "frequency [GHz]")):
            edges = np.linspace(values.min(), values.max(), bins + 1)
            centers = 0.5 * (edges[:-1] + edges[1:])
            rate = []
            for lo, hi in zip(edges[:-1], edges[1:]):
                sel = (values >= lo) & (values <= hi if hi == edges[-1] else values < hi)
                rate.append(100.0 * ok[sel].mean() if sel.any() else np.nan)
            ax.plot(centers, rate, "-o", markersize=4, label=sensing)
            ax.set_xlabel(label)
            ax.set_ylabel("success rate [%]")
            ax.set_ylim(-2, 102)
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def plot_failure_heatmap(grid: np.ndarray, config: CampaignConfig, path):
    """Spatial distribution of omni localization failures."""
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(
        np.asarray(grid),
        origin="lower",
        extent=(0, config.map_width_m, 0, config.map_height_m),
        cmap="magma",
    )
    fig.colorbar(im, ax=ax, label="failure count")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)


def emit_all_plots(
    records: list[TrialRecord],
    summary: dict,
    routes_by_scenario: dict[str, list[PatrolRoute]],
    config: CampaignConfig,
    out_dir,
):
    """Write the full figure set into ``out_dir`` and return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    from .campaign import scenario_by_id  # local import to avoid a cycle at module load

    for scenario_id, routes in sorted(routes_by_scenario.items()):
        p = out / f"routes_{scenario_id}.svg"
        plot_routes_and_sources(scenario_by_id(scenario_id), routes, records, config, p)
        paths.append(p)
    p = out / "error_boxplot.svg"
    plot_error_boxes(records, p)
    paths.append(p)
    p = out / "success_vs_parameters.svg"
    plot_success_vs_parameters(records, p)
    paths.append(p)
    grid = np.array(summary["failure_heatmap"]["counts"])
    p = out / "failure_heatmap.svg"
    plot_failure_heatmap(grid, config, p)
    paths.append(p)
    return paths
