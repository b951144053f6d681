"""Shared fixtures: repo paths, default campaign config, cached plans."""

from pathlib import Path

import pytest

from rfpatrol.campaign import CampaignConfig, all_scenarios, plan_routes, run_campaign

REPO_ROOT = Path(__file__).resolve().parents[1]
PLANS_DIR = REPO_ROOT / "plans"


@pytest.fixture(scope="session")
def default_config() -> CampaignConfig:
    return CampaignConfig()


@pytest.fixture(scope="session")
def default_plans(default_config):
    """Routes for all 8 default scenarios, from the committed plan cache.

    Falls back to planning from scratch when the cache is absent (slow but
    deterministic: the regenerated plans are identical by construction).
    """
    return {
        scenario.id: plan_routes(scenario, default_config, plans_dir=PLANS_DIR)
        for scenario in all_scenarios()
    }


@pytest.fixture(scope="session")
def default_campaign(default_config, default_plans):
    """Records and wall time of the full default campaign (800 trials)."""
    from rfpatrol.campaign import campaign_runtime

    records, elapsed = campaign_runtime(
        run_campaign, default_config, plans_dir=PLANS_DIR
    )
    return records, elapsed
