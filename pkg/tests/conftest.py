from __future__ import annotations

import pytest

from mpuesim.scenario import ScenarioConfig


@pytest.fixture
def small_config() -> ScenarioConfig:
    """A short, small run used by engine-level tests."""
    return ScenarioConfig(n_ues=12, sim_duration_s=2.0, rng_seed=3)
