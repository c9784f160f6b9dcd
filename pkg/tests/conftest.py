import warnings

import pytest
from hypothesis import HealthCheck, settings

from linefail import MeshSpec, RunConfig, ScenarioConfig

settings.register_profile("repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


def desk_config(scenario: int = 1, n_steps: int = 400, snapshot_every: int = 100, **params) -> RunConfig:
    """100 elements, 100 steps per year, aging sped up so failure comes within a few years."""
    cfg = RunConfig(
        mesh=MeshSpec(n_elements=100),
        scenario=ScenarioConfig.preset(scenario),
        n_steps=n_steps,
        snapshot_every=snapshot_every,
    )
    return cfg.with_params({"a": 1e-9, "I_b": 1300.0, **params})


@pytest.fixture
def desk():
    return desk_config


@pytest.fixture(autouse=True)
def _quiet_severance_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="conductor nearly severed")
        yield
