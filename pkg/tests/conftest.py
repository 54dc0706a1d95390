import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from guideplan import GridMap, PlannerConfig, ScenarioSpec, build_corpus

settings.register_profile(
    "suite", deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("suite")


@pytest.fixture
def empty_grid():
    return GridMap(np.zeros((32, 32), dtype=bool))


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Six-entry corpus shared by CLI and evaluate tests; cheap to build."""
    out = tmp_path_factory.mktemp("corpus")
    specs = [ScenarioSpec(family=fam, rng_seed=1000 + i, resolution=48)
             for i, fam in enumerate(["corridor", "columns", "junction",
                                      "corridor", "columns", "junction"])]
    cfg = PlannerConfig(max_iterations=20_000)
    return build_corpus(specs, out, runs_per_map=6, oracle_config=cfg)
