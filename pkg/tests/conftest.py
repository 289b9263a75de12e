"""Shared fixtures: the canonical synthetic world and its trained model.

Everything downstream (unit tests, acceptance checks, CLI round trips)
keys off one deterministic dataset: 250 vehicles on the t-junction with
seed 7, split 200 train / 50 test by episode.
"""

import pytest

from grit.evaluation import generate_synthetic
from grit.trajectory import build_datasets
from grit.training import TrainConfig, train_model

FIXTURE_TEMPLATE = "t_junction"
FIXTURE_VEHICLES = 250
FIXTURE_SEED = 7
FIXTURE_TRAIN_EPISODES = 8
FIXTURE_CONFIG = TrainConfig(alpha=1.0, ccp_alpha=0.001)


@pytest.fixture(scope="session")
def fixture_world():
    return generate_synthetic(FIXTURE_TEMPLATE, FIXTURE_VEHICLES, seed=FIXTURE_SEED)


@pytest.fixture(scope="session")
def fixture_scenario(fixture_world):
    return fixture_world[0]


@pytest.fixture(scope="session")
def train_episodes(fixture_world):
    return fixture_world[1][:FIXTURE_TRAIN_EPISODES]


@pytest.fixture(scope="session")
def test_episodes(fixture_world):
    return fixture_world[1][FIXTURE_TRAIN_EPISODES:]


@pytest.fixture(scope="session")
def fixture_datasets(fixture_scenario, train_episodes):
    return build_datasets(train_episodes, fixture_scenario)


@pytest.fixture(scope="session")
def fixture_model(fixture_datasets):
    return train_model(fixture_datasets, FIXTURE_CONFIG)
