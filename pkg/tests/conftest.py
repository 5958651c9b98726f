# conftest.py
"""
Central pytest configuration and fixtures for the simulator tests.
Contains session-scope fixtures for configs, fixture data and seeded factories.
"""
import json
import math
import os
import sys
from pathlib import Path

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.analytic import PreparationParams
from src.config import SimulatorSettings
from src.parameter_factory import AttackFactory, PreparationFactory, QuditFactory, seed_factories
from src.protocol import ProtocolConfig

pytest_plugins = [
    "tests.pytest_metrics_collector",
]

ROOT = Path(__file__).resolve().parent.parent
FACTORY_SEED = 1729


@pytest.fixture(scope="session")
def settings():
    """Process settings as the environment resolves them"""
    return SimulatorSettings.from_env()


@pytest.fixture(scope="session")
def fixture_data():
    """Load hand-derived expected values"""
    with open(ROOT / "tests" / "data" / "fixtures.json") as f:
        return json.load(f)


@pytest.fixture(scope="session")
def configs_dir() -> Path:
    return ROOT / "configs"


@pytest.fixture(autouse=True)
def seeded_factories():
    """Every test starts from the same factory stream"""
    seed_factories(FACTORY_SEED)


@pytest.fixture
def preparation_factory() -> type:
    return PreparationFactory


@pytest.fixture
def qudit_factory() -> type:
    return QuditFactory


@pytest.fixture
def attack_factory() -> type:
    return AttackFactory


@pytest.fixture
def fixture_alice():
    """theta = phi = pi/6"""
    return PreparationParams(theta=math.pi / 6, phi=math.pi / 6)


@pytest.fixture
def fixture_bob():
    """theta = pi/3, phi = pi/6"""
    return PreparationParams(theta=math.pi / 3, phi=math.pi / 6)


@pytest.fixture
def exact_config():
    """Noiseless session with exact probabilities and the separation check off"""
    def build(**overrides):
        data = {
            "group_size": 100,
            "num_groups": 10,
            "exact_probabilities": True,
            "check_tolerances": {"eavesdrop_separation": 0.0},
        }
        data.update(overrides)
        return ProtocolConfig.model_validate(data)
    return build


@pytest.fixture
def clean_env(monkeypatch):
    """Strip simulator variables so settings fall back to defaults"""
    for name in ("QNDP_OUT_DIR", "QNDP_LOG_LEVEL", "QNDP_WORKERS", "QNDP_SEED", "QNDP_PROFILE", "SOURCE_DATE_EPOCH"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch
