import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

from vtsynth.model import load_model

from helpers import model_path

# keep property tests reproducible run to run
settings.register_profile("deterministic", derandomize=True, deadline=None)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def email_model():
    return load_model(model_path("email.json"))


@pytest.fixture(scope="session")
def coffee_model():
    return load_model(model_path("coffee.json"))


@pytest.fixture(scope="session")
def coffee_events_model():
    return load_model(model_path("coffee_events.json"))


@pytest.fixture(scope="session")
def request_monitor_model():
    return load_model(model_path("request_monitor.json"))


@pytest.fixture(scope="session")
def lookahead_model():
    return load_model(model_path("lookahead_demo.json"))
