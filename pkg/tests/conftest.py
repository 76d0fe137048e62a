import pytest

from ioisac import Evaluator, default_scenario, gen_channels


@pytest.fixture(scope="session")
def cfg():
    return default_scenario()


@pytest.fixture(scope="session")
def chans(cfg):
    return gen_channels(cfg)


@pytest.fixture(scope="session")
def evaluator(cfg, chans):
    # Shared across tests: evaluations are pure and memoized per activation.
    return Evaluator(cfg, chans)
