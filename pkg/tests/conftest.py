import pytest

from star_secrecy import Scenario, generate_channels, trial_rng


@pytest.fixture
def default_scenario():
    return Scenario()


@pytest.fixture
def small_channels():
    sc = Scenario(m=4)
    return sc, generate_channels(sc, trial_rng(1, 0))


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", default=False,
                     help="skip the long acceptance criteria")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
