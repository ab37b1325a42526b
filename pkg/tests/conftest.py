import pytest
import numpy as np

from flickerbound import files
from flickerbound.include import SAMPLES_PATH


# fixed seed for every randomized test; change it and the statistical tolerances still hold
TEST_SEED = 20240917


def pytest_addoption(parser):
    parser.addoption("--seed", action="store", default=TEST_SEED, type=int)


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


@pytest.fixture(scope="session")
def samples_path():
    return SAMPLES_PATH


@pytest.fixture(scope="session")
def bundled_samples():
    return {record.name: record for record in files.load_bundled_samples()}


@pytest.fixture
def write_descriptor(tmp_path):
    def write(text, name="sample.sample"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write
