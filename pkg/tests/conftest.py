import numpy as np
import pytest

from commgate.dataset import fit_reward_cdf, load_ratings
from commgate.distributions import RewardDistribution

HOTEL_CSV = "data/hotel_ratings.csv"


@pytest.fixture(scope="session")
def uniform():
    return RewardDistribution.uniform()


@pytest.fixture(scope="session")
def hotel_table():
    return load_ratings(HOTEL_CSV)


@pytest.fixture(scope="session")
def hotel_dist(hotel_table):
    return fit_reward_cdf(hotel_table)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.Philox(12345))
