import numpy as np
import pytest

from masim.channel import Region, channel_gain
from masim.reference import four_path_spec, two_path_spec


@pytest.fixture(scope="session")
def two_path():
    return two_path_spec()


@pytest.fixture(scope="session")
def four_path():
    return four_path_spec()


@pytest.fixture(scope="session")
def region4():
    return Region.square(4.0)


def brute_force_power_scan(spec, region, step):
    """Direct per-point |h|^2 scan (independent of the separable fast path)."""
    xs = np.arange(region.origin[0], region.upper[0] + 1e-9, step)
    ys = np.arange(region.origin[1], region.upper[1] + 1e-9, step)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = np.stack([gx, gy, np.full_like(gx, region.origin[2])], axis=-1)
    return np.abs(channel_gain(spec, points)) ** 2, xs, ys
