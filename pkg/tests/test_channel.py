import math

import numpy as np
import pytest

from masim.channel import (ChannelSpec, PathSpec, Region, angles_from_direction,
                           channel_gain, channel_spec_from_json,
                           channel_spec_to_json, direction_from_angles,
                           field_on_grid, sample_stochastic_channel)


def test_direction_from_angles_reference_points():
    np.testing.assert_allclose(direction_from_angles(0.0, 0.0), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(direction_from_angles(np.pi / 2, 0.0), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(direction_from_angles(np.pi / 2, np.pi / 2), [0, 1, 0], atol=1e-15)


def test_direction_rejects_out_of_range_theta():
    with pytest.raises(ValueError):
        direction_from_angles(-0.1, 0.0)
    with pytest.raises(ValueError):
        direction_from_angles(np.pi + 0.1, 0.0)


def test_direction_unit_norm_fuzz():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = direction_from_angles(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
        assert abs(np.linalg.norm(d) - 1.0) < 1e-12


def test_angle_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(50):
        theta, phi = rng.uniform(0.05, np.pi - 0.05), rng.uniform(0, 2 * np.pi)
        t2, p2 = angles_from_direction(direction_from_angles(theta, phi))
        assert abs(t2 - theta) < 1e-12
        assert abs((p2 - phi + np.pi) % (2 * np.pi) - np.pi) < 1e-12


def test_path_spec_validation():
    with pytest.raises(ValueError):
        PathSpec(rx_dir=np.array([1.0, 1.0, 0.0]), coeff=1.0)
    with pytest.raises(ValueError):
        PathSpec(rx_dir=np.array([0.0, 0.0, 1.0]), coeff=complex(np.nan, 0))


def test_channel_spec_validation():
    up = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        ChannelSpec(())
    mixed = (PathSpec(rx_dir=up, coeff=1.0),
             PathSpec(rx_dir=up, coeff=1.0, tx_dir=up))
    with pytest.raises(ValueError):
        ChannelSpec(mixed)


def test_single_unit_path_constant_envelope():
    spec = ChannelSpec((PathSpec(rx_dir=direction_from_angles(0.7, 1.2), coeff=1.0),))
    rng = np.random.default_rng(2)
    for _ in range(20):
        r = rng.uniform(-5, 5, 3)
        assert abs(abs(channel_gain(spec, r)) - 1.0) < 1e-12


def test_two_path_coherent_sum_and_cancellation():
    d1 = direction_from_angles(0.9, 0.1)
    d2 = direction_from_angles(1.3, 2.0)
    # At the origin both phases vanish, so the terms add or cancel exactly.
    add = ChannelSpec((PathSpec(d1, 1.0), PathSpec(d2, 1.0)))
    assert abs(abs(channel_gain(add, np.zeros(3))) ** 2 - 4.0) < 1e-12
    cancel = ChannelSpec((PathSpec(d1, 1.0), PathSpec(d2, -1.0)))
    assert abs(channel_gain(cancel, np.zeros(3))) < 1e-12


def test_phase_linearity_per_path():
    rng = np.random.default_rng(3)
    spec = sample_stochastic_channel(5, 11)
    for _ in range(50):
        r = rng.uniform(-3, 3, 3)
        delta = rng.uniform(-1, 1, 3)
        for path in spec.paths:
            term = lambda pos: path.coeff * np.exp(2j * np.pi * (path.rx_dir @ pos))
            diff = np.angle(term(r + delta)) - np.angle(term(r))
            expected = 2 * np.pi * (path.rx_dir @ delta)
            assert abs((diff - expected + np.pi) % (2 * np.pi) - np.pi) < 1e-9


def test_triangle_bound_fuzz():
    rng = np.random.default_rng(4)
    for seed in range(10):
        spec = sample_stochastic_channel(int(rng.integers(1, 9)), seed)
        bound = np.abs(spec.coefficients).sum()
        r = rng.uniform(-10, 10, (50, 3))
        assert (np.abs(channel_gain(spec, r)) <= bound + 1e-12).all()


def test_stochastic_channel_deterministic():
    a = sample_stochastic_channel(4, 7)
    b = sample_stochastic_channel(4, 7)
    assert np.array_equal(a.rx_directions, b.rx_directions)
    assert np.array_equal(a.coefficients, b.coefficients)
    c = sample_stochastic_channel(4, 8)
    assert not np.array_equal(a.coefficients, c.coefficients)


def test_stochastic_channel_rejects_zero_paths():
    with pytest.raises(ValueError):
        sample_stochastic_channel(0, 1)


def test_stochastic_channel_mean_power():
    # Total mean power is 1: per-path variance 1/L.
    rng = np.random.default_rng(12)
    draws = 100_000
    total = 0.0
    for _ in range(draws):
        total += float((np.abs(sample_stochastic_channel(8, rng).coefficients) ** 2).sum())
    assert abs(total / draws - 1.0) < 0.01


def test_stochastic_channel_single_path_variance():
    rng = np.random.default_rng(13)
    draws = 100_000
    total = 0.0
    for _ in range(draws):
        total += float(np.abs(sample_stochastic_channel(1, rng).coefficients[0]) ** 2)
    assert abs(total / draws - 1.0) < 0.02


@pytest.mark.parametrize("num_paths", [1, 2, 5, 10])
def test_reference_point_normalization(num_paths):
    # E[|h(ref)|^2] = 1 for every L; check within 3 sigma of the MC estimate.
    trials = 4000
    ref = np.zeros(3)
    values = np.empty(trials)
    for t in range(trials):
        values[t] = abs(channel_gain(sample_stochastic_channel(num_paths, (500, t)), ref)) ** 2
    sem = values.std(ddof=1) / math.sqrt(trials)
    assert abs(values.mean() - 1.0) < 3 * sem + 1e-3


def test_translation_covariance():
    # Translating the region equals rotating each coefficient by its own
    # fixed unit-modulus factor.
    spec = sample_stochastic_channel(4, 21)
    delta = np.array([0.37, -1.21, 0.0])
    rotated = ChannelSpec(tuple(
        PathSpec(p.rx_dir, p.coeff * np.exp(2j * np.pi * (p.rx_dir @ delta)))
        for p in spec.paths))
    region = Region.square(2.0)
    shifted = Region(origin=region.origin + delta, extents=region.extents)
    h_shifted, _ = field_on_grid(spec, shifted, 0.25)
    h_rotated, _ = field_on_grid(rotated, region, 0.25)
    np.testing.assert_allclose(h_shifted, h_rotated, atol=1e-12)


def test_field_on_grid_matches_pointwise():
    spec = sample_stochastic_channel(6, 31)
    region = Region(origin=[-1.0, 0.5, 0.25], extents=[2.0, 1.5, 0.0])
    values, coords = field_on_grid(spec, region, 0.3)
    for i in (0, 3, values.shape[0] - 1):
        for j in (0, 2, values.shape[1] - 1):
            r = np.array([coords[0][i], coords[1][j], 0.25])
            assert abs(values[i, j] - channel_gain(spec, r)) < 1e-12


def test_region_validation_and_reference_default():
    region = Region(origin=[0, 0, 0], extents=[2, 4, 0])
    np.testing.assert_allclose(region.reference_point, [1, 2, 0])
    assert region.free_axes == (0, 1)
    with pytest.raises(ValueError):
        Region(origin=[0, 0, 0], extents=[-1, 0, 0])
    with pytest.raises(ValueError):
        Region(origin=[0, 0, 0], extents=[1, 1, 0], reference_point=[5, 0, 0])


def test_grid_coords_dimensions():
    region = Region(origin=[0, 0, 0], extents=[4.0, 4.0, 0.0])
    coords = region.grid_coords(0.05)
    assert [c.size for c in coords] == [81, 81]


def test_json_round_trip():
    spec = sample_stochastic_channel(3, 17, include_tx=True)
    back = channel_spec_from_json(channel_spec_to_json(spec))
    np.testing.assert_allclose(back.rx_directions, spec.rx_directions, atol=1e-12)
    np.testing.assert_allclose(back.tx_directions, spec.tx_directions, atol=1e-12)
    np.testing.assert_allclose(back.coefficients, spec.coefficients, atol=1e-15)
