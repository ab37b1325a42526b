import math

import numpy as np
import pytest

from dbt_common.exceptions import DbtValidationError

from flickerbound.spectral import (
    SignalWindow,
    ensemble_statistics,
    power_estimate,
    power_spectrum,
    trapezoid_weights,
    window_transforms,
)


def white_windows(rng, count, n, dt, sigma=1.0):
    return [SignalWindow(dt, sigma * rng.standard_normal(n)) for _ in range(count)]


def test_trapezoid_weights():
    weights = trapezoid_weights(5, 0.1)
    np.testing.assert_allclose(weights, [0.05, 0.1, 0.1, 0.1, 0.05])
    assert math.fsum(weights) == pytest.approx(0.4)
    np.testing.assert_array_equal(trapezoid_weights(1, 0.1), [0.1])


def test_transforms_of_a_sine():
    dt, n = 1e-3, 1000
    window = SignalWindow(dt, np.sin(2 * math.pi * np.arange(n) * dt))
    us, uc = window_transforms(window, 2 * math.pi)
    assert us == pytest.approx(0.5, abs=1e-5)
    assert uc == pytest.approx(0.0, abs=1e-5)


def test_transforms_are_odd_and_even(rng):
    (window,) = white_windows(rng, 1, 64, 0.01)
    us, uc = window_transforms(window, 7.3)
    us_neg, uc_neg = window_transforms(window, -7.3)
    assert us_neg == -us
    assert uc_neg == uc


def test_power_is_even_in_f(rng):
    ensemble = white_windows(rng, 5, 128, 0.01)
    assert power_estimate(ensemble, 3.1) == power_estimate(ensemble, -3.1)


def test_mean_does_not_depend_on_order(rng):
    ensemble = white_windows(rng, 40, 128, 0.01)
    f_grid = [0.5, 2.0, 9.0]
    forward = power_spectrum(ensemble, f_grid)
    backward = power_spectrum(list(reversed(ensemble)), f_grid)
    np.testing.assert_array_equal(forward.values, backward.values)


def test_white_noise_level(rng):
    n, dt, sigma = 256, 0.01, 0.7
    ensemble = white_windows(rng, 2000, n, dt, sigma)
    f_grid = [1.0, 5.0, 12.5, 30.0]
    stats = ensemble_statistics(ensemble, f_grid)
    # sum of squared trapezoid weights over t_m
    expected = sigma**2 * dt * (n - 1.5) / n
    for mean, std_error in zip(stats["mean"], stats["std_error"]):
        assert abs(mean - expected) <= 4 * std_error


def test_streams_a_generator(rng):
    ensemble = white_windows(rng, 10, 64, 0.01)
    from_list = power_spectrum(ensemble, [1.0, 2.0])
    from_generator = power_spectrum((w for w in ensemble), [1.0, 2.0])
    np.testing.assert_array_equal(from_list.values, from_generator.values)
    assert from_list.units == "V^2/Hz"


def test_single_window_has_no_error_bar(rng):
    stats = ensemble_statistics(white_windows(rng, 1, 64, 0.01), [1.0])
    assert stats["std_error"] == [math.inf]


def test_windows_must_share_a_shape(rng):
    ensemble = white_windows(rng, 2, 64, 0.01) + white_windows(rng, 1, 32, 0.01)
    with pytest.raises(DbtValidationError, match="window 2"):
        power_spectrum(ensemble, [1.0])


def test_empty_ensemble():
    with pytest.raises(DbtValidationError, match="at least one window"):
        power_spectrum([], [1.0])


def test_frequencies_must_be_finite(rng):
    with pytest.raises(DbtValidationError, match="f must be finite"):
        power_spectrum(white_windows(rng, 1, 64, 0.01), [float("nan")])
