"""Tests for channel sampling and propagation."""
import math

import numpy as np
import pytest

from otfs_array.channel import (
    DelayProfile,
    add_noise,
    build_dd_channel_matrix,
    channel_from_paths,
    propagate_ideal,
    propagate_time,
    rectangular_dd_response,
    round_half_up,
    sample_channel,
    support,
)
from otfs_array.const import AOA_KEEP, Q_GENERALIZED
from otfs_array.exceptions import ConfigurationError, DomainError, SizeError
from otfs_array.models import DDFrame, FrameParams, TimeSignal
from otfs_array.selftest import (
    RANDOM_CHANNEL_MSE_BOUND,
    SINGLE_PATH_MSE_BOUND,
    random_channel_mse,
    random_frame,
    random_integer_channel,
    time_domain_mse,
)
from otfs_array.transforms import heisenberg, isfft, to_delay_doppler


class TestDelayProfile:
    """Test power-delay profiles."""

    def test_presets(self):
        """Test the built-in profiles."""
        assert DelayProfile.preset("P4").taps == 4
        assert DelayProfile.preset("P6").taps == 6
        assert DelayProfile.preset("P4").max_delay == pytest.approx(2.51e-6)

    def test_unknown_preset(self):
        """Test that unknown profiles fail."""
        with pytest.raises(ConfigurationError):
            DelayProfile.preset("P9")

    def test_empty(self):
        """Test that an empty profile fails."""
        with pytest.raises(ConfigurationError):
            DelayProfile("custom", (), ())

    def test_ragged(self):
        """Test that delays and powers must pair up."""
        with pytest.raises(ConfigurationError):
            DelayProfile("custom", (0.0, 100.0), (0.0,))

    @pytest.mark.parametrize(("M", "N", "velocity", "expected"), [
        (64, 32, 500.0, (3, 4)),
        (512, 128, 30.0, (20, 1)),
        (512, 128, 120.0, (20, 4)),
        (512, 128, 500.0, (20, 16)),
    ])
    def test_support(self, M, N, velocity, expected):
        """Test the delay and Doppler support."""
        params = FrameParams.from_spacing_ratio(M, N, 15e3, 4e9, 1, 0.45)
        assert support(DelayProfile.preset("P4"), velocity, params) == expected


class TestSampleChannel:
    """Test channel realizations."""

    def test_paths_inside_support(self, rng, desk_params):
        """Test that every path index lies inside the support."""
        profile = DelayProfile.preset("P6")
        for _ in range(20):
            ch = sample_channel(profile, 500.0, desk_params, rng, aoa_policy=AOA_KEEP)
            assert ch.B == 6
            assert np.all(ch.delay_indices <= ch.l_max)
            assert np.all(np.abs(ch.doppler_indices) <= ch.k_max)

    def test_mean_powers_normalized(self, rng, desk_params):
        """Test that path mean powers sum to one."""
        ch = sample_channel(DelayProfile.preset("P4"), 120.0, desk_params, rng)
        assert sum(path.mean_power for path in ch.paths) == pytest.approx(1.0)

    def test_deterministic(self, desk_params):
        """Test that equal generators give equal channels."""
        profile = DelayProfile.preset("P4")
        first = sample_channel(profile, 120.0, desk_params, np.random.default_rng(3))
        second = sample_channel(profile, 120.0, desk_params, np.random.default_rng(3))
        np.testing.assert_array_equal(first.gains, second.gains)
        np.testing.assert_array_equal(first.cos_angles, second.cos_angles)

    def test_doppler_follows_angle(self, rng, desk_params):
        """Test nu = f_d cos(theta) and k = round(N T nu)."""
        ch = sample_channel(DelayProfile.preset("P4"), 500.0, desk_params, rng)
        f_d = desk_params.max_doppler(500.0)
        for path in ch.paths:
            assert path.doppler == pytest.approx(f_d * path.u)
            assert path.k == round_half_up(desk_params.N * desk_params.T * path.doppler)

    def test_generalized_paths_share_tap_delay(self, rng, desk_params):
        """Test several paths per tap."""
        ch = sample_channel(
            DelayProfile.preset("P6"), 120.0, desk_params, rng, Q_GENERALIZED, aoa_policy=AOA_KEEP
        )
        assert ch.B == 16
        for tap in range(6):
            delays = {path.delay for path in ch.paths if path.tap == tap}
            assert len(delays) == 1

    def test_paths_per_tap_length(self, rng, desk_params):
        """Test that the per-tap path counts must match the taps."""
        with pytest.raises(ConfigurationError):
            sample_channel(DelayProfile.preset("P4"), 120.0, desk_params, rng, (1, 2))

    def test_resample_exhausted(self, rng, desk_params):
        """Test that an impossible separation fails after the resample budget."""
        with pytest.raises(ConfigurationError):
            sample_channel(
                DelayProfile.preset("P4"), 120.0, desk_params, rng, min_separation=1.5, max_resamples=5
            )

    def test_keep_policy(self, rng, desk_params):
        """Test that the keep policy accepts any draw."""
        ch = sample_channel(
            DelayProfile.preset("P4"), 120.0, desk_params, rng, aoa_policy=AOA_KEEP, min_separation=1.5
        )
        assert ch.B == 4

    def test_resample_honours_separation(self, rng, desk_params):
        """Test the minimum separation after resampling."""
        ch = sample_channel(DelayProfile.preset("P4"), 120.0, desk_params, rng, min_separation=0.2)
        assert ch.min_angle_separation() >= 0.2

    def test_support_too_small(self, rng, desk_params):
        """Test that paths outside an explicit support fail."""
        with pytest.raises(ConfigurationError):
            sample_channel(DelayProfile.preset("P4"), 120.0, desk_params, rng, l_max=0)


class TestChannelFromPaths:
    """Test hand-built channels."""

    def test_indices(self, two_path_channel):
        """Test the delay and Doppler indices."""
        assert two_path_channel.delay_indices.tolist() == [1, 3]
        assert two_path_channel.doppler_indices.tolist() == [2, -2]
        assert two_path_channel.l_max == 3

    def test_angle_domain(self, desk_params):
        """Test that |u| > 1 fails."""
        with pytest.raises(DomainError):
            channel_from_paths(desk_params, [(0, 1.2, 1.0)], 100.0)

    def test_empty(self, desk_params):
        """Test that a channel needs a path."""
        with pytest.raises(ConfigurationError):
            channel_from_paths(desk_params, [], 100.0)


class TestIdealPropagation:
    """Test the delay-Doppler input-output relation."""

    def test_single_path(self, dd_frame, desk_params):
        """Test one path as a phased cyclic shift."""
        ch = channel_from_paths(desk_params, [(2, 0.0, 0.5 - 0.5j)], 0.0)
        y = propagate_ideal(dd_frame, ch, desk_params, antenna=5)
        expected = (0.5 - 0.5j) * np.roll(dd_frame.grid, (2, 0), axis=(0, 1))
        np.testing.assert_allclose(y.grid, expected, atol=1e-12)

    def test_shift_phase(self, dd_frame, desk_params, two_path_channel):
        """Test the e^{-j 2 pi l k / MN} phase of a shifted path."""
        path = two_path_channel.paths[0]
        single = channel_from_paths(desk_params, [(path.l, path.u, 1.0)], two_path_channel.max_doppler)
        y = propagate_ideal(dd_frame, single, desk_params, antenna=0)
        expected = np.exp(-2j * math.pi * path.l * path.k / desk_params.size) * np.roll(
            dd_frame.grid, (path.l, path.k), axis=(0, 1)
        )
        np.testing.assert_allclose(y.grid, expected, atol=1e-12)

    def test_antenna_phase(self, dd_frame, desk_params, two_path_channel):
        """Test that antenna i sees e^{j phi_i u} on each path."""
        stack = propagate_ideal(dd_frame, two_path_channel, desk_params)
        assert stack.antennas == desk_params.E
        for antenna in (0, 7, 63):
            np.testing.assert_allclose(
                stack.grid[antenna],
                propagate_ideal(dd_frame, two_path_channel, desk_params, antenna=antenna).grid,
            )

    def test_antenna_out_of_range(self, dd_frame, desk_params, two_path_channel):
        """Test that an antenna index outside the array fails."""
        with pytest.raises(SizeError):
            propagate_ideal(dd_frame, two_path_channel, desk_params, antenna=64)

    def test_matrix_oracle(self, rng, small_params):
        """Test that the channel matrix reproduces the propagation."""
        for _ in range(20):
            ch = random_integer_channel(rng, small_params, 4, 3, 2)
            x = DDFrame(random_frame(rng, small_params.shape))
            y = propagate_ideal(x, ch, small_params, antenna=0)
            H = build_dd_channel_matrix(ch, small_params)
            np.testing.assert_allclose(H @ x.vectorize(), y.vectorize(), atol=1e-12)

    def test_matrix_cap(self, desk_params, two_path_channel):
        """Test that the dense matrix is capped."""
        with pytest.raises(SizeError):
            build_dd_channel_matrix(two_path_channel, desk_params, cap=1024)


class TestTimePropagation:
    """Test the sampled time-domain channel."""

    def test_rectangular_oracle(self, rng, desk_params):
        """Test the time chain against the rectangular-pulse closed form."""
        for _ in range(5):
            x = DDFrame(random_frame(rng, desk_params.shape))
            ch = random_integer_channel(rng, desk_params, 4, 3, 4)
            received = to_delay_doppler(
                propagate_time(heisenberg(isfft(x), desk_params), ch, desk_params), desk_params
            )
            np.testing.assert_allclose(
                received.grid, rectangular_dd_response(x, ch, desk_params).grid, atol=1e-9
            )

    def test_zero_doppler_matches_ideal(self, rng, desk_params):
        """Test that static channels match the ideal relation below the wrapped rows."""
        x = DDFrame(random_frame(rng, desk_params.shape))
        ch = random_integer_channel(rng, desk_params, 4, 3, 4, zero_doppler=True)
        received = to_delay_doppler(propagate_time(heisenberg(isfft(x), desk_params), ch, desk_params), desk_params)
        ideal = propagate_ideal(x, ch, desk_params)
        np.testing.assert_allclose(received.grid[:, 3:], ideal.grid[:, 3:], atol=1e-9)

    def test_single_doppler_path_mse(self, rng, desk_params):
        """Test the ideal-relation mismatch of a single l = 0, k = 1 path."""
        ch = channel_from_paths(desk_params, [(0, 1.0, 1.0)], 1.0 / (desk_params.N * desk_params.T))
        x = DDFrame(random_frame(rng, desk_params.shape))
        assert 0 < time_domain_mse(desk_params, ch, x) < SINGLE_PATH_MSE_BOUND

    def test_random_channel_mse(self, rng, desk_params, record_property):
        """Test the ideal-relation mismatch of random 4-path channels with |k| <= N/8."""
        spread = random_channel_mse(rng, desk_params, 20, 3, 4)
        record_property("time_domain_mse_mean", float(np.mean(spread)))
        record_property("time_domain_mse_max", float(np.max(spread)))
        assert np.all(spread > 0)
        assert np.mean(spread) < RANDOM_CHANNEL_MSE_BOUND

    def test_doppler_clock_starts_at_prefix(self, desk_params):
        """Test that the first body sample carries the Doppler phase of cp_len samples."""
        doppler = 1.0 / (desk_params.N * desk_params.T)
        ch = channel_from_paths(desk_params, [(0, 1.0, 1.0)], doppler)
        cp_len = desk_params.cp_len
        signal = TimeSignal(np.ones(desk_params.size + cp_len), cp_len)
        received = propagate_time(signal, ch, desk_params)
        expected = np.exp(2j * math.pi * (cp_len + np.arange(desk_params.size)) / desk_params.size)
        np.testing.assert_allclose(received.samples[0], expected, atol=1e-12)

    def test_prefix_too_short(self, dd_frame, desk_params):
        """Test that the prefix must cover the deepest path."""
        ch = channel_from_paths(desk_params, [(5, 0.0, 1.0)], 0.0)
        with pytest.raises(ConfigurationError):
            propagate_time(heisenberg(isfft(dd_frame), desk_params), ch, desk_params)

    def test_rejects_stack(self, desk_params, two_path_channel):
        """Test that the transmit signal is a single sequence."""
        with pytest.raises(SizeError):
            propagate_time(TimeSignal(np.ones((2, desk_params.size + 3)), 3), two_path_channel, desk_params)


class TestNoise:
    """Test additive noise."""

    def test_zero_variance_is_identity(self, rng, dd_frame):
        """Test that zero noise returns the input."""
        assert add_noise(dd_frame, 0.0, rng) is dd_frame

    def test_negative_variance(self, rng, dd_frame):
        """Test that a negative variance fails."""
        with pytest.raises(DomainError):
            add_noise(dd_frame, -0.1, rng)

    def test_variance(self, rng):
        """Test the empirical noise variance."""
        signal = TimeSignal(np.zeros(200_000))
        noisy = add_noise(signal, 0.5, rng)
        assert np.mean(np.abs(noisy.samples) ** 2) == pytest.approx(0.5, rel=0.02)
        assert noisy.cp_len == 0
