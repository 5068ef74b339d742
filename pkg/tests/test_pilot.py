"""Tests for pilot patterns and frame assembly."""
import numpy as np
import pytest

from otfs_array.const import (
    PATTERN_FULL_GUARD,
    PATTERN_NAIVE,
    PATTERN_PROPOSED,
    ROLE_DATA,
    ROLE_GUARD,
    ROLE_PILOT,
)
from otfs_array.exceptions import ConfigurationError, DomainError, SizeError
from otfs_array.frame import assemble_frame, extract_data
from otfs_array.models import FrameParams
from otfs_array.modulation import qam_modulate
from otfs_array.pilot import (
    default_pilot_position,
    guard_window,
    make_pattern,
    overhead_count,
    pilot_amplitude,
)


class TestOverhead:
    """Test pilot plus guard accounting."""

    @pytest.mark.parametrize(
        ("variant", "k_max", "expected"),
        [
            (PATTERN_FULL_GUARD, 1, 205),
            (PATTERN_FULL_GUARD, 4, 697),
            (PATTERN_FULL_GUARD, 16, 2665),
            (PATTERN_NAIVE, 16, 1),
            (PATTERN_PROPOSED, 1, 63),
            (PATTERN_PROPOSED, 4, 189),
            (PATTERN_PROPOSED, 16, 693),
        ],
    )
    def test_full_scale_counts(self, variant, k_max, expected):
        """Test the pilot plus guard counts at l_max = 20."""
        assert overhead_count(variant, 20, k_max) == expected

    def test_full_scale_pattern_partitions_grid(self):
        """Test a 512x128 full-guard pattern."""
        params = FrameParams.from_spacing_ratio(512, 128, 15e3, 4e9, 1, 0.45)
        pattern = make_pattern(PATTERN_FULL_GUARD, params, 20, 16, 40.0, 0.01)
        assert pattern.overhead == 2665
        assert pattern.data_count == 65536 - 2665
        assert round(pattern.overhead_percent, 3) == 4.066

    def test_proposed_window_odd_l_max(self):
        """Test that an odd l_max leans the window toward smaller delays."""
        l_range, k_range = guard_window(PATTERN_PROPOSED, 31, 15, 3, 4)
        assert (l_range.start, l_range.stop) == (29, 33)
        assert (k_range.start, k_range.stop) == (11, 20)

    def test_unknown_variant(self):
        """Test that unknown variants fail."""
        with pytest.raises(ConfigurationError):
            overhead_count("sparse", 3, 1)


class TestMakePattern:
    """Test pattern construction."""

    def test_default_position_is_centre(self, desk_params):
        """Test the centre of the legal region."""
        assert default_pilot_position(desk_params, 3, 4) == (31, 15)

    @pytest.mark.parametrize("variant", [PATTERN_FULL_GUARD, PATTERN_NAIVE, PATTERN_PROPOSED])
    def test_roles(self, desk_params, variant):
        """Test the role grid of every variant."""
        pattern = make_pattern(variant, desk_params, 3, 4, 40.0, 0.01)
        roles = pattern.roles()
        assert roles.shape == desk_params.shape
        assert roles[pattern.l0, pattern.k0] == ROLE_PILOT
        assert np.count_nonzero(roles == ROLE_PILOT) == 1
        assert np.count_nonzero(roles == ROLE_GUARD) == pattern.overhead - 1
        assert np.count_nonzero(roles == ROLE_DATA) == pattern.data_count

    def test_explicit_position(self, desk_params):
        """Test an explicit legal pilot position."""
        pattern = make_pattern(PATTERN_PROPOSED, desk_params, 3, 4, 40.0, 0.01, l0=10, k0=20)
        assert (pattern.l0, pattern.k0) == (10, 20)

    def test_illegal_position(self, desk_params):
        """Test that a pilot too close to the edge fails."""
        with pytest.raises(ConfigurationError):
            make_pattern(PATTERN_FULL_GUARD, desk_params, 3, 4, 40.0, 0.01, l0=1, k0=15)

    def test_footprint_too_large(self, small_params):
        """Test that a footprint wider than the grid fails."""
        with pytest.raises(ConfigurationError):
            make_pattern(PATTERN_FULL_GUARD, small_params, 4, 1, 40.0, 0.01)

    def test_no_data_cells(self):
        """Test that a footprint covering the whole grid fails."""
        params = FrameParams.from_spacing_ratio(7, 5, 15e3, 4e9, 1, 0.45)
        with pytest.raises(ConfigurationError, match="no data cells"):
            make_pattern(PATTERN_FULL_GUARD, params, 3, 1, 40.0, 0.01)


class TestPilotAmplitude:
    """Test the pilot amplitude."""

    def test_amplitude(self):
        """Test |d0|^2 = sigma2 * 10^(SNR_p/10)."""
        assert pilot_amplitude(40.0, 0.01) == pytest.approx(10.0)

    def test_noiseless_fallback(self):
        """Test that zero noise falls back to the reference variance."""
        assert pilot_amplitude(40.0, 0.0) == pytest.approx(10.0)

    def test_negative_variance(self):
        """Test that a negative variance fails."""
        with pytest.raises(DomainError):
            pilot_amplitude(40.0, -1.0)


class TestFrame:
    """Test frame assembly and extraction."""

    def test_round_trip(self, rng, desk_params, guard_pattern):
        """Test that extraction returns the data in assembly order."""
        data = qam_modulate(rng.integers(0, 2, 2 * guard_pattern.data_count), 4)
        frame = assemble_frame(data, guard_pattern, desk_params)
        np.testing.assert_array_equal(extract_data(frame, guard_pattern), data)

    def test_pilot_and_guards(self, rng, desk_params, guard_pattern):
        """Test that guards are zero and the pilot carries d0."""
        data = qam_modulate(rng.integers(0, 2, 2 * guard_pattern.data_count), 4)
        frame = assemble_frame(data, guard_pattern, desk_params)
        assert frame.grid[guard_pattern.l0, guard_pattern.k0] == guard_pattern.d0
        flat = frame.vectorize()
        assert np.all(flat[guard_pattern.guard_indices] == 0)

    def test_data_count_mismatch(self, desk_params, guard_pattern):
        """Test that a wrong number of symbols fails."""
        with pytest.raises(SizeError):
            assemble_frame(np.ones(3), guard_pattern, desk_params)

    def test_extract_from_stack(self, rng, desk_params, guard_pattern):
        """Test extraction on an antenna stack."""
        data = qam_modulate(rng.integers(0, 2, 2 * guard_pattern.data_count), 4)
        frame = assemble_frame(data, guard_pattern, desk_params)
        stacked = type(frame)(np.stack([frame.grid, 2 * frame.grid]))
        extracted = extract_data(stacked, guard_pattern)
        assert extracted.shape == (2, guard_pattern.data_count)
        np.testing.assert_array_equal(extracted[1], 2 * data)
