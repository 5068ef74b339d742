"""Tests for configuration parsing and validation."""
from pathlib import Path

import pytest

from otfs_array.config import ExperimentConfig, load_config, parse_config_text
from otfs_array.const import (
    DEFAULT_M,
    DEFAULT_N,
    FULL_ANTENNAS,
    PATTERN_PROPOSED,
    SNR_REF_ANTENNA,
)
from otfs_array.exceptions import ConfigurationError


class TestParseConfigText:
    """Test the flat key = value format."""

    def test_comments_and_blank_lines(self):
        """Test that comments and blank lines are skipped."""
        text = "# header\n\nM = 16   # delay bins\nantennas = 32, 64\n"
        assert parse_config_text(text) == {"M": "16", "antennas": "32, 64"}

    def test_duplicate_key(self):
        """Test that a repeated key fails."""
        with pytest.raises(ConfigurationError) as err:
            parse_config_text("M = 16\nM = 32\n")
        assert err.value.key == "M"

    def test_malformed_line(self):
        """Test that a line without '=' fails."""
        with pytest.raises(ConfigurationError, match="line 2"):
            parse_config_text("M = 16\nN 32\n")


class TestExperimentConfig:
    """Test schema validation."""

    def test_defaults(self):
        """Test the desk-scale defaults."""
        config = ExperimentConfig.from_mapping({})
        assert (config.M, config.N) == (DEFAULT_M, DEFAULT_N)
        assert config.pattern == PATTERN_PROPOSED
        assert config.profile.name == "P4"
        assert config.oracle_checks is True

    def test_lists_and_coercion(self):
        """Test comma lists and numeric coercion."""
        config = ExperimentConfig.from_mapping(
            {"antennas": "32, 64", "snr_db": "0,10", "trials": "5", "oracle_checks": "false"}
        )
        assert config.antennas == (32, 64)
        assert config.snr_db == (0.0, 10.0)
        assert config.trials == 5
        assert config.oracle_checks is False

    def test_invalid_choice_names_key(self):
        """Test that validation errors carry the key."""
        with pytest.raises(ConfigurationError) as err:
            ExperimentConfig.from_mapping({"pattern": "sparse"})
        assert err.value.key == "pattern"

    def test_unknown_key(self):
        """Test that unknown keys fail."""
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_mapping({"bandwidth": "1e6"})

    def test_out_of_range(self):
        """Test range checks."""
        with pytest.raises(ConfigurationError) as err:
            ExperimentConfig.from_mapping({"trials": 0})
        assert err.value.key == "trials"

    def test_custom_profile(self):
        """Test a custom power-delay profile."""
        config = ExperimentConfig.from_mapping(
            {"profile": "custom", "profile_delays_ns": "0, 500", "profile_powers_db": "0, -3"}
        )
        assert config.profile.taps == 2

    def test_custom_profile_incomplete(self):
        """Test that a custom profile needs delays and powers."""
        with pytest.raises(ConfigurationError):
            ExperimentConfig.from_mapping({"profile": "custom", "profile_delays_ns": "0, 500"})

    def test_paths_per_tap_length(self):
        """Test that the per-tap counts must match the profile."""
        with pytest.raises(ConfigurationError) as err:
            ExperimentConfig.from_mapping({"profile": "P6", "paths_per_tap": "2, 3"})
        assert err.value.key == "paths_per_tap"

    def test_full_scale(self):
        """Test the full-size switch."""
        config = ExperimentConfig.from_mapping({}).with_full_scale()
        assert (config.M, config.N) == (512, 128)
        assert config.antennas == FULL_ANTENNAS
        assert config.support(500.0) == (20, 16)

    def test_support_override(self):
        """Test explicit support values."""
        config = ExperimentConfig.from_mapping({"l_max": 5, "k_max": 2})
        assert config.support(500.0) == (5, 2)

    def test_frame_params_prefix(self):
        """Test that the prefix defaults to l_max."""
        config = ExperimentConfig.from_mapping({})
        assert config.frame_params(32).cp_len == 3
        assert config.replace(cp_len=7).frame_params(32).cp_len == 7

    def test_noise_variance(self):
        """Test the branch and antenna SNR references."""
        config = ExperimentConfig.from_mapping({})
        sigma2, reference = config.noise_variance(10.0, 64)
        assert sigma2 == pytest.approx(6.4)
        assert reference == pytest.approx(0.1)
        antenna = config.replace(snr_reference=SNR_REF_ANTENNA)
        assert antenna.noise_variance(10.0, 64) == pytest.approx((0.1, 0.1))

    def test_infinite_snr(self):
        """Test that an infinite SNR means no noise."""
        config = ExperimentConfig.from_mapping({"snr_db": "inf"})
        assert config.noise_variance(config.snr_db[0], 16) == (0.0, 0.0)


class TestLoadConfig:
    """Test file loading and precedence."""

    def test_file_and_overrides(self, tmp_path):
        """Test that overrides win over the file."""
        path = tmp_path / "run.conf"
        path.write_text("seed = 5\nmode = time\ntrials = 9\n", encoding="utf-8")
        config = load_config(path, {"seed": 11, "mode": None})
        assert config.seed == 11
        assert config.mode == "time"
        assert config.trials == 9

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file fails."""
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "missing.conf")

    def test_shipped_configs(self):
        """Test that the shipped configs validate."""
        configs = Path(__file__).parent.parent / "configs"
        for name in ("default.conf", "full_scale.conf", "generalized.conf"):
            load_config(configs / name)
