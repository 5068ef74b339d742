"""Test fixtures for the OTFS array simulator."""
from __future__ import annotations

import numpy as np
import pytest

from otfs_array.channel import channel_from_paths
from otfs_array.config import ExperimentConfig
from otfs_array.const import PATTERN_FULL_GUARD
from otfs_array.models import DDFrame, FrameParams
from otfs_array.pilot import make_pattern
from otfs_array.selftest import random_frame


@pytest.fixture
def rng():
    """Return a seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def small_params():
    """Return an 8x8 frame with four antennas."""
    return FrameParams.from_spacing_ratio(8, 8, 15e3, 4e9, 4, 0.45)


@pytest.fixture
def desk_params():
    """Return the 64x32 desk frame with 64 antennas and a 3-sample prefix."""
    return FrameParams.from_spacing_ratio(64, 32, 15e3, 4e9, 64, 0.45, 3)


@pytest.fixture
def desk_f_d(desk_params):
    """Return a Doppler spread with N T f_d = 4."""
    return 4.0 / (desk_params.N * desk_params.T)


@pytest.fixture
def guard_pattern(desk_params):
    """Return a full-guard pattern for l_max=3, k_max=4 with d0 = 10."""
    return make_pattern(PATTERN_FULL_GUARD, desk_params, 3, 4, 40.0, 0.01)


@pytest.fixture
def two_path_channel(desk_params, desk_f_d):
    """Return two well-separated paths: (l=1, k=2) at u=0.5 and (l=3, k=-2) at u=-0.4."""
    return channel_from_paths(
        desk_params,
        [(1, 0.5, 1.0 + 0.2j), (3, -0.4, -0.5 + 0.6j)],
        desk_f_d,
        k_max=4,
    )


@pytest.fixture
def dd_frame(rng, desk_params):
    """Return a random frame on the desk grid."""
    return DDFrame(random_frame(rng, desk_params.shape))


@pytest.fixture
def tiny_config():
    """Return a 16x8 config small enough for end-to-end runs."""
    return ExperimentConfig.from_mapping(
        {
            "M": 16,
            "N": 8,
            "antennas": "16",
            "velocities_kmh": "30",
            "snr_db": "10",
            "mse_snr_p_db": "30",
            "trials": 3,
            "seed": 7,
            "oracle_checks": False,
        }
    )
