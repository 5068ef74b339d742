"""OTFS link-level simulator with a large uniform linear receive array."""
from __future__ import annotations

from .config import ExperimentConfig, load_config
from .const import DOMAIN
from .coordinator import SimulationCoordinator
from .exceptions import OtfsArrayError
from .models import ChannelRealization, DDFrame, FrameParams, PilotPattern, ResultRecord

__version__ = "1.0.0"

__all__ = [
    "DOMAIN",
    "ChannelRealization",
    "DDFrame",
    "ExperimentConfig",
    "FrameParams",
    "OtfsArrayError",
    "PilotPattern",
    "ResultRecord",
    "SimulationCoordinator",
    "load_config",
]
