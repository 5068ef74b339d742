"""Transmit and receive chains of one OTFS frame over the array."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .beamforming import combine, genie_angles, scan_angles
from .channel import add_noise, propagate_ideal, propagate_time
from .const import ANGLES_GENIE, ANGLES_SCAN, CSI_ESTIMATED, CSI_PERFECT, MODE_IDEAL, MODE_TIME
from .equalizer import compensate, mrc_combine
from .estimation import estimate_branch
from .exceptions import ConfigurationError, DegenerateCombineError
from .frame import assemble_frame, extract_data
from .models import (
    BranchEstimate,
    BranchSignal,
    ChannelRealization,
    DDFrame,
    FrameParams,
    PilotPattern,
    ScanPolicy,
)
from .modulation import qam_modulate
from .transforms import heisenberg, isfft, sfft, wigner

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Detection:
    """Receiver output for one frame."""

    frame: DDFrame
    data: np.ndarray
    estimates: Tuple[BranchEstimate, ...]


def transmit(bits: np.ndarray, order: int, pattern: PilotPattern, params: FrameParams) -> DDFrame:
    """Map bits to QAM and lay them out around the pilot."""
    return assemble_frame(qam_modulate(bits, order), pattern, params)


def receive_frames(
    x: DDFrame,
    ch: ChannelRealization,
    params: FrameParams,
    mode: str,
    sigma2: float,
    rng: np.random.Generator,
) -> DDFrame:
    """Per-antenna received delay-Doppler grids, shape (E, M, N)."""
    if mode == MODE_IDEAL:
        return add_noise(propagate_ideal(x, ch, params), sigma2, rng)
    if mode == MODE_TIME:
        received = propagate_time(heisenberg(isfft(x), params), ch, params)
        return sfft(wigner(add_noise(received, sigma2, rng), params))
    raise ConfigurationError(f"unknown propagation mode {mode}", "mode")


def form_branches(
    frames: DDFrame,
    params: FrameParams,
    *,
    angles: str,
    channel: ChannelRealization | None = None,
    pattern: PilotPattern | None = None,
    policy: ScanPolicy | None = None,
    f_d: float = 0.0,
) -> list[BranchSignal]:
    """Beamform the received stack toward genie or scanned directions."""
    if angles == ANGLES_GENIE:
        if channel is None:
            raise ConfigurationError("genie angles need the channel realization", "angles")
        return [combine(frames, float(u), params) for u in genie_angles(channel)]
    if angles == ANGLES_SCAN:
        policy = policy or ScanPolicy()
        return scan_angles(frames, policy.grid(params), policy, pattern, params, f_d)
    raise ConfigurationError(f"unknown angle mode {angles}", "angles")


def detect(
    frames: DDFrame,
    pattern: PilotPattern,
    params: FrameParams,
    f_d: float,
    *,
    angles: str = ANGLES_GENIE,
    csi: str = CSI_ESTIMATED,
    channel: ChannelRealization | None = None,
    policy: ScanPolicy | None = None,
) -> Detection:
    """Beamform, estimate each branch, compensate and combine by MRC.

    Raises DegenerateCombineError when no branch carries gain, which includes
    a scan that detects nothing.
    """
    if csi == CSI_PERFECT:
        if channel is None:
            raise ConfigurationError("perfect CSI needs the channel realization", "csi")
        branches = form_branches(frames, params, angles=ANGLES_GENIE, channel=channel)
        estimates = [
            BranchEstimate(path.u, path.k, path.l, path.gain) for path in channel.paths
        ]
    elif csi == CSI_ESTIMATED:
        branches = form_branches(
            frames, params, angles=angles, channel=channel, pattern=pattern, policy=policy, f_d=f_d
        )
        estimates = [estimate_branch(b.frame, b.u, pattern, params, f_d) for b in branches]
    else:
        raise ConfigurationError(f"unknown CSI mode {csi}", "csi")

    if not branches:
        raise DegenerateCombineError("no branch to combine")
    compensated = [
        compensate(branch.frame, est.l_hat, est.k_hat) for branch, est in zip(branches, estimates)
    ]
    x_hat = mrc_combine(compensated, estimates, params)
    return Detection(x_hat, extract_data(x_hat, pattern), tuple(estimates))
