"""Receive beamforming over the uniform linear array."""
from __future__ import annotations

import logging
import math

import numpy as np

from .channel import antenna_phases
from .estimation import estimate_doppler
from .exceptions import DomainError, SizeError
from .models import (
    AngleGrid,
    BranchSignal,
    ChannelRealization,
    DDFrame,
    FrameParams,
    PilotPattern,
    ScanPolicy,
    TimeSignal,
)

_LOGGER = logging.getLogger(__name__)


def steering_vector(u: float, params: FrameParams) -> np.ndarray:
    """Array response e^{j phi_i u} to a plane wave from cos angle u."""
    if abs(u) > 1:
        raise DomainError(f"cos angle {u} outside [-1, 1]")
    return np.exp(1j * antenna_phases(params) * u)


def combine(r: DDFrame | TimeSignal, u: float, params: FrameParams) -> BranchSignal:
    """Spatial matched filter (1/E) sum_i w_i^* r_i toward cos angle u."""
    if r.antennas != params.E:
        raise SizeError(f"expected {params.E} antenna signals, got {r.antennas}")
    weights = np.conj(steering_vector(u, params)) / params.E
    if isinstance(r, TimeSignal):
        frame = TimeSignal(np.tensordot(weights, r.samples, axes=(0, 0)), r.cp_len)
    else:
        frame = type(r)(np.tensordot(weights, r.grid, axes=(0, 0)))
    return BranchSignal(u, frame)


def array_gain(u_src, u_beam, params: FrameParams):
    """Normalized array gain |sin(pi E eta du / lambda)| / (E |sin(pi eta du / lambda)|)."""
    x = math.pi * params.eta * (np.asarray(u_src, dtype=float) - np.asarray(u_beam, dtype=float)) / params.wavelength
    numerator = np.abs(np.sin(params.E * x))
    denominator = params.E * np.abs(np.sin(x))
    gain = np.divide(numerator, denominator, out=np.ones_like(x), where=denominator > 0)
    return float(gain) if gain.ndim == 0 else gain


def array_gain_direct(u_src: float, u_beam: float, params: FrameParams) -> float:
    """Array gain as the magnitude of the normalized geometric sum."""
    return float(np.abs(np.sum(np.exp(1j * antenna_phases(params) * (u_src - u_beam)))) / params.E)


def array_gain_bound(du: float, params: FrameParams) -> float:
    """Upper bound 1 / (E |sin(pi eta du / lambda)|) on the sidelobe gain."""
    return 1.0 / (params.E * abs(math.sin(math.pi * params.eta * du / params.wavelength)))


def genie_angles(ch: ChannelRealization) -> np.ndarray:
    """Cos AoA of every path; branch b belongs to path b."""
    return ch.cos_angles


def _scan_metric(
    frames: DDFrame,
    grid: AngleGrid,
    pattern: PilotPattern,
    params: FrameParams,
    f_d: float,
) -> np.ndarray:
    """Peak pilot-echo magnitude of the branch formed at every grid point."""
    region = frames.grid[:, pattern.l0:pattern.l0 + pattern.l_max + 1, :]
    rows = np.array(
        [(pattern.k0 + estimate_doppler(u, params, f_d)) % pattern.N for u in grid.u_values]
    )
    weights = np.conj(np.exp(1j * np.outer(grid.u_values, antenna_phases(params)))) / params.E
    metric = np.empty(grid.count)
    for row in np.unique(rows):
        points = np.flatnonzero(rows == row)
        metric[points] = np.max(np.abs(weights[points] @ region[:, :, row]), axis=1)
    return metric


def _local_maxima(metric: np.ndarray, floor: float) -> np.ndarray:
    left = np.concatenate(([-np.inf], metric[:-1]))
    right = np.concatenate((metric[1:], [-np.inf]))
    return np.flatnonzero((metric >= floor) & (metric >= left) & (metric >= right))


def scan_angles(
    frames: DDFrame,
    grid: AngleGrid,
    policy: ScanPolicy,
    pattern: PilotPattern,
    params: FrameParams,
    f_d: float,
) -> list[BranchSignal]:
    """Detect beam directions by thresholding pilot-echo amplitude over the grid.

    Returns combined branches sorted by u; empty when the frame carries no
    energy in the pilot region.
    """
    if frames.antennas != params.E:
        raise SizeError(f"expected {params.E} antenna frames, got {frames.antennas}")
    metric = _scan_metric(frames, grid, pattern, params, f_d)
    peak = float(np.max(metric))
    if peak <= 0:
        _LOGGER.warning("Angle scan found no energy in the pilot region")
        return []

    candidates = _local_maxima(metric, policy.threshold_ratio * peak)
    width = policy.merge_width_factor * params.mainlobe_width
    accepted: list[int] = []
    for index in sorted(candidates, key=lambda i: (-metric[i], i)):
        u = grid.u_values[index]
        if all(abs(u - grid.u_values[other]) >= width for other in accepted):
            accepted.append(index)

    branches = []
    for index in sorted(accepted):
        branch = combine(frames, float(grid.u_values[index]), params)
        branches.append(BranchSignal(branch.u, branch.frame, float(metric[index])))
    _LOGGER.debug("Scan detected %d branches at u=%s", len(branches), [round(b.u, 4) for b in branches])
    return branches
