"""Per-branch channel estimation from the embedded pilot."""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from .channel import round_half_up
from .const import THRESHOLD_2D_PILOT_FLOOR, THRESHOLD_2D_SIGMAS
from .exceptions import DomainError
from .models import BranchEstimate, ChannelRealization, DDFrame, FrameParams, PilotPattern

_LOGGER = logging.getLogger(__name__)


def estimate_doppler(u_b: float, params: FrameParams, f_d: float) -> int:
    """Doppler index floor(N T f_d u_b + 0.5) of a beam direction."""
    if abs(u_b) > 1:
        raise DomainError(f"cos angle {u_b} outside [-1, 1]")
    return round_half_up(params.N * params.T * f_d * u_b)


def estimate_delay(branch: DDFrame, k_hat: int, pattern: PilotPattern) -> int:
    """Delay index of the strongest pilot echo on the branch's Doppler row."""
    row = (pattern.k0 + k_hat) % pattern.N
    window = np.abs(branch.grid[pattern.l0:pattern.l0 + pattern.l_max + 1, row])
    return int(np.argmax(window))


def _phase(l_hat: int, k_hat: int, params: FrameParams) -> complex:
    return complex(np.exp(2j * math.pi * l_hat * k_hat / params.size))


def estimate_gain(
    branch: DDFrame, l_hat: int, k_hat: int, pattern: PilotPattern, params: FrameParams
) -> complex:
    """Complex gain read at the pilot echo, with the delay-Doppler phase removed."""
    echo = branch.grid[(pattern.l0 + l_hat) % pattern.M, (pattern.k0 + k_hat) % pattern.N]
    return complex(echo * _phase(l_hat, k_hat, params) / pattern.d0)


def estimate_branch(
    branch: DDFrame, u_b: float, pattern: PilotPattern, params: FrameParams, f_d: float
) -> BranchEstimate:
    """Run the Doppler, delay and gain estimators on one branch."""
    k_hat = estimate_doppler(u_b, params, f_d)
    l_hat = estimate_delay(branch, k_hat, pattern)
    beta_hat = estimate_gain(branch, l_hat, k_hat, pattern, params)
    _LOGGER.debug("Branch u=%.4f: l=%d k=%d beta=%.4g", u_b, l_hat, k_hat, abs(beta_hat))
    return BranchEstimate(u_b, k_hat, l_hat, beta_hat)


def estimate_threshold_2d(
    frame: DDFrame,
    pattern: PilotPattern,
    params: FrameParams,
    threshold: float,
) -> list[BranchEstimate]:
    """Single-antenna benchmark: every pilot-region cell above threshold is a path."""
    estimates = []
    for k_hat in range(-pattern.k_max, pattern.k_max + 1):
        row = (pattern.k0 + k_hat) % pattern.N
        for l_hat in range(pattern.l_max + 1):
            if abs(frame.grid[pattern.l0 + l_hat, row]) >= threshold:
                estimates.append(
                    BranchEstimate(math.nan, k_hat, l_hat, estimate_gain(frame, l_hat, k_hat, pattern, params))
                )
    return estimates


def benchmark_threshold(sigma2: float, d0: complex) -> float:
    """Default detection threshold of the benchmark estimator.

    Three noise deviations, floored at a fixed fraction of the pilot amplitude
    so that noiseless frames do not turn every pilot-region cell into a path.
    """
    return max(THRESHOLD_2D_SIGMAS * math.sqrt(sigma2), THRESHOLD_2D_PILOT_FLOOR * abs(d0))


def _normalized_error(matched: np.ndarray, gains: np.ndarray) -> float:
    return float(np.sum(np.abs(matched - gains) ** 2) / np.sum(np.abs(gains) ** 2))


def branch_mse(
    estimates: Sequence[BranchEstimate], ch: ChannelRealization, mainlobe_width: float | None = None
) -> float:
    """Normalized gain error sum|b_hat - b|^2 / sum|b|^2 over the true paths.

    With mainlobe_width None the estimates are taken in path order (genie
    angles). Otherwise each path is matched to the nearest estimate in u within
    the width whose (l_hat, k_hat) equals the path's (l, k). Misses count as 0.
    """
    gains = ch.gains
    matched = np.zeros_like(gains)
    for index, path in enumerate(ch.paths):
        if mainlobe_width is None:
            candidates = [estimates[index]] if index < len(estimates) else []
        else:
            candidates = sorted(
                (est for est in estimates if abs(est.u - path.u) <= mainlobe_width),
                key=lambda est: abs(est.u - path.u),
            )
        for est in candidates:
            if est.l_hat == path.l and est.k_hat == path.k:
                matched[index] = est.beta_hat
                break
    return _normalized_error(matched, gains)


def threshold_mse(estimates: Sequence[BranchEstimate], ch: ChannelRealization) -> float:
    """Normalized error of the benchmark estimator.

    Paths sharing a delay-Doppler cell are indistinguishable to a single antenna,
    so the error is measured on the per-cell sum of gains.
    """
    cells: dict[tuple[int, int], complex] = {}
    for path in ch.paths:
        cells[(path.l, path.k)] = cells.get((path.l, path.k), 0j) + path.gain
    found = {(est.l_hat, est.k_hat): est.beta_hat for est in estimates}
    keys = list(cells)
    truth = np.array([cells[key] for key in keys])
    estimate = np.array([found.get(key, 0j) for key in keys])
    # false alarms on empty cells add their full energy
    spurious = sum(abs(value) ** 2 for key, value in found.items() if key not in cells)
    return float((np.sum(np.abs(estimate - truth) ** 2) + spurious) / np.sum(np.abs(truth) ** 2))
