"""Shift compensation, maximal-ratio combining and the matrix equalizer oracle."""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
import scipy.linalg

from .const import EQUALIZER_MMSE, EQUALIZER_ZF
from .exceptions import DegenerateCombineError, DomainError, RankError, SizeError
from .models import BranchEstimate, DDFrame, FrameParams

_LOGGER = logging.getLogger(__name__)


def compensate(branch: DDFrame, l_hat: int, k_hat: int) -> DDFrame:
    """Undo the branch's delay-Doppler shift: y_hat[l, k] = y[l + l_hat, k + k_hat]."""
    if l_hat == 0 and k_hat == 0:
        return branch
    return DDFrame(np.roll(branch.grid, (-l_hat, -k_hat), axis=(-2, -1)))


def mrc_combine(
    branches: Sequence[DDFrame], estimates: Sequence[BranchEstimate], params: FrameParams
) -> DDFrame:
    """Gain-weighted coherent sum of compensated branches."""
    if not branches:
        raise SizeError("at least one branch is required")
    if len(branches) != len(estimates):
        raise SizeError(f"{len(branches)} branches but {len(estimates)} estimates")
    gains = np.array([est.beta_hat for est in estimates], dtype=np.complex128)
    total = float(np.sum(np.abs(gains) ** 2))
    if total <= 0:
        raise DegenerateCombineError("all branch gain estimates are zero")

    phases = np.array(
        [np.exp(2j * math.pi * est.l_hat * est.k_hat / params.size) for est in estimates]
    )
    stacked = np.stack([branch.grid for branch in branches])
    combined = np.tensordot(np.conj(gains) * phases, stacked, axes=(0, 0)) / total
    return DDFrame(combined)


def matrix_equalize(y: DDFrame, H: np.ndarray, sigma2: float, mode: str) -> DDFrame:
    """Linear ZF or MMSE equalization against the full delay-Doppler channel matrix."""
    vector = y.vectorize()
    size = vector.size
    if H.shape != (size, size):
        raise SizeError(f"channel matrix {H.shape} does not match frame of {size} cells")
    M, N = y.shape

    if mode == EQUALIZER_ZF:
        rank = np.linalg.matrix_rank(H)
        if rank < size:
            raise RankError(f"channel matrix rank {rank} < {size}")
        x_hat = scipy.linalg.lstsq(H, vector)[0]
    elif mode == EQUALIZER_MMSE:
        if sigma2 < 0:
            raise DomainError(f"noise variance {sigma2} is negative")
        gram = H.conj().T @ H + sigma2 * np.eye(size)
        try:
            x_hat = scipy.linalg.solve(gram, H.conj().T @ vector, assume_a="her")
        except scipy.linalg.LinAlgError as err:
            raise RankError(f"MMSE system is singular: {err}") from err
    else:
        raise DomainError(f"unknown equalizer mode {mode}")

    _LOGGER.debug("%s equalization of %dx%d frame", mode, M, N)
    return DDFrame(x_hat.reshape((M, N), order="F"))
