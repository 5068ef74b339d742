"""Frame assembly on the delay-Doppler grid."""
from __future__ import annotations

import numpy as np

from .exceptions import SizeError
from .models import DDFrame, FrameParams, PilotPattern


def assemble_frame(data: np.ndarray, pattern: PilotPattern, params: FrameParams) -> DDFrame:
    """Place the pilot, zero guards and data symbols (l fastest) on the grid."""
    data = np.asarray(data, dtype=np.complex128).reshape(-1)
    if (pattern.M, pattern.N) != params.shape:
        raise SizeError(f"pattern is {pattern.M}x{pattern.N}, frame is {params.M}x{params.N}")
    if data.size != pattern.data_count:
        raise SizeError(f"{data.size} data symbols for {pattern.data_count} data cells")

    flat = np.zeros(params.size, dtype=np.complex128)
    flat[pattern.data_indices] = data
    flat[pattern.pilot_index] = pattern.d0
    return DDFrame(flat.reshape(params.shape, order="F"))


def extract_data(frame: DDFrame, pattern: PilotPattern) -> np.ndarray:
    """Read the data cells back in assembly order.

    Works on a single grid or an antenna stack; the cell axis is last.
    """
    if frame.shape != (pattern.M, pattern.N):
        raise SizeError(f"frame is {frame.shape}, pattern is {pattern.M}x{pattern.N}")
    l_idx = pattern.data_indices % pattern.M
    k_idx = pattern.data_indices // pattern.M
    return frame.grid[..., l_idx, k_idx]
