"""Domain transforms of the OTFS chain.

All four transforms are unitary. ISFFT maps the delay-Doppler grid x[l, k]
to the frequency-time grid s[m, n]; Heisenberg realizes s[m, n] as a sampled
time signal with rectangular pulses, one OFDM-like symbol of M samples per
time slot n, and a single cyclic prefix for the whole frame. SFFT and Wigner
are the matching inverses.
"""
from __future__ import annotations

import numpy as np
from scipy.fft import fft, ifft

from .exceptions import SizeError
from .models import DDFrame, FrameParams, FTFrame, TimeSignal


def isfft(x: DDFrame) -> FTFrame:
    """Inverse symplectic finite Fourier transform (DD to FT)."""
    return FTFrame(fft(ifft(x.grid, axis=-1, norm="ortho"), axis=-2, norm="ortho"))


def sfft(y_ft: FTFrame) -> DDFrame:
    """Symplectic finite Fourier transform (FT to DD)."""
    return DDFrame(ifft(fft(y_ft.grid, axis=-1, norm="ortho"), axis=-2, norm="ortho"))


def heisenberg(s_ft: FTFrame, params: FrameParams) -> TimeSignal:
    """Multicarrier modulation with rectangular pulses; body index n*M + i."""
    s_ft.check(params)
    body = ifft(s_ft.grid, axis=-2, norm="ortho")
    body = np.swapaxes(body, -1, -2).reshape(*body.shape[:-2], params.size)
    return add_cp(TimeSignal(body), params.cp_len)


def wigner(r: TimeSignal, params: FrameParams) -> FTFrame:
    """Matched filter to the rectangular pulse on a CP-stripped body."""
    if r.cp_len != 0 or r.samples.shape[-1] != params.size:
        raise SizeError(
            f"expected a CP-free body of {params.size} samples, "
            f"got {r.samples.shape[-1]} with prefix {r.cp_len}"
        )
    body = r.samples.reshape(*r.samples.shape[:-1], params.N, params.M)
    return FTFrame(fft(np.swapaxes(body, -1, -2), axis=-2, norm="ortho"))


def add_cp(body: TimeSignal, cp_len: int) -> TimeSignal:
    """Prepend the last cp_len body samples."""
    if body.cp_len != 0:
        raise SizeError("signal already carries a cyclic prefix")
    length = body.samples.shape[-1]
    if cp_len < 0 or cp_len > length:
        raise SizeError(f"prefix of {cp_len} samples exceeds body of {length}")
    if cp_len == 0:
        return body
    prefix = body.samples[..., length - cp_len:]
    return TimeSignal(np.concatenate((prefix, body.samples), axis=-1), cp_len)


def remove_cp(sig: TimeSignal) -> TimeSignal:
    """Drop the cyclic prefix."""
    return TimeSignal(sig.samples[..., sig.cp_len:], 0)


def to_delay_doppler(r: TimeSignal, params: FrameParams) -> DDFrame:
    """Receive chain from a sampled signal (with or without prefix) to the DD grid."""
    return sfft(wigner(remove_cp(r), params))
