"""Multipath channel sampling and propagation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .const import (
    AOA_KEEP,
    AOA_POLICIES,
    AOA_RESAMPLE,
    DD_MATRIX_CAP,
    DELAY_PROFILES,
    MAX_AOA_RESAMPLES,
)
from .exceptions import ConfigurationError, DomainError, SizeError
from .models import ChannelRealization, DDFrame, FrameParams, FTFrame, PathSpec, TimeSignal

_LOGGER = logging.getLogger(__name__)


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves toward +inf."""
    return int(math.floor(value + 0.5))


@dataclass(frozen=True)
class DelayProfile:
    """Tap delays (ns) and mean powers (dB) of a power-delay profile."""

    name: str
    delays_ns: tuple[float, ...]
    powers_db: tuple[float, ...]

    def __post_init__(self) -> None:
        """Reject empty or ragged profiles."""
        if not self.delays_ns:
            raise ConfigurationError("delay profile is empty", "profile")
        if len(self.delays_ns) != len(self.powers_db):
            raise ConfigurationError(
                f"{len(self.delays_ns)} delays but {len(self.powers_db)} powers", "profile_powers_db"
            )
        if any(delay < 0 for delay in self.delays_ns):
            raise ConfigurationError("delays must be non-negative", "profile_delays_ns")

    @classmethod
    def preset(cls, name: str) -> DelayProfile:
        """Return a built-in profile."""
        try:
            delays, powers = DELAY_PROFILES[name]
        except KeyError as err:
            raise ConfigurationError(f"unknown profile {name}", "profile") from err
        return cls(name, delays, powers)

    @property
    def taps(self) -> int:
        return len(self.delays_ns)

    @property
    def delays(self) -> np.ndarray:
        """Tap delays in seconds."""
        return np.asarray(self.delays_ns) * 1e-9

    @property
    def max_delay(self) -> float:
        return float(np.max(self.delays))


def support(
    profile: DelayProfile, velocity_kmh: float, params: FrameParams
) -> tuple[int, int]:
    """Default (l_max, k_max) for a profile and speed."""
    return (
        params.delay_support(profile.max_delay),
        params.doppler_support(params.max_doppler(velocity_kmh)),
    )


def _draw_angles(
    rng: np.random.Generator,
    count: int,
    policy: str,
    min_separation: float,
    max_resamples: int,
) -> np.ndarray:
    """Draw AoAs on [0, 2pi) honouring the degeneracy policy."""
    if policy not in AOA_POLICIES:
        raise ConfigurationError(f"unknown AoA policy {policy}", "aoa_policy")
    for attempt in range(max_resamples + 1):
        angles = rng.uniform(0.0, 2.0 * math.pi, count)
        u = np.sort(np.cos(angles))
        if count < 2 or np.min(np.diff(u)) >= min_separation:
            return angles
        if policy == AOA_KEEP:
            _LOGGER.debug("Keeping AoAs with separation %.3g < %.3g", np.min(np.diff(u)), min_separation)
            return angles
        _LOGGER.debug("AoA resample %d: separation %.3g < %.3g", attempt + 1, np.min(np.diff(u)), min_separation)
    raise ConfigurationError(
        f"no AoA draw with separation >= {min_separation:.3g} after {max_resamples} resamples",
        "aoa_min_separation",
    )


def sample_channel(
    profile: DelayProfile,
    velocity_kmh: float,
    params: FrameParams,
    rng: np.random.Generator,
    paths_per_tap: Sequence[int] | None = None,
    *,
    aoa_policy: str = AOA_RESAMPLE,
    min_separation: float | None = None,
    max_resamples: int = MAX_AOA_RESAMPLES,
    l_max: int | None = None,
    k_max: int | None = None,
) -> ChannelRealization:
    """Draw one channel realization from a delay/power profile.

    Gains are circular Gaussian with the profile's mean powers, split evenly
    over the paths of a tap and normalized to unit total mean power. AoAs are
    uniform on [0, 2pi) and set each path's Doppler to f_d cos(theta).
    """
    taps = profile.taps
    per_tap = tuple(paths_per_tap) if paths_per_tap is not None else (1,) * taps
    if len(per_tap) != taps or any(q < 1 for q in per_tap):
        raise ConfigurationError(f"paths per tap {per_tap} do not fit {taps} taps", "paths_per_tap")

    tap_of_path = np.repeat(np.arange(taps), per_tap)
    mean_powers = 10 ** (np.asarray(profile.powers_db) / 10) / np.asarray(per_tap)
    mean_powers = mean_powers[tap_of_path]
    mean_powers = mean_powers / mean_powers.sum()

    count = tap_of_path.size
    gains = np.sqrt(mean_powers / 2) * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    separation = params.mainlobe_width if min_separation is None else min_separation
    angles = _draw_angles(rng, count, aoa_policy, separation, max_resamples)

    f_d = params.max_doppler(velocity_kmh)
    default_l_max, default_k_max = support(profile, velocity_kmh, params)
    l_max = default_l_max if l_max is None else l_max
    k_max = default_k_max if k_max is None else k_max

    delays = profile.delays[tap_of_path]
    paths = []
    for index in range(count):
        doppler = f_d * math.cos(angles[index])
        path = PathSpec(
            tap=int(tap_of_path[index]),
            delay=float(delays[index]),
            doppler=doppler,
            aoa=float(angles[index]),
            gain=complex(gains[index]),
            l=round_half_up(params.M * params.delta_f * delays[index]),
            k=round_half_up(params.N * params.T * doppler),
            mean_power=float(mean_powers[index]),
        )
        if path.l > l_max or abs(path.k) > k_max:
            raise ConfigurationError(
                f"path ({path.l}, {path.k}) outside support l_max={l_max}, k_max={k_max}", "l_max"
            )
        paths.append(path)

    channel = ChannelRealization(tuple(paths), taps, per_tap, f_d, l_max, k_max)
    _LOGGER.debug(
        "Sampled %d paths, f_d=%.1f Hz, delay indices %s, Doppler indices %s",
        channel.B,
        f_d,
        channel.delay_indices.tolist(),
        channel.doppler_indices.tolist(),
    )
    return channel


def channel_from_paths(
    params: FrameParams,
    paths: Iterable[tuple[int, float, complex]],
    f_d: float,
    *,
    k_max: int | None = None,
) -> ChannelRealization:
    """Build a realization from (delay index, cos AoA, gain) triples, one tap per path."""
    specs = []
    for tap, (l, u, beta) in enumerate(paths):
        if abs(u) > 1:
            raise DomainError(f"cos AoA {u} outside [-1, 1]")
        doppler = f_d * u
        specs.append(
            PathSpec(
                tap=tap,
                delay=l / params.sample_rate,
                doppler=doppler,
                aoa=math.acos(u),
                gain=complex(beta),
                l=int(l),
                k=round_half_up(params.N * params.T * doppler),
            )
        )
    if not specs:
        raise ConfigurationError("a channel needs at least one path", "profile")
    l_max = max(spec.l for spec in specs)
    k_max = params.doppler_support(f_d) if k_max is None else k_max
    return ChannelRealization(tuple(specs), len(specs), (1,) * len(specs), f_d, l_max, k_max)


def antenna_phases(params: FrameParams) -> np.ndarray:
    """Per-antenna phase factors phi_i = 2 pi i eta / lambda."""
    return 2.0 * math.pi * np.arange(params.E) * params.eta / params.wavelength


def _array_response(ch: ChannelRealization, params: FrameParams, antenna: int | None) -> np.ndarray:
    """Return e^{j phi_i u_p} with shape (antennas, paths)."""
    phases = antenna_phases(params)
    if antenna is not None:
        if not 0 <= antenna < params.E:
            raise SizeError(f"antenna {antenna} outside array of {params.E}")
        phases = phases[antenna:antenna + 1]
    return np.exp(1j * np.outer(phases, ch.cos_angles))


def _dd_output(
    ch: ChannelRealization,
    params: FrameParams,
    antenna: int | None,
    path_terms: np.ndarray,
) -> DDFrame:
    weights = _array_response(ch, params, antenna) * ch.gains[None, :]
    y = np.einsum("ip,plk->ilk", weights, path_terms)
    return DDFrame(y[0] if antenna is not None else y)


def propagate_ideal(
    x: DDFrame, ch: ChannelRealization, params: FrameParams, antenna: int | None = None
) -> DDFrame:
    """Noiseless delay-Doppler output with bi-orthogonal pulses.

    Returns the grid of one antenna, or the (E, M, N) stack when antenna is None.
    """
    x.check(params)
    if x.antennas is not None:
        raise SizeError("transmit frame must be a single grid")
    terms = np.stack(
        [
            np.exp(-2j * math.pi * path.l * path.k / params.size)
            * np.roll(x.grid, (path.l, path.k), axis=(0, 1))
            for path in ch.paths
        ]
    )
    return _dd_output(ch, params, antenna, terms)


def rectangular_dd_response(
    x: DDFrame, ch: ChannelRealization, params: FrameParams, antenna: int | None = None
) -> DDFrame:
    """Exact DD output of the sampled chain with rectangular pulses and one frame CP.

    Valid for integer Doppler; rows l < l_p wrap into the previous time slot and
    pick up e^{-j 2 pi [k - k_p]_N / N}. The Doppler ramp starts at the first
    prefix sample, so the signal must carry a prefix of params.cp_len.
    """
    x.check(params)
    if x.antennas is not None:
        raise SizeError("transmit frame must be a single grid")
    rows = np.arange(params.M)[:, None]
    cols = np.arange(params.N)[None, :]
    terms = []
    for path in ch.paths:
        shifted = np.roll(x.grid, (path.l, path.k), axis=(0, 1))
        ramp = np.exp(2j * math.pi * path.k * (rows + params.cp_len) / params.size)
        wrap = np.where(
            rows < path.l,
            np.exp(-2j * math.pi * np.mod(cols - path.k, params.N) / params.N),
            1.0,
        )
        terms.append(ramp * wrap * shifted)
    return _dd_output(ch, params, antenna, np.stack(terms))


def propagate_time(s: TimeSignal, ch: ChannelRealization, params: FrameParams) -> TimeSignal:
    """Noiseless CP-stripped received bodies of all E antennas.

    Time t = 0 is the first prefix sample, so body sample n sits at t = cp_len + n.
    A path of delay l reads the transmit signal l samples earlier, reaching into
    the prefix. Doppler uses the continuous shift of each path.
    """
    if s.antennas is not None:
        raise SizeError("transmit signal must be a single sequence")
    if s.body_length != params.size:
        raise SizeError(f"body of {s.body_length} samples, expected {params.size}")
    deepest = max(path.l for path in ch.paths)
    if s.cp_len < deepest:
        raise ConfigurationError(f"prefix of {s.cp_len} samples is shorter than delay {deepest}", "cp_len")

    t = s.cp_len + np.arange(params.size)
    terms = np.stack(
        [
            np.exp(2j * math.pi * path.doppler * t / params.sample_rate)
            * s.samples[s.cp_len - path.l:s.cp_len - path.l + params.size]
            for path in ch.paths
        ]
    )
    weights = _array_response(ch, params, None) * ch.gains[None, :]
    return TimeSignal(weights @ terms)


def add_noise(signal, sigma2: float, rng: np.random.Generator):
    """Add circular complex Gaussian noise of variance sigma2 per sample."""
    if sigma2 < 0:
        raise DomainError(f"noise variance {sigma2} is negative")
    if sigma2 == 0:
        return signal
    values = signal.samples if isinstance(signal, TimeSignal) else signal.grid
    noise = math.sqrt(sigma2 / 2) * (
        rng.standard_normal(values.shape) + 1j * rng.standard_normal(values.shape)
    )
    if isinstance(signal, TimeSignal):
        return TimeSignal(values + noise, signal.cp_len)
    if isinstance(signal, (DDFrame, FTFrame)):
        return type(signal)(values + noise)
    raise DomainError(f"cannot add noise to {type(signal).__name__}")


def build_dd_channel_matrix(
    ch: ChannelRealization, params: FrameParams, cap: int = DD_MATRIX_CAP
) -> np.ndarray:
    """Dense MN x MN matrix with vec(y) = H vec(x) for antenna 0; vec has l fastest."""
    if params.size > cap:
        raise SizeError(f"MN={params.size} exceeds the channel matrix cap {cap}")
    ls, ks = np.meshgrid(np.arange(params.M), np.arange(params.N), indexing="ij")
    rows = (ls + params.M * ks).reshape(-1)
    H = np.zeros((params.size, params.size), dtype=np.complex128)
    for path in ch.paths:
        cols = (np.mod(ls - path.l, params.M) + params.M * np.mod(ks - path.k, params.N)).reshape(-1)
        coefficient = path.gain * np.exp(-2j * math.pi * path.l * path.k / params.size)
        np.add.at(H, (rows, cols), coefficient)
    return H
