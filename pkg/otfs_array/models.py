"""Data models for the OTFS array simulator."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .const import (
    BOUNDED_METRICS,
    DEFAULT_MERGE_WIDTH_FACTOR,
    DEFAULT_THRESHOLD_RATIO,
    ROLE_DATA,
    ROLE_GUARD,
    ROLE_PILOT,
    SPEED_OF_LIGHT,
)
from .exceptions import ConfigurationError, DomainError, SizeError


def _frozen_complex(values, name: str) -> np.ndarray:
    """Return a read-only complex copy of values, rejecting non-finite entries."""
    array = np.array(values, dtype=np.complex128)
    if not np.all(np.isfinite(array)):
        raise DomainError(f"{name} holds non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class FrameParams:
    """Static dimensions and physical constants of one OTFS configuration."""

    M: int
    N: int
    delta_f: float
    f_c: float
    E: int
    eta: float
    cp_len: int = 0

    def __post_init__(self) -> None:
        """Validate the frame geometry."""
        if self.M < 1 or self.N < 1:
            raise ConfigurationError(f"grid must be at least 1x1, got {self.M}x{self.N}", "M")
        if self.delta_f <= 0:
            raise ConfigurationError("subcarrier spacing must be positive", "delta_f")
        if self.f_c <= 0:
            raise ConfigurationError("carrier frequency must be positive", "f_c")
        if self.E < 1:
            raise ConfigurationError("at least one antenna is required", "antennas")
        if self.eta <= 0:
            raise ConfigurationError("antenna spacing must be positive", "antenna_spacing")
        if self.cp_len < 0:
            raise ConfigurationError("cyclic prefix length must be non-negative", "cp_len")

    @classmethod
    def from_spacing_ratio(
        cls,
        M: int,
        N: int,
        delta_f: float,
        f_c: float,
        E: int,
        spacing_ratio: float,
        cp_len: int = 0,
    ) -> FrameParams:
        """Build params with the antenna spacing given in wavelengths."""
        return cls(M, N, delta_f, f_c, E, spacing_ratio * SPEED_OF_LIGHT / f_c, cp_len)

    @property
    def T(self) -> float:
        """Symbol duration; T * delta_f == 1."""
        return 1.0 / self.delta_f

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def sample_rate(self) -> float:
        return self.M * self.delta_f

    @property
    def size(self) -> int:
        """Number of delay-Doppler cells MN."""
        return self.M * self.N

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.M, self.N)

    @property
    def mainlobe_width(self) -> float:
        """Null-to-null beam width 2λ/(Eη) in u = cos(angle)."""
        return 2.0 * self.wavelength / (self.E * self.eta)

    def with_cp(self, cp_len: int) -> FrameParams:
        """Return a copy with a different cyclic prefix."""
        return replace(self, cp_len=cp_len)

    def max_doppler(self, velocity_kmh: float) -> float:
        """Maximum Doppler shift f_d in Hz for a speed in km/h."""
        return velocity_kmh / 3.6 / self.wavelength

    def doppler_support(self, f_d: float) -> int:
        """Doppler support k_max = ceil(N T f_d)."""
        return max(0, math.ceil(round(self.N * self.T * f_d, 9)))

    def delay_support(self, max_delay: float) -> int:
        """Delay support l_max = ceil(M delta_f tau_max)."""
        return max(0, math.ceil(round(self.M * self.delta_f * max_delay, 9)))


class _Grid:
    """Shared behaviour of the M x N grid containers."""

    grid: np.ndarray

    def __post_init__(self) -> None:
        """Freeze the grid as a finite complex array."""
        grid = _frozen_complex(self.grid, type(self).__name__)
        if grid.ndim not in (2, 3):
            raise SizeError(f"expected an MxN grid or a stack of them, got shape {grid.shape}")
        object.__setattr__(self, "grid", grid)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape[-2:]

    @property
    def antennas(self) -> int | None:
        """Stack depth, or None for a single grid."""
        return self.grid.shape[0] if self.grid.ndim == 3 else None

    def energy(self) -> float:
        return float(np.sum(np.abs(self.grid) ** 2))

    def check(self, params: FrameParams) -> None:
        """Raise SizeError unless the grid matches the frame dimensions."""
        if self.shape != params.shape:
            raise SizeError(f"grid shape {self.shape} does not match {params.shape}")

    def antenna(self, index: int):
        """Return the grid of one antenna of a stack."""
        if self.grid.ndim != 3:
            raise SizeError("not an antenna stack")
        return type(self)(self.grid[index])


@dataclass(frozen=True, eq=False)
class DDFrame(_Grid):
    """Delay-Doppler grid x[l, k]; a leading axis stacks antennas."""

    grid: np.ndarray

    def vectorize(self) -> np.ndarray:
        """Stack the grid into a vector with l fastest (index l + M k)."""
        if self.grid.ndim != 2:
            raise SizeError("only a single grid can be vectorized")
        return self.grid.reshape(-1, order="F")

    @classmethod
    def from_vector(cls, vector: np.ndarray, params: FrameParams) -> DDFrame:
        """Inverse of vectorize."""
        vector = np.asarray(vector)
        if vector.size != params.size:
            raise SizeError(f"vector length {vector.size} does not match MN={params.size}")
        return cls(vector.reshape(params.shape, order="F"))


@dataclass(frozen=True, eq=False)
class FTFrame(_Grid):
    """Frequency-time grid s[m, n]; a leading axis stacks antennas."""

    grid: np.ndarray


@dataclass(frozen=True, eq=False)
class TimeSignal:
    """Sampled time signal, optionally prefixed with a cyclic prefix."""

    samples: np.ndarray
    cp_len: int = 0

    def __post_init__(self) -> None:
        """Freeze the samples and check the prefix fits."""
        samples = _frozen_complex(self.samples, "TimeSignal")
        if samples.ndim not in (1, 2):
            raise SizeError(f"expected a sequence or a stack of them, got shape {samples.shape}")
        if self.cp_len < 0 or self.cp_len > samples.shape[-1]:
            raise SizeError(f"prefix of {self.cp_len} does not fit {samples.shape[-1]} samples")
        object.__setattr__(self, "samples", samples)

    @property
    def body_length(self) -> int:
        return self.samples.shape[-1] - self.cp_len

    @property
    def antennas(self) -> int | None:
        return self.samples.shape[0] if self.samples.ndim == 2 else None

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def antenna(self, index: int) -> TimeSignal:
        if self.samples.ndim != 2:
            raise SizeError("not an antenna stack")
        return TimeSignal(self.samples[index], self.cp_len)


@dataclass(frozen=True)
class PathSpec:
    """One propagation path of a channel realization."""

    tap: int
    delay: float
    doppler: float
    aoa: float
    gain: complex
    l: int
    k: int
    mean_power: float = 0.0

    @property
    def u(self) -> float:
        """Cosine of the angle of arrival."""
        return math.cos(self.aoa)


@dataclass(frozen=True)
class ChannelRealization:
    """Paths drawn for one frame together with the channel support."""

    paths: Tuple[PathSpec, ...]
    taps: int
    paths_per_tap: Tuple[int, ...]
    max_doppler: float
    l_max: int
    k_max: int

    def __post_init__(self) -> None:
        """Check the path count against the per-tap layout."""
        if sum(self.paths_per_tap) != len(self.paths):
            raise ConfigurationError(
                f"{len(self.paths)} paths do not match paths per tap {self.paths_per_tap}",
                "paths_per_tap",
            )

    @property
    def B(self) -> int:
        """Total number of paths."""
        return len(self.paths)

    @property
    def gains(self) -> np.ndarray:
        return np.array([path.gain for path in self.paths], dtype=np.complex128)

    @property
    def cos_angles(self) -> np.ndarray:
        return np.array([path.u for path in self.paths])

    @property
    def delay_indices(self) -> np.ndarray:
        return np.array([path.l for path in self.paths], dtype=int)

    @property
    def doppler_indices(self) -> np.ndarray:
        return np.array([path.k for path in self.paths], dtype=int)

    def min_angle_separation(self) -> float:
        """Smallest pairwise |cos(a) - cos(b)| over all path pairs."""
        u = np.sort(self.cos_angles)
        if u.size < 2:
            return math.inf
        return float(np.min(np.diff(u)))


@dataclass(frozen=True, eq=False)
class PilotPattern:
    """Pilot, guard and data cells of one embedded-pilot frame layout.

    Index sets hold flat cell indices l + M k and are sorted ascending, so the
    data indices enumerate the data cells with l fastest.
    """

    variant: str
    M: int
    N: int
    l0: int
    k0: int
    l_max: int
    k_max: int
    d0: complex
    guard_indices: np.ndarray
    data_indices: np.ndarray

    def __post_init__(self) -> None:
        """Freeze the index sets and check they partition the grid."""
        for name in ("guard_indices", "data_indices"):
            indices = np.array(getattr(self, name), dtype=np.int64)
            indices.setflags(write=False)
            object.__setattr__(self, name, indices)
        covered = np.concatenate(([self.pilot_index], self.guard_indices, self.data_indices))
        if covered.size != self.M * self.N or np.unique(covered).size != covered.size:
            raise ConfigurationError("pilot, guard and data cells must partition the grid", "pattern")

    @property
    def pilot_index(self) -> int:
        return self.l0 + self.M * self.k0

    @property
    def overhead(self) -> int:
        """Number of pilot plus guard cells."""
        return 1 + int(self.guard_indices.size)

    @property
    def data_count(self) -> int:
        return int(self.data_indices.size)

    @property
    def overhead_percent(self) -> float:
        return 100.0 * self.overhead / (self.M * self.N)

    def roles(self) -> np.ndarray:
        """Return an M x N grid of P/G/D role letters."""
        flat = np.full(self.M * self.N, ROLE_DATA, dtype="<U1")
        flat[self.guard_indices] = ROLE_GUARD
        flat[self.pilot_index] = ROLE_PILOT
        return flat.reshape((self.M, self.N), order="F")


@dataclass(frozen=True)
class BranchEstimate:
    """Receiver state of one identified path."""

    u: float
    k_hat: int
    l_hat: int
    beta_hat: complex


@dataclass(frozen=True, eq=False)
class BranchSignal:
    """Beamformed signal for one beam angle."""

    u: float
    frame: DDFrame | TimeSignal
    amplitude_metric: float = math.nan


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Scan grid over u = cos(angle)."""

    u_values: np.ndarray

    def __post_init__(self) -> None:
        """Validate the grid spans [-1, 1] and is strictly increasing."""
        values = np.array(self.u_values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ConfigurationError("angle grid needs at least two points", "grid_size")
        if np.any(np.diff(values) <= 0):
            raise ConfigurationError("angle grid must be strictly increasing", "grid_size")
        if values[0] != -1.0 or values[-1] != 1.0:
            raise ConfigurationError("angle grid must span [-1, 1]", "grid_size")
        values.setflags(write=False)
        object.__setattr__(self, "u_values", values)

    @classmethod
    def uniform(cls, count: int) -> AngleGrid:
        return cls(np.linspace(-1.0, 1.0, count))

    @property
    def count(self) -> int:
        return int(self.u_values.size)

    @property
    def step(self) -> float:
        return 2.0 / (self.count - 1)


@dataclass(frozen=True)
class ScanPolicy:
    """Threshold parameters of the angle scan."""

    threshold_ratio: float = DEFAULT_THRESHOLD_RATIO
    merge_width_factor: float = DEFAULT_MERGE_WIDTH_FACTOR
    grid_size: int | None = None

    def grid(self, params: FrameParams) -> AngleGrid:
        """Return the scan grid, 4E points unless a size is set."""
        return AngleGrid.uniform(self.grid_size or 4 * params.E)


@dataclass(frozen=True)
class ResultRecord:
    """One metric value at one sweep point."""

    experiment: str
    metric: str
    value: float
    trials: int
    seed: int
    snr_db: float | None = None
    snr_p_db: float | None = None
    velocity_kmh: float | None = None
    antennas: int | None = None
    pattern: str | None = None
    ci_half_width: float | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        """Check the value is a finite non-negative number."""
        if not math.isfinite(self.value) or self.value < 0:
            raise DomainError(f"{self.metric} value {self.value} must be finite and >= 0")
        if self.metric in BOUNDED_METRICS and self.value > 1:
            raise DomainError(f"{self.metric} value {self.value} exceeds 1")


@dataclass
class TrialOutcome:
    """Counters accumulated by one Monte-Carlo trial."""

    bit_errors: int = 0
    bits: int = 0
    symbol_errors: int = 0
    symbols: int = 0
    mse: float = 0.0
    benchmark_mse: float = 0.0
    branches: int = 0
    empty_scans: int = 0
    index_misses: int = 0
