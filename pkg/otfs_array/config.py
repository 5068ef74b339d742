"""Experiment configuration for the OTFS array simulator."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Tuple

import voluptuous as vol

from .channel import DelayProfile, support
from .const import (
    ANGLE_MODES,
    ANGLES_GENIE,
    AOA_POLICIES,
    AOA_RESAMPLE,
    CONF_ANGLES,
    CONF_ANTENNAS,
    CONF_AOA_MIN_SEPARATION,
    CONF_AOA_POLICY,
    CONF_ARRAYGAIN_DU,
    CONF_CARRIER,
    CONF_CP_LEN,
    CONF_CSI,
    CONF_DELTA_F,
    CONF_GRID_SIZE,
    CONF_K_MAX,
    CONF_L_MAX,
    CONF_M,
    CONF_MERGE_WIDTH_FACTOR,
    CONF_MODE,
    CONF_MODULATION,
    CONF_MSE_DATA_SNR,
    CONF_MSE_SNR_P,
    CONF_N,
    CONF_ORACLE_CHECKS,
    CONF_PATHS_PER_TAP,
    CONF_PATTERN,
    CONF_PILOT_K0,
    CONF_PILOT_L0,
    CONF_PROFILE,
    CONF_PROFILE_DELAYS,
    CONF_PROFILE_POWERS,
    CONF_SCALING_BRANCHES,
    CONF_SCALING_N,
    CONF_SCALING_REPEATS,
    CONF_SEED,
    CONF_SNR,
    CONF_SNR_P,
    CONF_SNR_REFERENCE,
    CONF_SPACING,
    CONF_THRESHOLD_RATIO,
    CONF_TRIALS,
    CONF_VELOCITIES,
    CONF_WORKERS,
    CSI_ESTIMATED,
    CSI_MODES,
    DEFAULT_ANTENNAS,
    DEFAULT_ARRAYGAIN_DU,
    DEFAULT_CARRIER,
    DEFAULT_DELTA_F,
    DEFAULT_M,
    DEFAULT_MERGE_WIDTH_FACTOR,
    DEFAULT_MODULATION,
    DEFAULT_MSE_DATA_SNR,
    DEFAULT_MSE_SNR_P,
    DEFAULT_N,
    DEFAULT_PATTERN,
    DEFAULT_PROFILE,
    DEFAULT_SCALING_BRANCHES,
    DEFAULT_SCALING_N,
    DEFAULT_SCALING_REPEATS,
    DEFAULT_SEED,
    DEFAULT_SNR,
    DEFAULT_SNR_P,
    DEFAULT_SPACING,
    DEFAULT_THRESHOLD_RATIO,
    DEFAULT_TRIALS,
    DEFAULT_VELOCITIES,
    DEFAULT_WORKERS,
    DELAY_PROFILES,
    FULL_ANTENNAS,
    FULL_M,
    FULL_N,
    MODE_IDEAL,
    MODES,
    MODULATION_ORDERS,
    PATTERNS,
    PROFILE_CUSTOM,
    SNR_REF_BRANCH,
    SNR_REF_ANTENNA,
    SNR_REFERENCES,
)
from .exceptions import ConfigurationError
from .models import FrameParams, ScanPolicy

_LOGGER = logging.getLogger(__name__)

_MAX_SEED = 2**64 - 1


def _listof(item: Callable[[Any], Any]) -> Callable[[Any], list]:
    """Validator for a non-empty comma-separated list."""

    def validate(value: Any) -> list:
        if isinstance(value, (list, tuple)):
            parts = list(value)
        else:
            parts = [part.strip() for part in str(value).split(",") if part.strip()]
        if not parts:
            raise vol.Invalid("expected a non-empty list")
        return [item(part) for part in parts]

    return validate


_POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))
_NON_NEGATIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=0))
_POSITIVE_FLOAT = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_M, default=DEFAULT_M): _POSITIVE_INT,
        vol.Optional(CONF_N, default=DEFAULT_N): _POSITIVE_INT,
        vol.Optional(CONF_DELTA_F, default=DEFAULT_DELTA_F): _POSITIVE_FLOAT,
        vol.Optional(CONF_CARRIER, default=DEFAULT_CARRIER): _POSITIVE_FLOAT,
        vol.Optional(CONF_ANTENNAS, default=list(DEFAULT_ANTENNAS)): _listof(_POSITIVE_INT),
        vol.Optional(CONF_SPACING, default=DEFAULT_SPACING): _POSITIVE_FLOAT,
        vol.Optional(CONF_CP_LEN): _NON_NEGATIVE_INT,
        vol.Optional(CONF_PROFILE, default=DEFAULT_PROFILE): vol.In([*DELAY_PROFILES, PROFILE_CUSTOM]),
        vol.Optional(CONF_PROFILE_DELAYS): _listof(vol.All(vol.Coerce(float), vol.Range(min=0))),
        vol.Optional(CONF_PROFILE_POWERS): _listof(vol.Coerce(float)),
        vol.Optional(CONF_PATHS_PER_TAP): _listof(_POSITIVE_INT),
        vol.Optional(CONF_VELOCITIES, default=list(DEFAULT_VELOCITIES)): _listof(
            vol.All(vol.Coerce(float), vol.Range(min=0))
        ),
        vol.Optional(CONF_SNR, default=list(DEFAULT_SNR)): _listof(vol.Coerce(float)),
        vol.Optional(CONF_SNR_P, default=DEFAULT_SNR_P): vol.Coerce(float),
        vol.Optional(CONF_MSE_SNR_P, default=list(DEFAULT_MSE_SNR_P)): _listof(vol.Coerce(float)),
        vol.Optional(CONF_MSE_DATA_SNR, default=DEFAULT_MSE_DATA_SNR): vol.Coerce(float),
        vol.Optional(CONF_SNR_REFERENCE, default=SNR_REF_BRANCH): vol.In(SNR_REFERENCES),
        vol.Optional(CONF_PATTERN, default=DEFAULT_PATTERN): vol.In(PATTERNS),
        vol.Optional(CONF_MODULATION, default=DEFAULT_MODULATION): vol.All(
            vol.Coerce(int), vol.In(MODULATION_ORDERS)
        ),
        vol.Optional(CONF_TRIALS, default=DEFAULT_TRIALS): _POSITIVE_INT,
        vol.Optional(CONF_SEED, default=DEFAULT_SEED): vol.All(
            vol.Coerce(int), vol.Range(min=0, max=_MAX_SEED)
        ),
        vol.Optional(CONF_MODE, default=MODE_IDEAL): vol.In(MODES),
        vol.Optional(CONF_ANGLES, default=ANGLES_GENIE): vol.In(ANGLE_MODES),
        vol.Optional(CONF_CSI, default=CSI_ESTIMATED): vol.In(CSI_MODES),
        vol.Optional(CONF_L_MAX): _NON_NEGATIVE_INT,
        vol.Optional(CONF_K_MAX): _NON_NEGATIVE_INT,
        vol.Optional(CONF_PILOT_L0): _NON_NEGATIVE_INT,
        vol.Optional(CONF_PILOT_K0): _NON_NEGATIVE_INT,
        vol.Optional(CONF_AOA_POLICY, default=AOA_RESAMPLE): vol.In(AOA_POLICIES),
        vol.Optional(CONF_AOA_MIN_SEPARATION): vol.All(vol.Coerce(float), vol.Range(min=0)),
        vol.Optional(CONF_GRID_SIZE): vol.All(vol.Coerce(int), vol.Range(min=2)),
        vol.Optional(CONF_THRESHOLD_RATIO, default=DEFAULT_THRESHOLD_RATIO): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1)
        ),
        vol.Optional(CONF_MERGE_WIDTH_FACTOR, default=DEFAULT_MERGE_WIDTH_FACTOR): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_ORACLE_CHECKS, default=True): vol.Boolean(),
        vol.Optional(CONF_WORKERS, default=DEFAULT_WORKERS): _POSITIVE_INT,
        vol.Optional(CONF_ARRAYGAIN_DU, default=list(DEFAULT_ARRAYGAIN_DU)): _listof(
            vol.All(vol.Coerce(float), vol.Range(min=0, max=2))
        ),
        vol.Optional(CONF_SCALING_N, default=list(DEFAULT_SCALING_N)): _listof(_POSITIVE_INT),
        vol.Optional(CONF_SCALING_BRANCHES, default=list(DEFAULT_SCALING_BRANCHES)): _listof(
            _POSITIVE_INT
        ),
        vol.Optional(CONF_SCALING_REPEATS, default=DEFAULT_SCALING_REPEATS): _POSITIVE_INT,
    }
)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat `key = value` lines; `#` starts a comment."""
    data: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {number}: expected `key = value`, got {raw.strip()!r}")
        if key in data:
            raise ConfigurationError(f"line {number}: duplicate key", key)
        data[key] = value.strip()
    return data


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated settings of one simulator run."""

    M: int
    N: int
    delta_f: float
    f_c: float
    antennas: Tuple[int, ...]
    antenna_spacing: float
    profile: DelayProfile
    paths_per_tap: Tuple[int, ...] | None
    velocities_kmh: Tuple[float, ...]
    snr_db: Tuple[float, ...]
    snr_p_db: float
    mse_snr_p_db: Tuple[float, ...]
    mse_data_snr_db: float
    snr_reference: str
    pattern: str
    modulation: int
    trials: int
    seed: int
    mode: str
    angles: str
    csi: str
    aoa_policy: str
    threshold_ratio: float
    merge_width_factor: float
    oracle_checks: bool
    workers: int
    arraygain_du: Tuple[float, ...]
    scaling_n: Tuple[int, ...]
    scaling_branches: Tuple[int, ...]
    scaling_repeats: int
    cp_len: int | None = None
    l_max: int | None = None
    k_max: int | None = None
    pilot_l0: int | None = None
    pilot_k0: int | None = None
    aoa_min_separation: float | None = None
    grid_size: int | None = None

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        """Validate a raw mapping and build the config."""
        try:
            valid = CONFIG_SCHEMA(dict(data))
        except vol.MultipleInvalid as err:
            first = err.errors[0]
            key = str(first.path[0]) if first.path else None
            raise ConfigurationError(first.error_message, key) from err

        profile_name = valid[CONF_PROFILE]
        if profile_name == PROFILE_CUSTOM:
            if CONF_PROFILE_DELAYS not in valid or CONF_PROFILE_POWERS not in valid:
                raise ConfigurationError(
                    f"custom profile needs {CONF_PROFILE_DELAYS} and {CONF_PROFILE_POWERS}", CONF_PROFILE
                )
            profile = DelayProfile(
                PROFILE_CUSTOM,
                tuple(valid[CONF_PROFILE_DELAYS]),
                tuple(valid[CONF_PROFILE_POWERS]),
            )
        else:
            profile = DelayProfile.preset(profile_name)

        paths_per_tap = valid.get(CONF_PATHS_PER_TAP)
        if paths_per_tap is not None and len(paths_per_tap) != profile.taps:
            raise ConfigurationError(
                f"{len(paths_per_tap)} entries for {profile.taps} taps", CONF_PATHS_PER_TAP
            )

        return cls(
            M=valid[CONF_M],
            N=valid[CONF_N],
            delta_f=valid[CONF_DELTA_F],
            f_c=valid[CONF_CARRIER],
            antennas=tuple(valid[CONF_ANTENNAS]),
            antenna_spacing=valid[CONF_SPACING],
            profile=profile,
            paths_per_tap=tuple(paths_per_tap) if paths_per_tap else None,
            velocities_kmh=tuple(valid[CONF_VELOCITIES]),
            snr_db=tuple(valid[CONF_SNR]),
            snr_p_db=valid[CONF_SNR_P],
            mse_snr_p_db=tuple(valid[CONF_MSE_SNR_P]),
            mse_data_snr_db=valid[CONF_MSE_DATA_SNR],
            snr_reference=valid[CONF_SNR_REFERENCE],
            pattern=valid[CONF_PATTERN],
            modulation=valid[CONF_MODULATION],
            trials=valid[CONF_TRIALS],
            seed=valid[CONF_SEED],
            mode=valid[CONF_MODE],
            angles=valid[CONF_ANGLES],
            csi=valid[CONF_CSI],
            aoa_policy=valid[CONF_AOA_POLICY],
            threshold_ratio=valid[CONF_THRESHOLD_RATIO],
            merge_width_factor=valid[CONF_MERGE_WIDTH_FACTOR],
            oracle_checks=valid[CONF_ORACLE_CHECKS],
            workers=valid[CONF_WORKERS],
            arraygain_du=tuple(valid[CONF_ARRAYGAIN_DU]),
            scaling_n=tuple(valid[CONF_SCALING_N]),
            scaling_branches=tuple(valid[CONF_SCALING_BRANCHES]),
            scaling_repeats=valid[CONF_SCALING_REPEATS],
            cp_len=valid.get(CONF_CP_LEN),
            l_max=valid.get(CONF_L_MAX),
            k_max=valid.get(CONF_K_MAX),
            pilot_l0=valid.get(CONF_PILOT_L0),
            pilot_k0=valid.get(CONF_PILOT_K0),
            aoa_min_separation=valid.get(CONF_AOA_MIN_SEPARATION),
            grid_size=valid.get(CONF_GRID_SIZE),
        )

    def with_full_scale(self) -> ExperimentConfig:
        """Switch to the full M=512, N=128 frame and array sweep."""
        return replace(self, M=FULL_M, N=FULL_N, antennas=FULL_ANTENNAS)

    def replace(self, **changes: Any) -> ExperimentConfig:
        return replace(self, **changes)

    @property
    def scan_policy(self) -> ScanPolicy:
        return ScanPolicy(self.threshold_ratio, self.merge_width_factor, self.grid_size)

    def support(self, velocity_kmh: float, params: FrameParams | None = None) -> tuple[int, int]:
        """(l_max, k_max) at a speed, honouring configured overrides."""
        params = params or self.frame_params(self.antennas[0])
        l_max, k_max = support(self.profile, velocity_kmh, params)
        return (
            l_max if self.l_max is None else self.l_max,
            k_max if self.k_max is None else self.k_max,
        )

    def frame_params(self, antennas: int) -> FrameParams:
        """Frame parameters for one array size; the CP defaults to l_max."""
        params = FrameParams.from_spacing_ratio(
            self.M, self.N, self.delta_f, self.f_c, antennas, self.antenna_spacing
        )
        if self.cp_len is not None:
            return params.with_cp(self.cp_len)
        l_max = params.delay_support(self.profile.max_delay) if self.l_max is None else self.l_max
        return params.with_cp(l_max)

    def noise_variance(self, snr_db: float, antennas: int) -> tuple[float, float]:
        """Per-antenna noise variance and the pilot reference variance at an SNR."""
        reference = 10 ** (-snr_db / 10)
        if self.snr_reference == SNR_REF_ANTENNA:
            return reference, reference
        return antennas * reference, reference


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Merge defaults, an optional config file and overrides, then validate."""
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigurationError(f"cannot read config file {path}: {err}") from err
        data.update(parse_config_text(text))
        _LOGGER.info("Loaded %d config keys from %s", len(data), path)
    if overrides:
        data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig.from_mapping(data)
