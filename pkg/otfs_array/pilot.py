"""Embedded pilot patterns."""
from __future__ import annotations

import logging
import math

import numpy as np

from .const import (
    NOISELESS_REFERENCE_VARIANCE,
    PATTERN_FULL_GUARD,
    PATTERN_NAIVE,
    PATTERN_PROPOSED,
    PATTERNS,
)
from .exceptions import ConfigurationError, DomainError
from .models import FrameParams, PilotPattern

_LOGGER = logging.getLogger(__name__)


def legal_pilot_region(params: FrameParams, l_max: int, k_max: int) -> tuple[range, range]:
    """Return the pilot positions that keep every footprint inside the grid."""
    return range(l_max, params.M - l_max), range(2 * k_max, params.N - 2 * k_max)


def default_pilot_position(params: FrameParams, l_max: int, k_max: int) -> tuple[int, int]:
    """Centre of the legal pilot region."""
    l_range, k_range = legal_pilot_region(params, l_max, k_max)
    if not l_range or not k_range:
        raise ConfigurationError(
            f"pilot footprint for l_max={l_max}, k_max={k_max} exceeds {params.M}x{params.N}",
            "pattern",
        )
    return (l_range.start + l_range.stop - 1) // 2, (k_range.start + k_range.stop - 1) // 2


def guard_window(variant: str, l0: int, k0: int, l_max: int, k_max: int) -> tuple[range, range]:
    """Delay and Doppler ranges covered by pilot plus guards."""
    if variant == PATTERN_FULL_GUARD:
        return range(l0 - l_max, l0 + l_max + 1), range(k0 - 2 * k_max, k0 + 2 * k_max + 1)
    if variant == PATTERN_PROPOSED:
        return (
            range(l0 - math.ceil(l_max / 2), l0 + l_max // 2 + 1),
            range(k0 - k_max, k0 + k_max + 1),
        )
    if variant == PATTERN_NAIVE:
        return range(l0, l0 + 1), range(k0, k0 + 1)
    raise ConfigurationError(f"unknown pattern {variant}, expected one of {PATTERNS}", "pattern")


def overhead_count(variant: str, l_max: int, k_max: int) -> int:
    """Pilot plus guard cells of a pattern."""
    l_range, k_range = guard_window(variant, 0, 0, l_max, k_max)
    return len(l_range) * len(k_range)


def pilot_amplitude(snr_p_db: float, sigma2: float) -> complex:
    """Real pilot amplitude with |d0|^2 = sigma2 * 10^(SNR_p/10)."""
    if sigma2 < 0:
        raise DomainError(f"noise variance {sigma2} is negative")
    reference = sigma2 if sigma2 > 0 else NOISELESS_REFERENCE_VARIANCE
    return complex(math.sqrt(reference * 10 ** (snr_p_db / 10)), 0.0)


def make_pattern(
    variant: str,
    params: FrameParams,
    l_max: int,
    k_max: int,
    snr_p_db: float,
    sigma2: float,
    l0: int | None = None,
    k0: int | None = None,
) -> PilotPattern:
    """Build the pilot, guard and data index sets of a pattern variant."""
    if l_max < 0 or k_max < 0:
        raise ConfigurationError("channel support must be non-negative", "l_max")
    default_l0, default_k0 = default_pilot_position(params, l_max, k_max)
    l0 = default_l0 if l0 is None else l0
    k0 = default_k0 if k0 is None else k0
    l_range, k_range = legal_pilot_region(params, l_max, k_max)
    if l0 not in l_range or k0 not in k_range:
        raise ConfigurationError(
            f"pilot ({l0}, {k0}) outside legal region l in [{l_range.start}, {l_range.stop - 1}], "
            f"k in [{k_range.start}, {k_range.stop - 1}]",
            "pilot_l0",
        )

    l_window, k_window = guard_window(variant, l0, k0, l_max, k_max)
    ls, ks = np.meshgrid(np.arange(l_window.start, l_window.stop), np.arange(k_window.start, k_window.stop))
    footprint = np.sort((ls + params.M * ks).reshape(-1))
    pilot = l0 + params.M * k0
    guards = footprint[footprint != pilot]
    data = np.setdiff1d(np.arange(params.size), footprint, assume_unique=True)
    if data.size == 0:
        raise ConfigurationError(
            f"{variant} pattern for l_max={l_max}, k_max={k_max} leaves no data cells in {params.M}x{params.N}",
            "pattern",
        )

    pattern = PilotPattern(
        variant=variant,
        M=params.M,
        N=params.N,
        l0=l0,
        k0=k0,
        l_max=l_max,
        k_max=k_max,
        d0=pilot_amplitude(snr_p_db, sigma2),
        guard_indices=guards,
        data_indices=data,
    )
    _LOGGER.debug(
        "Pattern %s at (%d, %d): %d pilot+guard cells, %d data cells",
        variant,
        l0,
        k0,
        pattern.overhead,
        pattern.data_count,
    )
    return pattern
