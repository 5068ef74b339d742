"""Oracle-equivalence checks run by the `selftest` subcommand."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .beamforming import array_gain, array_gain_bound, array_gain_direct, combine
from .channel import (
    build_dd_channel_matrix,
    propagate_ideal,
    propagate_time,
    rectangular_dd_response,
)
from .config import ExperimentConfig
from .const import (
    EQUALIZER_MMSE,
    FULL_M,
    FULL_N,
    PATTERN_FULL_GUARD,
    PATTERN_NAIVE,
    PATTERN_PROPOSED,
)
from .coordinator import SimulationCoordinator
from .equalizer import matrix_equalize
from .experiments import build_setup, dominance_trial, simulate_trial
from .models import ChannelRealization, DDFrame, FrameParams, PathSpec, TimeSignal
from .modulation import constellation
from .pilot import overhead_count
from .transforms import heisenberg, isfft, remove_cp, sfft, to_delay_doppler, wigner

_LOGGER = logging.getLogger(__name__)

# Normalized time-chain vs ideal-relation MSE at 64x32: one l = 0, k = 1 path and
# the mean over random 4-path channels with l <= 3, |k| <= 4
SINGLE_PATH_MSE_BOUND = 0.05
RANDOM_CHANNEL_MSE_BOUND = 0.2
RANDOM_CHANNELS = 20

EXACTNESS_TRIALS = 50
DOMINANCE_TRIALS = 1000

# Pilot+guard counts at M=512, N=128, l_max=20 for k_max = 1, 4, 16
OVERHEAD_TABLE = {
    PATTERN_FULL_GUARD: (205, 697, 2665),
    PATTERN_NAIVE: (1, 1, 1),
    PATTERN_PROPOSED: (63, 189, 693),
}
OVERHEAD_PERCENT_TABLE = {
    PATTERN_FULL_GUARD: (0.313, 1.064, 4.066),
    PATTERN_NAIVE: (0.002, 0.002, 0.002),
    PATTERN_PROPOSED: (0.096, 0.288, 1.057),
}


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one self-test check."""

    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def random_frame(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Unit-variance circular Gaussian grid."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def random_integer_channel(
    rng: np.random.Generator,
    params: FrameParams,
    paths: int,
    l_max: int,
    k_max: int,
    *,
    zero_doppler: bool = False,
) -> ChannelRealization:
    """Channel with integer delay and Doppler indices on the grid."""
    specs = []
    for tap in range(paths):
        l = int(rng.integers(0, l_max + 1))
        k = 0 if zero_doppler else int(rng.integers(-k_max, k_max + 1))
        specs.append(
            PathSpec(
                tap=tap,
                delay=l / params.sample_rate,
                doppler=k / (params.N * params.T),
                aoa=float(rng.uniform(0.0, 2.0 * math.pi)),
                gain=complex(rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2 * paths),
                l=l,
                k=k,
            )
        )
    return ChannelRealization(tuple(specs), paths, (1,) * paths, k_max / (params.N * params.T), l_max, k_max)


def _desk_params(E: int = 4, cp_len: int = 3) -> FrameParams:
    return FrameParams.from_spacing_ratio(64, 32, 15e3, 4e9, E, 0.45, cp_len)


def check_transforms(rng: np.random.Generator) -> CheckResult:
    params = _desk_params()
    worst = 0.0
    for _ in range(100):
        x = DDFrame(random_frame(rng, params.shape))
        s = isfft(x)
        worst = max(
            worst,
            float(np.max(np.abs(sfft(s).grid - x.grid))),
            float(np.max(np.abs(wigner(remove_cp(heisenberg(s, params)), params).grid - s.grid))),
            float(np.max(np.abs(to_delay_doppler(heisenberg(s, params), params).grid - x.grid))),
        )
    return CheckResult("transforms", worst < 1e-12, f"max error {worst:.2e} over 100 frames")


def check_channel_matrix(rng: np.random.Generator) -> CheckResult:
    params = FrameParams.from_spacing_ratio(8, 8, 15e3, 4e9, 1, 0.45)
    worst = 0.0
    for _ in range(100):
        ch = random_integer_channel(rng, params, int(rng.integers(1, 7)), 3, 2)
        x = DDFrame(random_frame(rng, params.shape))
        y = propagate_ideal(x, ch, params, antenna=0)
        worst = max(worst, float(np.max(np.abs(build_dd_channel_matrix(ch, params) @ x.vectorize() - y.vectorize()))))
    return CheckResult("channel_matrix", worst < 1e-12, f"max error {worst:.2e} over 100 channels")


def time_domain_mse(params: FrameParams, ch: ChannelRealization, x: DDFrame) -> float:
    """Normalized frame MSE between the sampled chain and the ideal relation."""
    received = to_delay_doppler(propagate_time(heisenberg(isfft(x), params), ch, params), params)
    ideal = propagate_ideal(x, ch, params)
    return float(np.sum(np.abs(received.grid - ideal.grid) ** 2) / np.sum(np.abs(ideal.grid) ** 2))


def random_channel_mse(
    rng: np.random.Generator, params: FrameParams, count: int, l_max: int, k_max: int
) -> np.ndarray:
    """Time-chain MSE of random 4-path integer channels, one fresh frame each."""
    return np.array(
        [
            time_domain_mse(
                params, random_integer_channel(rng, params, 4, l_max, k_max), DDFrame(random_frame(rng, params.shape))
            )
            for _ in range(count)
        ]
    )


def check_time_domain(rng: np.random.Generator) -> CheckResult:
    l_max, k_max = 3, 4
    params = _desk_params(cp_len=l_max)
    exact = 0.0
    still = 0.0
    for _ in range(10):
        x = DDFrame(random_frame(rng, params.shape))
        s = heisenberg(isfft(x), params)
        ch = random_integer_channel(rng, params, 4, l_max, k_max)
        received = to_delay_doppler(propagate_time(s, ch, params), params)
        exact = max(exact, float(np.max(np.abs(received.grid - rectangular_dd_response(x, ch, params).grid))))
        ch0 = random_integer_channel(rng, params, 4, l_max, k_max, zero_doppler=True)
        received0 = to_delay_doppler(propagate_time(s, ch0, params), params)
        ideal0 = propagate_ideal(x, ch0, params)
        still = max(still, float(np.max(np.abs(received0.grid[:, l_max:] - ideal0.grid[:, l_max:]))))

    single = ChannelRealization(
        (PathSpec(0, 0.0, 1 / (params.N * params.T), math.pi / 3, 1.0 + 0j, 0, 1),), 1, (1,), 0.0, 0, 1
    )
    mse = time_domain_mse(params, single, DDFrame(random_frame(rng, params.shape)))
    spread = random_channel_mse(rng, params, RANDOM_CHANNELS, l_max, k_max)
    passed = (
        exact < 1e-9
        and still < 1e-9
        and mse < SINGLE_PATH_MSE_BOUND
        and float(np.mean(spread)) < RANDOM_CHANNEL_MSE_BOUND
    )
    return CheckResult(
        "time_domain",
        passed,
        f"rectangular oracle {exact:.2e}, zero-Doppler {still:.2e}, single-path Doppler MSE {mse:.4f}, "
        f"random-channel MSE mean {np.mean(spread):.4f} (min {np.min(spread):.4f}, max {np.max(spread):.4f})",
    )


def check_array_gain(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for _ in range(10_000):
        E = int(rng.integers(1, 1025))
        params = FrameParams.from_spacing_ratio(8, 8, 15e3, 4e9, E, float(rng.uniform(0.1, 0.49)))
        du = float(rng.uniform(-2.0, 2.0))
        worst = max(worst, abs(array_gain(du, 0.0, params) - array_gain_direct(du, 0.0, params)))

    bounded = all(
        array_gain(0.1, 0.0, params) <= array_gain_bound(0.1, params) + 1e-12
        for params in (_desk_params(E) for E in (32, 64, 128, 256, 1024))
    )

    params = _desk_params(E=16)
    noise = TimeSignal(random_frame(rng, (16, 62_500)))
    variance = float(np.mean(np.abs(combine(noise, 0.3, params).frame.samples) ** 2))
    ratio = variance * params.E
    passed = worst < 1e-10 and bounded and abs(ratio - 1) < 0.03
    return CheckResult(
        "array_gain",
        passed,
        f"closed form vs sum {worst:.2e}, bound holds {bounded}, combined noise ratio {ratio:.4f}",
    )


def check_estimator_exactness(seed: int, trials: int = EXACTNESS_TRIALS) -> CheckResult:
    coordinator = SimulationCoordinator(seed)
    errors = 0
    symbols = 0
    misses = 0
    paths = 0
    for profile in ("P4", "P6"):
        for order in (4, 16):
            config = ExperimentConfig.from_mapping(
                {
                    "antennas": "256",
                    "profile": profile,
                    "modulation": order,
                    "pattern": PATTERN_FULL_GUARD,
                    "aoa_min_separation": 0.1,
                }
            )
            setup = build_setup(config, 256, 500.0, math.inf, config.snr_p_db)
            for index in range(trials):
                outcome = simulate_trial(setup, coordinator.trial_rng(f"selftest-{profile}-{order}", index))
                errors += outcome.symbol_errors
                symbols += outcome.symbols
                misses += outcome.index_misses
                paths += outcome.branches
    return CheckResult(
        "estimator_exactness",
        errors == 0 and misses == 0,
        f"{errors} symbol errors in {symbols}, {misses} delay-Doppler index misses in {paths} branches",
    )


def check_mrc_dominance(seed: int, trials: int = DOMINANCE_TRIALS) -> CheckResult:
    config = ExperimentConfig.from_mapping({"M": 8, "N": 8, "antennas": "16", "oracle_checks": False})
    setup = build_setup(config, 16, 500.0, 10.0, config.snr_p_db)
    coordinator = SimulationCoordinator(seed)
    mrc = 0
    single = np.zeros(setup.profile.taps, dtype=np.int64)
    for index in range(trials):
        combined, alone = dominance_trial(setup, coordinator.trial_rng("selftest-dominance", index))
        mrc += combined
        single += np.asarray(alone)
    best = int(np.min(single))
    return CheckResult(
        "mrc_dominance",
        mrc <= best,
        f"MRC {mrc} symbol errors, best single branch {best} over {trials} frames",
    )


def check_overhead() -> CheckResult:
    mismatches = []
    for variant, counts in OVERHEAD_TABLE.items():
        for k_max, count, percent in zip((1, 4, 16), counts, OVERHEAD_PERCENT_TABLE[variant]):
            got = overhead_count(variant, 20, k_max)
            got_percent = round(100.0 * got / (FULL_M * FULL_N), 3)
            if got != count or got_percent != percent:
                mismatches.append(f"{variant}/k_max={k_max}: {got} ({got_percent}%)")
    return CheckResult("overhead", not mismatches, "; ".join(mismatches) or "table reproduced")


def check_matrix_oracle(rng: np.random.Generator) -> CheckResult:
    params = FrameParams.from_spacing_ratio(8, 8, 15e3, 4e9, 1, 0.45)
    const = constellation(4)
    errors = 0
    for _ in range(20):
        ch = random_integer_channel(rng, params, 4, 3, 2)
        labels = rng.integers(0, 4, params.size)
        x = DDFrame(const.points[labels].reshape(params.shape, order="F"))
        H = build_dd_channel_matrix(ch, params)
        y = propagate_ideal(x, ch, params, antenna=0)
        x_hat = matrix_equalize(y, H, 1e-12, EQUALIZER_MMSE)
        errors += int(np.count_nonzero(const.decide(x_hat.vectorize()) != labels))
    return CheckResult("matrix_oracle", errors == 0, f"{errors} symbol errors over 20 frames")


def run_selftest(seed: int) -> list[CheckResult]:
    """Run every check with generators derived from the master seed."""
    coordinator = SimulationCoordinator(seed)
    checks: list[tuple[str, Callable[[], CheckResult]]] = [
        ("transforms", lambda: check_transforms(coordinator.trial_rng("selftest", 0))),
        ("channel_matrix", lambda: check_channel_matrix(coordinator.trial_rng("selftest", 1))),
        ("time_domain", lambda: check_time_domain(coordinator.trial_rng("selftest", 2))),
        ("array_gain", lambda: check_array_gain(coordinator.trial_rng("selftest", 3))),
        ("estimator_exactness", lambda: check_estimator_exactness(seed)),
        ("mrc_dominance", lambda: check_mrc_dominance(seed)),
        ("overhead", check_overhead),
        ("matrix_oracle", lambda: check_matrix_oracle(coordinator.trial_rng("selftest", 4))),
    ]
    results = []
    for name, check in checks:
        result = check()
        _LOGGER.info("%s", result)
        results.append(result)
    return results
