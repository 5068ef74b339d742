"""Monte-Carlo experiments of the OTFS array receiver."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .beamforming import array_gain, array_gain_bound, array_gain_direct
from .channel import (
    DelayProfile,
    build_dd_channel_matrix,
    propagate_ideal,
    sample_channel,
)
from .config import ExperimentConfig
from .const import (
    ANGLES_GENIE,
    CSI_PERFECT,
    DD_MATRIX_CAP,
    EXPERIMENT_ARRAYGAIN,
    EXPERIMENT_BER,
    EXPERIMENT_MSE,
    EXPERIMENT_OVERHEAD,
    EXPERIMENT_SCALING,
    METRIC_ARRAY_GAIN,
    METRIC_ARRAY_GAIN_BOUND,
    METRIC_ARRAY_GAIN_DIRECT,
    METRIC_BER,
    METRIC_DATA_COUNT,
    METRIC_MSE,
    METRIC_OVERHEAD,
    METRIC_OVERHEAD_PERCENT,
    METRIC_RUNTIME,
    METRIC_SCALING_SLOPE,
    METRIC_SER,
    MODE_IDEAL,
    PATTERN_NAIVE,
    PATTERNS,
)
from .coordinator import SimulationCoordinator
from .equalizer import compensate, mrc_combine
from .estimation import (
    benchmark_threshold,
    branch_mse,
    estimate_branch,
    estimate_threshold_2d,
    threshold_mse,
)
from .exceptions import DegenerateCombineError, OracleMismatchError
from .frame import extract_data
from .models import (
    BranchSignal,
    ChannelRealization,
    DDFrame,
    FrameParams,
    PilotPattern,
    ResultRecord,
    ScanPolicy,
    TrialOutcome,
)
from .modulation import constellation
from .pilot import make_pattern, overhead_count
from .receiver import detect, form_branches, receive_frames, transmit
from .results import mean_interval, wilson_interval

_LOGGER = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-9
ARRAYGAIN_TOLERANCE = 1e-10


@dataclass(frozen=True)
class LinkSetup:
    """Everything one trial of a sweep point needs."""

    params: FrameParams
    profile: DelayProfile
    paths_per_tap: tuple[int, ...] | None
    velocity_kmh: float
    l_max: int
    k_max: int
    pattern: PilotPattern
    order: int
    sigma2: float
    mode: str
    angles: str
    csi: str
    policy: ScanPolicy
    aoa_policy: str
    aoa_min_separation: float | None = None
    benchmark: bool = False

    @property
    def f_d(self) -> float:
        return self.params.max_doppler(self.velocity_kmh)


def build_setup(
    config: ExperimentConfig,
    antennas: int,
    velocity_kmh: float,
    snr_db: float,
    snr_p_db: float,
    *,
    pattern: str | None = None,
    benchmark: bool = False,
) -> LinkSetup:
    """Resolve a sweep point of the config into a link setup."""
    params = config.frame_params(antennas)
    l_max, k_max = config.support(velocity_kmh, params)
    sigma2, reference = config.noise_variance(snr_db, antennas)
    return LinkSetup(
        params=params,
        profile=config.profile,
        paths_per_tap=config.paths_per_tap,
        velocity_kmh=velocity_kmh,
        l_max=l_max,
        k_max=k_max,
        pattern=make_pattern(
            pattern or config.pattern,
            params,
            l_max,
            k_max,
            snr_p_db,
            reference,
            config.pilot_l0,
            config.pilot_k0,
        ),
        order=config.modulation,
        sigma2=sigma2,
        mode=config.mode,
        angles=config.angles,
        csi=config.csi,
        policy=config.scan_policy,
        aoa_policy=config.aoa_policy,
        aoa_min_separation=config.aoa_min_separation,
        benchmark=benchmark,
    )


def _draw_channel(setup: LinkSetup, rng: np.random.Generator) -> ChannelRealization:
    return sample_channel(
        setup.profile,
        setup.velocity_kmh,
        setup.params,
        rng,
        setup.paths_per_tap,
        aoa_policy=setup.aoa_policy,
        min_separation=setup.aoa_min_separation,
        l_max=setup.l_max,
        k_max=setup.k_max,
    )


def _draw_frames(setup: LinkSetup, rng: np.random.Generator) -> tuple[ChannelRealization, np.ndarray, DDFrame]:
    """Channel, transmitted bits and received antenna stack of one trial."""
    ch = _draw_channel(setup, rng)
    const = constellation(setup.order)
    bits = rng.integers(0, 2, size=setup.pattern.data_count * const.bits_per_symbol)
    x = transmit(bits, setup.order, setup.pattern, setup.params)
    return ch, bits, receive_frames(x, ch, setup.params, setup.mode, setup.sigma2, rng)


def simulate_trial(setup: LinkSetup, rng: np.random.Generator) -> TrialOutcome:
    """One frame through transmitter, channel, array and receiver."""
    params = setup.params
    const = constellation(setup.order)
    ch, bits, frames = _draw_frames(setup, rng)

    outcome = TrialOutcome()
    try:
        detection = detect(
            frames,
            setup.pattern,
            params,
            setup.f_d,
            angles=setup.angles,
            csi=setup.csi,
            channel=ch,
            policy=setup.policy,
        )
        labels_hat = const.decide(detection.data)
        estimates = detection.estimates
    except DegenerateCombineError as err:
        _LOGGER.debug("No usable branch: %s", err)
        labels_hat = np.zeros(setup.pattern.data_count, dtype=np.int64)
        estimates = ()
        outcome.empty_scans = 1

    labels = const.labels(bits)
    outcome.symbols = labels.size
    outcome.symbol_errors = int(np.count_nonzero(labels != labels_hat))
    outcome.bits = bits.size
    outcome.bit_errors = int(np.count_nonzero(const.bits(labels_hat) != bits))
    outcome.branches = len(estimates)
    genie = setup.angles == ANGLES_GENIE or setup.csi == CSI_PERFECT
    outcome.mse = branch_mse(estimates, ch, None if genie else params.mainlobe_width)
    if genie:
        # genie branches follow path order
        outcome.index_misses = sum(
            1 for est, path in zip(estimates, ch.paths) if (est.l_hat, est.k_hat) != (path.l, path.k)
        )
    if setup.benchmark:
        found = estimate_threshold_2d(
            frames.antenna(0), setup.pattern, params, benchmark_threshold(setup.sigma2, setup.pattern.d0)
        )
        outcome.benchmark_mse = threshold_mse(found, ch)
    return outcome


def _check_channel_oracle(setup: LinkSetup, rng: np.random.Generator) -> None:
    """Compare the DD propagation with the channel matrix on one random channel."""
    params = setup.params
    if params.size > DD_MATRIX_CAP:
        _LOGGER.debug("Skipping channel matrix oracle at MN=%d", params.size)
        return
    ch = _draw_channel(setup, rng)
    x = DDFrame(rng.standard_normal(params.shape) + 1j * rng.standard_normal(params.shape))
    y = propagate_ideal(x, ch, params, antenna=0)
    error = float(np.max(np.abs(build_dd_channel_matrix(ch, params) @ x.vectorize() - y.vectorize())))
    if error > ORACLE_TOLERANCE:
        raise OracleMismatchError(f"channel matrix and DD propagation differ by {error:.3g}")
    _LOGGER.debug("Channel matrix oracle agrees to %.3g", error)


def _run_point(
    coordinator: SimulationCoordinator, experiment: str, setup: LinkSetup, trials: int, description: str
) -> list[TrialOutcome]:
    outcomes = coordinator.run_trials(experiment, partial(simulate_trial, setup), trials, description)
    empty = sum(outcome.empty_scans for outcome in outcomes)
    if empty:
        _LOGGER.warning("%s: %d of %d trials had no usable branch", description, empty, trials)
    return outcomes


def run_ber(
    config: ExperimentConfig,
    coordinator: SimulationCoordinator | None = None,
    *,
    pattern: str | None = None,
) -> list[ResultRecord]:
    """BER and SER over the (velocity, antennas, SNR) sweep."""
    coordinator = coordinator or SimulationCoordinator(config.seed, config.workers)
    variant = pattern or config.pattern
    records: list[ResultRecord] = []
    _LOGGER.info("Starting BER sweep with %d trials per point", config.trials)
    for velocity in config.velocities_kmh:
        for antennas in config.antennas:
            if config.oracle_checks and config.mode == MODE_IDEAL:
                oracle_setup = build_setup(config, antennas, velocity, config.snr_db[0], config.snr_p_db)
                _check_channel_oracle(oracle_setup, coordinator.trial_rng("oracle", 0))
            for snr in config.snr_db:
                setup = build_setup(config, antennas, velocity, snr, config.snr_p_db, pattern=variant)
                description = f"ber v={velocity:g} E={antennas} snr={snr:g}"
                outcomes = _run_point(coordinator, EXPERIMENT_BER, setup, config.trials, description)
                bit_errors = sum(o.bit_errors for o in outcomes)
                bits = sum(o.bits for o in outcomes)
                symbol_errors = sum(o.symbol_errors for o in outcomes)
                symbols = sum(o.symbols for o in outcomes)
                coordinates = dict(
                    experiment=EXPERIMENT_BER,
                    trials=config.trials,
                    seed=config.seed,
                    snr_db=snr,
                    snr_p_db=config.snr_p_db,
                    velocity_kmh=velocity,
                    antennas=antennas,
                    pattern=variant,
                )
                _, ber_half = wilson_interval(bit_errors, bits)
                _, ser_half = wilson_interval(symbol_errors, symbols)
                records.append(
                    ResultRecord(metric=METRIC_BER, value=bit_errors / bits, ci_half_width=ber_half, **coordinates)
                )
                records.append(
                    ResultRecord(
                        metric=METRIC_SER, value=symbol_errors / symbols, ci_half_width=ser_half, **coordinates
                    )
                )
                if bit_errors == 0:
                    _LOGGER.warning("%s: no bit errors, interval is one-sided", description)
                _LOGGER.info("%s: BER=%.3g (+/- %.2g)", description, bit_errors / bits, ber_half)
    return records


def run_mse(config: ExperimentConfig, coordinator: SimulationCoordinator | None = None) -> list[ResultRecord]:
    """Channel-estimation MSE over the pilot SNR sweep at a fixed data SNR."""
    coordinator = coordinator or SimulationCoordinator(config.seed, config.workers)
    records: list[ResultRecord] = []
    _LOGGER.info("Starting MSE sweep at data SNR %g dB", config.mse_data_snr_db)
    for velocity in config.velocities_kmh:
        for antennas in config.antennas:
            for snr_p in config.mse_snr_p_db:
                setup = build_setup(
                    config, antennas, velocity, config.mse_data_snr_db, snr_p, benchmark=True
                )
                description = f"mse v={velocity:g} E={antennas} snr_p={snr_p:g}"
                outcomes = _run_point(coordinator, EXPERIMENT_MSE, setup, config.trials, description)
                coordinates = dict(
                    experiment=EXPERIMENT_MSE,
                    metric=METRIC_MSE,
                    trials=config.trials,
                    seed=config.seed,
                    snr_db=config.mse_data_snr_db,
                    snr_p_db=snr_p,
                    velocity_kmh=velocity,
                    antennas=antennas,
                    pattern=config.pattern,
                )
                mse, half = mean_interval([o.mse for o in outcomes])
                records.append(ResultRecord(value=mse, ci_half_width=half, **coordinates))
                bench, bench_half = mean_interval([o.benchmark_mse for o in outcomes])
                records.append(
                    ResultRecord(
                        value=bench, ci_half_width=bench_half, label="estimator=threshold2d", **coordinates
                    )
                )
                _LOGGER.info("%s: MSE=%.3g, threshold benchmark=%.3g", description, mse, bench)
    return records


def run_overhead(config: ExperimentConfig) -> list[ResultRecord]:
    """Pilot plus guard counts of every pattern at every configured speed."""
    params = config.frame_params(config.antennas[0])
    records: list[ResultRecord] = []
    for velocity in config.velocities_kmh:
        l_max, k_max = config.support(velocity, params)
        for variant in PATTERNS:
            count = overhead_count(variant, l_max, k_max)
            coordinates = dict(
                experiment=EXPERIMENT_OVERHEAD,
                trials=0,
                seed=config.seed,
                velocity_kmh=velocity,
                pattern=variant,
                label=f"l_max={l_max},k_max={k_max}",
            )
            records.append(ResultRecord(metric=METRIC_OVERHEAD, value=count, **coordinates))
            records.append(
                ResultRecord(
                    metric=METRIC_OVERHEAD_PERCENT, value=round(100.0 * count / params.size, 3), **coordinates
                )
            )
            records.append(ResultRecord(metric=METRIC_DATA_COUNT, value=params.size - count, **coordinates))
            _LOGGER.info("Overhead %s at %g km/h: %d of %d cells", variant, velocity, count, params.size)
    return records


def run_arraygain(config: ExperimentConfig) -> list[ResultRecord]:
    """Normalized array gain versus angle offset, closed form and direct sum."""
    records: list[ResultRecord] = []
    for antennas in config.antennas:
        params = config.frame_params(antennas)
        for du in config.arraygain_du:
            gain = array_gain(du, 0.0, params)
            direct = array_gain_direct(du, 0.0, params)
            if config.oracle_checks and abs(gain - direct) > ARRAYGAIN_TOLERANCE:
                raise OracleMismatchError(
                    f"array gain closed form {gain} and direct sum {direct} differ at E={antennas}, du={du}"
                )
            coordinates = dict(
                experiment=EXPERIMENT_ARRAYGAIN, trials=0, seed=config.seed, antennas=antennas, label=f"du={du:g}"
            )
            records.append(ResultRecord(metric=METRIC_ARRAY_GAIN, value=gain, **coordinates))
            records.append(ResultRecord(metric=METRIC_ARRAY_GAIN_DIRECT, value=direct, **coordinates))
            if math.sin(math.pi * params.eta * du / params.wavelength) != 0:
                records.append(
                    ResultRecord(metric=METRIC_ARRAY_GAIN_BOUND, value=array_gain_bound(du, params), **coordinates)
                )
    return records


def detect_branches(
    branches: Sequence[DDFrame],
    u_values: Sequence[float],
    pattern: PilotPattern,
    params: FrameParams,
    f_d: float,
    order: int,
) -> np.ndarray:
    """Estimation, compensation, MRC and hard decisions on formed branches."""
    estimates = [estimate_branch(b, u, pattern, params, f_d) for b, u in zip(branches, u_values)]
    compensated = [compensate(b, e.l_hat, e.k_hat) for b, e in zip(branches, estimates)]
    x_hat = mrc_combine(compensated, estimates, params)
    return constellation(order).decide(extract_data(x_hat, pattern))


def dominance_trial(setup: LinkSetup, rng: np.random.Generator) -> tuple[int, tuple[int, ...]]:
    """Symbol errors of MRC and of every genie branch equalized on its own.

    A branch whose gain estimate vanishes decides every symbol as label 0.
    """
    ch, bits, frames = _draw_frames(setup, rng)
    labels = constellation(setup.order).labels(bits)
    branches = form_branches(frames, setup.params, angles=ANGLES_GENIE, channel=ch)

    def errors(selected: list[BranchSignal]) -> int:
        frames_b = [b.frame for b in selected]
        try:
            labels_hat = detect_branches(
                frames_b, [b.u for b in selected], setup.pattern, setup.params, setup.f_d, setup.order
            )
        except DegenerateCombineError:
            labels_hat = np.zeros_like(labels)
        return int(np.count_nonzero(labels != labels_hat))

    return errors(branches), tuple(errors([branch]) for branch in branches)


def run_scaling(
    config: ExperimentConfig, coordinator: SimulationCoordinator | None = None
) -> list[ResultRecord]:
    """Detection wall time versus B*M*N and its log-log slope."""
    coordinator = coordinator or SimulationCoordinator(config.seed, config.workers)
    rng = coordinator.trial_rng(EXPERIMENT_SCALING, 0)
    sizes: list[int] = []
    times: list[float] = []
    records: list[ResultRecord] = []
    for count in config.scaling_branches:
        for N in config.scaling_n:
            params = FrameParams.from_spacing_ratio(
                config.M, N, config.delta_f, config.f_c, 1, config.antenna_spacing
            )
            l_max = min(params.delay_support(config.profile.max_delay), (config.M - 1) // 2)
            pattern = make_pattern(PATTERN_NAIVE, params, l_max, 0, config.snr_p_db, 1.0)
            shape = (count, *params.shape)
            grids = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            branches = [DDFrame(grid) for grid in grids]
            u_values = rng.uniform(-1.0, 1.0, count)
            elapsed = []
            for _ in range(config.scaling_repeats):
                start = time.perf_counter()
                detect_branches(branches, u_values, pattern, params, 0.0, config.modulation)
                elapsed.append(time.perf_counter() - start)
            runtime = min(elapsed)
            size = count * params.size
            sizes.append(size)
            times.append(runtime)
            records.append(
                ResultRecord(
                    experiment=EXPERIMENT_SCALING,
                    metric=METRIC_RUNTIME,
                    value=runtime,
                    trials=config.scaling_repeats,
                    seed=config.seed,
                    label=f"B={count},M={config.M},N={N},BMN={size}",
                )
            )
            _LOGGER.info("Detection of B=%d, M=%d, N=%d took %.3g s", count, config.M, N, runtime)

    slope = float(np.polyfit(np.log(sizes), np.log(times), 1)[0]) if len(set(sizes)) > 1 else 0.0
    if slope < 0:
        _LOGGER.warning("Negative scaling slope %.3g, timings are dominated by overhead", slope)
    records.append(
        ResultRecord(
            experiment=EXPERIMENT_SCALING,
            metric=METRIC_SCALING_SLOPE,
            value=max(slope, 0.0),
            trials=config.scaling_repeats,
            seed=config.seed,
        )
    )
    _LOGGER.info("Detection time scales as (BMN)^%.3f", slope)
    return records

