"""Seeded Monte-Carlo trial coordinator."""
from __future__ import annotations

import asyncio
import logging
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np
from tqdm import tqdm

from .const import DEFAULT_WORKERS
from .exceptions import OtfsArrayError, TrialFailed

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")
TrialFunction = Callable[[np.random.Generator], T]


class SimulationCoordinator:
    """Class to manage seeded Monte-Carlo trials on a worker pool."""

    def __init__(self, master_seed: int, workers: int = DEFAULT_WORKERS, progress: bool = False) -> None:
        """Initialize the coordinator."""
        self.master_seed = master_seed
        self.workers = max(1, workers)
        self.progress = progress

    def trial_rng(self, experiment_id: str, trial_index: int) -> np.random.Generator:
        """Generator owned by one trial; a pure function of seed, experiment and index."""
        sequence = np.random.SeedSequence(
            [self.master_seed, zlib.crc32(experiment_id.encode("utf-8")), trial_index]
        )
        return np.random.default_rng(sequence)

    def _run_one(self, trial_fn: TrialFunction, experiment_id: str, trial_index: int):
        try:
            return trial_fn(self.trial_rng(experiment_id, trial_index))
        except OtfsArrayError as err:
            raise TrialFailed(f"trial {trial_index} of {experiment_id} failed: {err}") from err

    async def async_run_trials(
        self,
        experiment_id: str,
        trial_fn: TrialFunction,
        trials: int,
        description: str | None = None,
    ) -> list:
        """Run trials as executor jobs and return outcomes in trial-index order."""
        loop = asyncio.get_running_loop()
        bar = tqdm(
            total=trials,
            desc=description or experiment_id,
            disable=not (self.progress and sys.stderr.isatty()),
            leave=False,
        )
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = []
            for index in range(trials):
                future = loop.run_in_executor(pool, self._run_one, trial_fn, experiment_id, index)
                future.add_done_callback(lambda _: bar.update())
                futures.append(future)
            try:
                outcomes = await asyncio.gather(*futures)
            except TrialFailed as err:
                _LOGGER.error("Error during %s: %s", experiment_id, err)
                raise
            finally:
                bar.close()
        _LOGGER.debug("Finished %d trials of %s", trials, experiment_id)
        return list(outcomes)

    def run_trials(
        self,
        experiment_id: str,
        trial_fn: TrialFunction,
        trials: int,
        description: str | None = None,
    ) -> list:
        """Blocking wrapper around async_run_trials."""
        return asyncio.run(self.async_run_trials(experiment_id, trial_fn, trials, description))
