"""
Experiment orchestrator.

A job is one (grid point, Hamiltonian sample). It samples the couplings,
runs the protocol on the IPC input stream and on the benchmark series, adds
shot noise, and scores capacity and task NRMSE. Jobs share no mutable
state: every random draw comes from a stream addressed by
(master seed, grid index, Hamiltonian index), so results do not depend on
scheduling.
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Union

import numpy as np

from benchmarks.cache import SeriesCache, generate_series
from benchmarks.tasks import make_task
from errors import ConfigError
from ipc.capacity import compute_ipc
from models import ProtocolKind, TaskKind
from readout.trainer import NoiseSpec, add_shot_noise, nrmse, predict, train_readout
from reservoir.hamiltonians import DrivenTfimSpec, build_tfim, sample_couplings
from reservoir.protocols import ReadoutTrace, run_protocol
from reservoir.rng import HAMILTONIAN, IPC_INPUT, NOISE, SHUFFLE, make_rng
from .models import ExperimentConfig, JobFailure, ResultRecord, SweepOutcome, SweepSpec

logger = logging.getLogger(__name__)

# Noise stream offsets within a job.
NOISE_IPC, NOISE_LORENZ, NOISE_MACKEY_GLASS = 0, 1, 2

LORENZ_TASKS = (TaskKind.LXX, TaskKind.LXZ)


def build_reservoir(config: ExperimentConfig, ham_index: int) -> Union[np.ndarray, DrivenTfimSpec]:
    """Hamiltonian (or driven spec for DSP) of ensemble member ham_index.

    Couplings depend only on (seed, ham_index), so every grid point of a
    sweep sees the same ensemble.
    """
    spec = config.hamiltonian
    J = sample_couplings(spec, make_rng(config.seed, HAMILTONIAN, ham_index))
    if config.protocol.kind == ProtocolKind.DSP:
        return DrivenTfimSpec(n_qubits=spec.n_qubits, couplings=J)
    return build_tfim(spec, J)


def noise_spec(config: ExperimentConfig) -> NoiseSpec:
    """Shot noise for a config; WMP noise grows as 1/sin(theta).

    theta = 0 carries no back-action and is scored with unscaled noise.
    """
    protocol = config.protocol
    strength = None
    if protocol.kind == ProtocolKind.WMP and config.scale_noise_with_strength:
        if protocol.measurement_strength > 0.0:
            strength = protocol.measurement_strength
        else:
            logger.info("WMP at theta = 0 scored with unscaled shot noise")
    return NoiseSpec(n_measurements=config.n_measurements, wmp_strength=strength, seed=config.seed)


def series_lengths(config: ExperimentConfig) -> int:
    """Samples needed per series: washout + train + test + one-step target."""
    return config.protocol.washout + config.n_train + config.n_test + 1


def prepare_series(config: ExperimentConfig, cache: Optional[SeriesCache] = None) -> Dict[str, np.ndarray]:
    """Benchmark series the config's tasks need, keyed "lorenz" / "mackey_glass"."""
    n_samples = series_lengths(config)
    load = cache.load_or_generate if cache else generate_series
    series = {}
    if any(t in config.tasks for t in LORENZ_TASKS):
        series["lorenz"] = load(config.lorenz, n_samples)
    if TaskKind.MG in config.tasks:
        series["mackey_glass"] = load(config.mackey_glass, n_samples)
    return series


def _score_task(trace: ReadoutTrace, targets: np.ndarray, n_train: int) -> float:
    """Train on the first n_train rows, NRMSE on the rest."""
    X = trace.values
    readout = train_readout(X[:n_train], targets[:n_train])
    return nrmse(predict(X[n_train:], readout), targets[n_train:])


class ExperimentRunner:
    """Runs jobs and sweeps; failures are logged and collected, not raised."""

    def __init__(self, series: Optional[Dict[str, np.ndarray]] = None, cache: Optional[SeriesCache] = None):
        self.series = series
        self.cache = cache
        self.failures: List[JobFailure] = []

    def _series_for(self, config: ExperimentConfig) -> Dict[str, np.ndarray]:
        if self.series is None:
            self.series = prepare_series(config, self.cache)
        return self.series

    def run_job(
        self,
        config: ExperimentConfig,
        grid_index: int = 0,
        ham_index: int = 0,
        parameter: float = float("nan"),
    ) -> ResultRecord:
        """One Hamiltonian sample at one grid point."""
        started = time.perf_counter()
        reservoir = build_reservoir(config, ham_index)
        noise = noise_spec(config)
        protocol = config.protocol
        record = ResultRecord(
            parameter=parameter,
            seed=config.seed,
            ham_index=ham_index,
            grid_index=grid_index,
            config_hash=config.config_hash,
        )

        if config.ipc_enabled:
            inputs = make_rng(config.seed, IPC_INPUT, ham_index).uniform(
                -1.0, 1.0, size=protocol.washout + config.ipc_inputs
            )
            trace = run_protocol(reservoir, protocol, inputs)
            trace = add_shot_noise(trace, noise, make_rng(config.seed, NOISE, grid_index, ham_index, NOISE_IPC))
            report = compute_ipc(
                trace, inputs, config.ipc_budget, config.cutoff,
                rng=make_rng(config.seed, SHUFFLE, grid_index, ham_index),
            )
            record.per_degree = report.per_degree
            record.ipc_report = report

        if config.tasks:
            series = self._series_for(config)
            record.nrmse = self._run_tasks(config, reservoir, noise, series, grid_index, ham_index)

        record.runtime_s = time.perf_counter() - started
        logger.info(
            f"Job grid={grid_index} ham={ham_index} done in {record.runtime_s:.1f}s "
            f"(IPC total {record.ipc_total:.3f})"
        )
        return record

    def _run_tasks(self, config, reservoir, noise, series, grid_index, ham_index) -> Dict[str, float]:
        washout = config.protocol.washout
        n_fit = washout + config.n_train
        scores: Dict[str, float] = {}
        if any(t in config.tasks for t in LORENZ_TASKS):
            lorenz = series["lorenz"]
            # One Lorenz run serves both tasks: LXZ reads z_n at the row driven by x_n.
            driver = make_task(lorenz, TaskKind.LXX, n_train=n_fit, n_test=config.n_test)
            trace = run_protocol(reservoir, config.protocol, driver.inputs)
            trace = add_shot_noise(trace, noise, make_rng(config.seed, NOISE, grid_index, ham_index, NOISE_LORENZ))
            if TaskKind.LXX in config.tasks:
                scores[TaskKind.LXX.value] = _score_task(trace, driver.targets[washout:], config.n_train)
            if TaskKind.LXZ in config.tasks:
                z = lorenz[washout:washout + trace.n_steps, 2]
                scores[TaskKind.LXZ.value] = _score_task(trace, z, config.n_train)
        if TaskKind.MG in config.tasks:
            task = make_task(series["mackey_glass"], TaskKind.MG, n_train=n_fit, n_test=config.n_test)
            trace = run_protocol(reservoir, config.protocol, task.inputs)
            trace = add_shot_noise(
                trace, noise, make_rng(config.seed, NOISE, grid_index, ham_index, NOISE_MACKEY_GLASS)
            )
            scores[TaskKind.MG.value] = _score_task(trace, task.targets[washout:], config.n_train)
        return scores

    def run_job_safe(self, config, grid_index, ham_index, parameter) -> Union[ResultRecord, JobFailure]:
        try:
            return self.run_job(config, grid_index, ham_index, parameter)
        except Exception as e:
            logger.error(f"Job grid={grid_index} ham={ham_index} failed: {e}", exc_info=True)
            return JobFailure(grid_index, ham_index, parameter, f"{type(e).__name__}: {e}")

    def _collect(self, results) -> SweepOutcome:
        outcome = SweepOutcome()
        for result in results:
            if isinstance(result, JobFailure):
                outcome.failures.append(result)
            else:
                outcome.records.append(result)
        outcome.records.sort(key=lambda r: r.sort_key)
        outcome.failures.sort(key=lambda f: (f.grid_index, f.ham_index))
        self.failures.extend(outcome.failures)
        return outcome

    def run_experiment(self, config: ExperimentConfig, parameter: float = float("nan")) -> List[ResultRecord]:
        """One record per Hamiltonian sample, run serially."""
        results = [self.run_job_safe(config, 0, h, parameter) for h in range(config.n_hamiltonians)]
        return self._collect(results).records

    def run_sweep(self, sweep: SweepSpec) -> SweepOutcome:
        """Serial sweep over grid x ensemble."""
        results = [
            self.run_job_safe(point, g, h, value)
            for g, value, point in _points(sweep)
            for h in range(sweep.base.n_hamiltonians)
        ]
        return self._collect(results)

    async def run_sweep_async(self, sweep: SweepSpec, max_workers: Optional[int] = None) -> SweepOutcome:
        """Sweep with jobs spread over a process pool."""
        series = self._series_for(sweep.base)
        jobs = [(point, g, h, value) for g, value, point in _points(sweep) for h in range(sweep.base.n_hamiltonians)]
        logger.info(f"Sweep over {sweep.parameter.value}: {len(jobs)} jobs, {max_workers or 'default'} workers")
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = [loop.run_in_executor(pool, _job_entry, series, *job) for job in jobs]
            results = await asyncio.gather(*futures)
        return self._collect(results)


def _points(sweep: SweepSpec):
    for g, value in enumerate(sweep.grid):
        yield g, value, sweep.point(g)


def _job_entry(series, config, grid_index, ham_index, parameter):
    """Process-pool entry point."""
    return ExperimentRunner(series=series).run_job_safe(config, grid_index, ham_index, parameter)


def run_experiment(config: ExperimentConfig, cache: Optional[SeriesCache] = None) -> List[ResultRecord]:
    return ExperimentRunner(cache=cache).run_experiment(config)


async def run_sweep_async(
    sweep: SweepSpec,
    max_workers: Optional[int] = None,
    cache: Optional[SeriesCache] = None,
) -> SweepOutcome:
    return await ExperimentRunner(cache=cache).run_sweep_async(sweep, max_workers)


def run_sweep(
    sweep: SweepSpec,
    max_workers: Optional[int] = None,
    cache: Optional[SeriesCache] = None,
) -> SweepOutcome:
    """Synchronous sweep; max_workers=1 runs in-process."""
    if max_workers is not None and max_workers < 1:
        raise ConfigError(f"max_workers must be >= 1, got {max_workers}")
    if max_workers == 1:
        return ExperimentRunner(cache=cache).run_sweep(sweep)
    return asyncio.run(run_sweep_async(sweep, max_workers, cache))
