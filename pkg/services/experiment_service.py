"""
Experiment Service
Seeded ensemble experiments validating the MAVAR Hurst estimator

Features:
- Accuracy sweep over H and N, MAVAR against the enabled baselines
- Convergence of the estimate with series length (prefix truncation)
- Robustness of the estimate to a step of amplitude A at delay M
- Per-cell seeds derived from (master seed, cell indices), so any cell can be re-run alone
- Cells run concurrently, results always assembled in config-product order
- A failing cell becomes a flagged row; the run continues
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from config import Config
from models.curve import MavarCurve
from models.estimate import EstimationMethod
from models.experiment import CellResult, CellStatus, ExperimentConfig, ExperimentKind, ExperimentReport
from models.generator import Contaminant, ContaminantKind, GeneratorSpec
from models.series import TimeSeries
from modules.errors import ExperimentError, MavarError
from modules.estimation import estimate_hurst, tail_limit
from modules.mavar import mavar_curve
from modules.synth import apply_contaminant, gen_lrd
from modules.utils import package_versions

logger = logging.getLogger(__name__)

SINGLE_SEED_FLAG = "single_seed"
# Lengths standing in for the 1000..50000 range of the convergence study
CONVERGENCE_LENGTHS = [1024, 2048, 4096, 8192, 16384, 32768, 65536]


def cell_seed(master_seed: int, *indices: int) -> int:
    """64-bit seed of one cell replicate, independent of every other cell"""
    sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(int(i) for i in indices))
    return int(sequence.generate_state(1, np.uint64)[0])


class ExperimentService:
    """Runs accuracy, convergence and step-robustness experiments"""

    def __init__(self, ratio: Optional[float] = None, n_lo: Optional[int] = None,
                 tail_divisor: Optional[int] = None):
        """
        Initialize experiment service

        Args:
            ratio: Tau grid ratio (default Config.GRID_RATIO)
            n_lo: Lowest n of the MAVAR slope fit (default Config.FIT_N_LO)
            tail_divisor: Fits keep n <= N / tail_divisor (default Config.FIT_TAIL_DIVISOR)
        """
        self.ratio = ratio if ratio is not None else Config.GRID_RATIO
        self.n_lo = n_lo if n_lo is not None else Config.FIT_N_LO
        self.tail_divisor = tail_divisor if tail_divisor is not None else Config.FIT_TAIL_DIVISOR

    # ========================================================================
    # Shared helpers
    # ========================================================================

    def _estimate(self, series: TimeSeries, method: EstimationMethod) -> float:
        return estimate_hurst(series, method, ratio=self.ratio, n_lo=self.n_lo,
                              tail_divisor=self.tail_divisor).H

    def _run_jobs(self, job: Callable, jobs: Iterable, workers: int) -> List[Any]:
        jobs = list(jobs)
        if workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                return list(executor.map(job, jobs))
        return [job(j) for j in jobs]

    @staticmethod
    def _aggregate(base: Dict[str, Any], estimates: List[float], deltas: List[float],
                   errors: List[str], seeds: int) -> CellResult:
        if errors:
            return CellResult(**base, estimates=estimates, deltas=deltas, status=CellStatus.FAILED,
                              message=errors[0], flags=["failed"])
        flags = []
        if seeds == 1:
            flags.append(SINGLE_SEED_FLAG)
            std = 0.0
        else:
            std = float(np.std(deltas, ddof=1))
        return CellResult(**base, estimates=estimates, deltas=deltas, mean=float(np.mean(deltas)), std=std,
                          flags=flags)

    def _metadata(self, config: ExperimentConfig, started: float, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        metadata = {
            "config": config.model_dump(mode='json'),
            "versions": package_versions(),
            "wall_time_s": round(time.perf_counter() - started, 3),
            "grid_ratio": self.ratio,
            "fit_n_lo": self.n_lo,
            "tail_policy": f"MAVAR fits keep n <= N/{self.tail_divisor}",
            "seed_derivation": "SeedSequence(master_seed, spawn_key=cell indices)"
        }
        metadata.update(extra or {})
        return metadata

    def _log_summary(self, kind: ExperimentKind, cells: List[CellResult], started: float):
        failed = sum(1 for c in cells if c.status == CellStatus.FAILED)
        if any(SINGLE_SEED_FLAG in c.flags for c in cells):
            logger.warning(f"[Experiment Service] {kind.value}: single seed per cell, std reported as 0")
        logger.info(f"[Experiment Service] {kind.value} finished: {len(cells)} cells, {failed} failed, "
                    f"{time.perf_counter() - started:.1f}s")

    def run(self, config: ExperimentConfig) -> ExperimentReport:
        """Dispatch on the experiment kind"""
        if config.experiment == ExperimentKind.ACCURACY:
            return self.run_accuracy_experiment(config)
        if config.experiment == ExperimentKind.CONVERGENCE:
            return self.run_convergence_experiment(config)
        if config.experiment == ExperimentKind.STEP_ROBUSTNESS:
            return self.run_step_robustness(config)
        raise ExperimentError("trace analysis is not an ensemble experiment; use the analyze command")

    # ========================================================================
    # Accuracy
    # ========================================================================

    def run_accuracy_experiment(self, config: ExperimentConfig) -> ExperimentReport:
        """
        Estimation error H_est - H_true per (H, N, method) over seeds_per_cell replicates

        Returns:
            ExperimentReport with |H| x |N| x |methods| cells
        """
        started = time.perf_counter()
        logger.info(f"[Experiment Service] accuracy: H={config.h_list}, N={config.n_list}, "
                    f"{config.seeds_per_cell} seeds, methods={[m.value for m in config.methods]}")

        def job(indices: Tuple[int, int]) -> Dict[EstimationMethod, Tuple[List[float], List[str]]]:
            h_idx, n_idx = indices
            hurst, n = config.h_list[h_idx], config.n_list[n_idx]
            results = {m: ([], []) for m in config.methods}
            for rep in range(config.seeds_per_cell):
                try:
                    spec = GeneratorSpec(n=n, hurst=hurst, mode=config.mode,
                                         seed=cell_seed(config.master_seed, h_idx, n_idx, rep))
                    series = gen_lrd(spec, config.tau0)
                except (MavarError, ValueError) as e:
                    for method in config.methods:
                        results[method][1].append(f"generation failed: {e}")
                    continue
                for method in config.methods:
                    try:
                        results[method][0].append(self._estimate(series, method))
                    except (MavarError, ValueError) as e:
                        results[method][1].append(f"{method.value} failed: {e}")
            logger.debug(f"[Experiment Service] accuracy cell H={hurst} N={n} done")
            return results

        grid = [(h_idx, n_idx) for h_idx in range(len(config.h_list)) for n_idx in range(len(config.n_list))]
        outputs = dict(zip(grid, self._run_jobs(job, grid, config.workers)))

        cells = []
        for h_idx, hurst in enumerate(config.h_list):
            for n_idx, n in enumerate(config.n_list):
                for method in config.methods:
                    estimates, errors = outputs[(h_idx, n_idx)][method]
                    deltas = [est - hurst for est in estimates]
                    base = {"method": method, "h_true": hurst, "n": n}
                    cells.append(self._aggregate(base, estimates, deltas, errors, config.seeds_per_cell))

        self._log_summary(ExperimentKind.ACCURACY, cells, started)
        return ExperimentReport(kind=ExperimentKind.ACCURACY, cells=cells, metadata=self._metadata(config, started))

    # ========================================================================
    # Convergence with N
    # ========================================================================

    def run_convergence_experiment(self, config: ExperimentConfig) -> ExperimentReport:
        """
        Error of the estimate on prefixes of one generated series per seed

        Each seed generates config.source_length samples once; every N of
        n_list is a prefix of it. An N beyond the generated length is a
        failed cell.
        """
        started = time.perf_counter()
        source_n = config.source_length
        logger.info(f"[Experiment Service] convergence: H={config.h_list}, lengths={config.n_list}, "
                    f"source N={source_n}, {config.seeds_per_cell} seeds")

        def job(indices: Tuple[int, int]) -> Dict[Tuple[int, EstimationMethod], Tuple[Optional[float], str]]:
            h_idx, rep = indices
            results = {}
            try:
                spec = GeneratorSpec(n=source_n, hurst=config.h_list[h_idx], mode=config.mode,
                                     seed=cell_seed(config.master_seed, h_idx, 0, rep))
                source = gen_lrd(spec, config.tau0)
            except (MavarError, ValueError) as e:
                return {(n_idx, m): (None, f"generation failed: {e}")
                        for n_idx in range(len(config.n_list)) for m in config.methods}
            for n_idx, n in enumerate(config.n_list):
                for method in config.methods:
                    if n > source.n_samples:
                        results[(n_idx, method)] = (None, f"truncation N={n} exceeds generated N={source.n_samples}")
                        continue
                    try:
                        prefix = source.with_samples(source.samples[:n])
                        results[(n_idx, method)] = (self._estimate(prefix, method), "")
                    except (MavarError, ValueError) as e:
                        results[(n_idx, method)] = (None, f"{method.value} failed: {e}")
            return results

        grid = [(h_idx, rep) for h_idx in range(len(config.h_list)) for rep in range(config.seeds_per_cell)]
        outputs = dict(zip(grid, self._run_jobs(job, grid, config.workers)))

        cells = []
        for h_idx, hurst in enumerate(config.h_list):
            for n_idx, n in enumerate(config.n_list):
                for method in config.methods:
                    estimates, errors = [], []
                    for rep in range(config.seeds_per_cell):
                        value, message = outputs[(h_idx, rep)][(n_idx, method)]
                        if value is None:
                            errors.append(message)
                        else:
                            estimates.append(value)
                    deltas = [est - hurst for est in estimates]
                    base = {"method": method, "h_true": hurst, "n": n}
                    cells.append(self._aggregate(base, estimates, deltas, errors, config.seeds_per_cell))

        self._log_summary(ExperimentKind.CONVERGENCE, cells, started)
        extra = {"source_length": source_n,
                 "length_mapping": {"requested_range": [1000, 50000], "power_of_two_lengths": config.n_list}}
        return ExperimentReport(kind=ExperimentKind.CONVERGENCE, cells=cells,
                                metadata=self._metadata(config, started, extra))

    # ========================================================================
    # Step robustness
    # ========================================================================

    def run_step_robustness(self, config: ExperimentConfig) -> ExperimentReport:
        """
        Shift of the H estimate caused by a step A u(k - M) added to the noise

        The noise of replicate r is shared by every (A, M) of its (H, N)
        cell, so the shift is measured against that replicate's own clean
        estimate and A = 0 gives exactly zero. The first replicate also
        yields the full MAVAR curve of every contamination for plotting.
        """
        started = time.perf_counter()
        logger.info(f"[Experiment Service] step sweep: H={config.h_list}, N={config.n_list}, "
                    f"A={config.step_amplitudes}, M/N={config.step_delays}, {config.seeds_per_cell} seeds")
        sweep = [(a_idx, d_idx) for a_idx in range(len(config.step_amplitudes))
                 for d_idx in range(len(config.step_delays))]

        def job(indices: Tuple[int, int, int]):
            h_idx, n_idx, rep = indices
            n = config.n_list[n_idx]
            results: Dict[Tuple[int, int, EstimationMethod], Tuple[Optional[float], Optional[float], str]] = {}
            curves: Dict[str, MavarCurve] = {}
            try:
                spec = GeneratorSpec(n=n, hurst=config.h_list[h_idx], mode=config.mode,
                                     seed=cell_seed(config.master_seed, h_idx, n_idx, rep))
                clean = gen_lrd(spec, config.tau0)
            except (MavarError, ValueError) as e:
                failed = (None, None, f"generation failed: {e}")
                return {(a, d, m): failed for a, d in sweep for m in config.methods}, curves

            baseline: Dict[EstimationMethod, Tuple[Optional[float], str]] = {}
            for method in config.methods:
                try:
                    baseline[method] = (self._estimate(clean, method), "")
                except (MavarError, ValueError) as e:
                    baseline[method] = (None, f"{method.value} failed on clean series: {e}")

            for a_idx, d_idx in sweep:
                amplitude = config.step_amplitudes[a_idx]
                delay = int(round(config.step_delays[d_idx] * n))
                try:
                    contaminated = clean if amplitude == 0.0 else apply_contaminant(
                        clean, Contaminant(kind=ContaminantKind.STEP, a=amplitude, m=delay))
                except (MavarError, ValueError) as e:
                    for method in config.methods:
                        results[(a_idx, d_idx, method)] = (None, None, f"step failed: {e}")
                    continue
                if rep == 0:
                    try:
                        curves[f"H{config.h_list[h_idx]:g}_N{n}_A{amplitude:g}_M{delay}"] = mavar_curve(
                            contaminated, ratio=self.ratio)
                    except (MavarError, ValueError) as e:
                        logger.warning(f"[Experiment Service] plot curve skipped: {e}")
                for method in config.methods:
                    clean_value, message = baseline[method]
                    if clean_value is None:
                        results[(a_idx, d_idx, method)] = (None, None, message)
                        continue
                    if contaminated is clean:
                        results[(a_idx, d_idx, method)] = (clean_value, 0.0, "")
                        continue
                    try:
                        value = self._estimate(contaminated, method)
                        results[(a_idx, d_idx, method)] = (value, value - clean_value, "")
                    except (MavarError, ValueError) as e:
                        results[(a_idx, d_idx, method)] = (None, None, f"{method.value} failed: {e}")
            return results, curves

        grid = [(h_idx, n_idx, rep) for h_idx in range(len(config.h_list))
                for n_idx in range(len(config.n_list)) for rep in range(config.seeds_per_cell)]
        outputs = dict(zip(grid, self._run_jobs(job, grid, config.workers)))

        cells = []
        curves: Dict[str, MavarCurve] = {}
        for h_idx, hurst in enumerate(config.h_list):
            for n_idx, n in enumerate(config.n_list):
                curves.update(outputs[(h_idx, n_idx, 0)][1])
                for a_idx, d_idx in sweep:
                    for method in config.methods:
                        estimates, shifts, errors = [], [], []
                        for rep in range(config.seeds_per_cell):
                            value, shift, message = outputs[(h_idx, n_idx, rep)][0][(a_idx, d_idx, method)]
                            if value is None:
                                errors.append(message)
                            else:
                                estimates.append(value)
                                shifts.append(shift)
                        frac = config.step_delays[d_idx]
                        base = {"method": method, "h_true": hurst, "n": n,
                                "amplitude": config.step_amplitudes[a_idx], "delay_frac": frac,
                                "delay": int(round(frac * n))}
                        cells.append(self._aggregate(base, estimates, shifts, errors, config.seeds_per_cell))

        self._log_summary(ExperimentKind.STEP_ROBUSTNESS, cells, started)
        extra = {"fit_n_hi": {str(n): tail_limit(n, self.tail_divisor) for n in config.n_list}}
        return ExperimentReport(kind=ExperimentKind.STEP_ROBUSTNESS, cells=cells,
                                metadata=self._metadata(config, started, extra), curves=curves)
