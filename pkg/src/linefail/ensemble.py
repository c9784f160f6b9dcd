"""Run the conductor simulator over collocation grids or Monte Carlo samples."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import stochastic as st
from .simulator import RunConfig, RunResult, failure_indicator, get_param, run


@dataclass
class Realization:
    """The parts of a run the statistics need; keeps inter-process traffic small."""

    params: Dict[str, float]
    max_theta: np.ndarray
    h: np.ndarray
    theta_snapshots: Dict[int, np.ndarray]
    failure_step: Optional[int]


def _realize(args) -> Realization:
    base, values = args
    res: RunResult = run(base.with_params(values))
    return Realization(
        params=dict(values),
        max_theta=res.max_theta,
        h=failure_indicator(res),
        theta_snapshots={k: s.theta for k, s in res.snapshots.items()},
        failure_step=res.failure_step,
    )


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))


def run_realizations(base: RunConfig, points: Sequence[Dict[str, float]], workers: Optional[int] = None) -> List[Realization]:
    """Evaluate the simulator at each parameter set; output order matches ``points``."""
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = [(base, p) for p in points]
    if workers == 1 or len(jobs) < 2:
        return [_realize(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_realize, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


@dataclass
class EnsembleResult:
    mode: str  # "PCM" or "MC"
    names: List[str]
    realizations: List[Realization]
    dt: float
    n_steps: int
    grid: Optional[st.CollocationGrid] = None
    snapshot_every: int = 500
    stats: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.realizations)

    @property
    def horizon(self) -> int:
        """Common number of steps: the earliest failure across the ensemble."""
        return min(r.max_theta.size for r in self.realizations)

    @property
    def truncated_time(self) -> np.ndarray:
        return self.dt * np.arange(1, self.horizon + 1)

    @property
    def full_time(self) -> np.ndarray:
        return self.dt * np.arange(1, self.n_steps + 1)

    def theta_max_matrix(self) -> np.ndarray:
        m = self.horizon
        return np.array([r.max_theta[:m] for r in self.realizations])

    def h_matrix(self) -> np.ndarray:
        return np.array([r.h for r in self.realizations])

    def field_steps(self) -> List[int]:
        """Snapshot steps available in every realization (inside the common horizon)."""
        common = set(self.realizations[0].theta_snapshots)
        for r in self.realizations[1:]:
            common &= set(r.theta_snapshots)
        return sorted(k for k in common if k <= self.horizon)

    def theta_field_matrix(self, step: int) -> np.ndarray:
        return np.array([r.theta_snapshots[step] for r in self.realizations])

    def failure_steps(self) -> List[Optional[int]]:
        return [r.failure_step for r in self.realizations]

    def _mean_std(self, q):
        if self.mode == "PCM":
            m = st.expectation(self.grid, q)
            return m, st.std_dev(self.grid, q)
        return st.sample_stats(q)

    def compute_statistics(self) -> Dict[str, np.ndarray]:
        q = self.theta_max_matrix()
        mean, std = self._mean_std(q)
        h = self.h_matrix()
        if self.mode == "PCM":
            pf = st.probability_of_failure(self.grid, h)
            sobol = st.sobol_first_order(self.grid, q)
        else:
            pf = np.clip(h.mean(axis=0), 0.0, 1.0)
            sobol = None
        stats = {"t": self.truncated_time, "E_theta_max": mean, "std_theta_max": std, "pf": pf, "t_full": self.full_time}
        if sobol is not None:
            stats["sobol"] = sobol
        for k in self.field_steps():
            fm, fs = self._mean_std(self.theta_field_matrix(k))
            stats[f"field_E_{k}"] = fm
            stats[f"field_std_{k}"] = fs
        self.stats = stats
        return stats

    def field_stats(self) -> Dict[int, tuple]:
        if not self.stats:
            self.compute_statistics()
        return {k: (self.stats[f"field_E_{k}"], self.stats[f"field_std_{k}"]) for k in self.field_steps()}


def run_pcm(base: RunConfig, params: Sequence[st.RandomParam], n_per_dim: int = 5, workers: Optional[int] = None) -> EnsembleResult:
    if len(params) > st.MAX_TENSOR_DIMS:
        raise ValueError(
            f"{len(params)} random parameters requested; the full tensor grid is limited to "
            f"{st.MAX_TENSOR_DIMS} dimensions ({n_per_dim}**{len(params)} runs otherwise)"
        )
    grid = st.CollocationGrid(params, n_per_dim)
    reals = run_realizations(base, grid.realizations(), workers)
    ens = EnsembleResult("PCM", grid.names, reals, base.dt, base.n_steps, grid=grid, snapshot_every=base.snapshot_every)
    ens.compute_statistics()
    return ens


def run_mc(base: RunConfig, params: Sequence[st.RandomParam], n_samples: int, seed: int, workers: Optional[int] = None) -> EnsembleResult:
    samples = st.sample_uniform(params, n_samples, seed)
    names = [p.name for p in params]
    points = [dict(zip(names, map(float, s))) for s in samples]
    reals = run_realizations(base, points, workers)
    ens = EnsembleResult("MC", names, reals, base.dt, base.n_steps, snapshot_every=base.snapshot_every)
    ens.compute_statistics()
    return ens


def random_params_at(base: RunConfig, names: Sequence[str], fraction: float = 0.10) -> List[st.RandomParam]:
    """Uniform +/- ``fraction`` ranges centred on the config's current values."""
    return [st.RandomParam(n, float(get_param(base, n)), fraction) for n in names]
