"""Probabilistic collocation on tensor Gauss-Legendre grids, plus a Monte Carlo baseline.

Uncertain inputs are independent and uniform.  A quantity of interest is
passed as an array whose first axis runs over the realizations in grid
order (``itertools.product`` over dimensions, last dimension fastest); the
remaining axes (time, space, ...) are carried through every reduction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

MAX_TENSOR_DIMS = 6


class IncompleteEnsembleError(ValueError):
    pass


def _legendre(n: int, x: np.ndarray):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0, p1 = np.ones_like(x), x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, n * (x * p1 - p0) / (x * x - 1.0)


def gauss_nodes(n: int, tol: float = 1e-15, max_iter: int = 100):
    """Gauss-Legendre nodes (ascending) and weights on [-1, 1] by Newton iteration."""
    if not 1 <= n <= 100:
        raise ValueError(f"number of Gauss points must be in [1, 100], got {n}")
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(max_iter):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= tol:
            break
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce the rule's symmetry exactly
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


@dataclass(frozen=True)
class RandomParam:
    name: str
    mean: float
    half_width_fraction: float = 0.10

    def __post_init__(self):
        if not self.half_width_fraction > 0:
            raise ValueError("half_width_fraction must be positive")
        if self.mean == 0:
            raise ValueError(f"parameter {self.name!r}: a relative range needs a non-zero mean")

    @property
    def bounds(self):
        lo = self.mean * (1.0 - self.half_width_fraction)
        hi = self.mean * (1.0 + self.half_width_fraction)
        return (min(lo, hi), max(lo, hi))

    @property
    def density(self) -> float:
        a, b = self.bounds
        return 1.0 / (b - a)

    def from_reference(self, eta):
        a, b = self.bounds
        return a + 0.5 * (b - a) * (np.asarray(eta) + 1.0)


@dataclass(frozen=True)
class CollocationGrid:
    dims: Sequence[RandomParam]
    n_per_dim: int = 5
    ref_nodes: np.ndarray = field(init=False, repr=False)
    ref_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.dims) < 1:
            raise ValueError("a collocation grid needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {names}")
        x, w = gauss_nodes(self.n_per_dim)
        object.__setattr__(self, "dims", tuple(self.dims))
        object.__setattr__(self, "ref_nodes", x)
        object.__setattr__(self, "ref_weights", w)

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> List[str]:
        return [d.name for d in self.dims]

    @property
    def size(self) -> int:
        return self.n_per_dim**self.k

    @property
    def shape(self):
        return (self.n_per_dim,) * self.k

    def nodes(self, j: int) -> np.ndarray:
        """Physical collocation values of dimension ``j``."""
        return self.dims[j].from_reference(self.ref_nodes)

    def jacobian(self, j: int) -> float:
        a, b = self.dims[j].bounds
        return 0.5 * (b - a)

    def dim_weights(self, j: int) -> np.ndarray:
        """Probability weights w_p * rho * J of one dimension (they sum to one)."""
        return self.ref_weights * self.dims[j].density * self.jacobian(j)

    @property
    def index_set(self):
        return list(itertools.product(range(self.n_per_dim), repeat=self.k))

    @property
    def points(self) -> np.ndarray:
        """Physical parameter values, shape (size, k), in grid order."""
        per_dim = [self.nodes(j) for j in range(self.k)]
        return np.array([[per_dim[j][i] for j, i in enumerate(idx)] for idx in self.index_set])

    def realizations(self) -> List[Dict[str, float]]:
        return [dict(zip(self.names, map(float, p))) for p in self.points]

    @property
    def weights(self) -> np.ndarray:
        """Tensor-product probability weights in grid order."""
        w = np.ones(())
        for j in range(self.k):
            w = np.multiply.outer(w, self.dim_weights(j))
        return w.reshape(-1)


def _as_ensemble(grid: CollocationGrid, qoi) -> np.ndarray:
    q = np.asarray(qoi, dtype=float)
    if q.shape[0] != grid.size:
        raise IncompleteEnsembleError(f"expected {grid.size} realizations, got {q.shape[0]}")
    if np.isnan(q).any():
        raise IncompleteEnsembleError("ensemble contains missing (NaN) realizations")
    return q


def expectation(grid: CollocationGrid, qoi) -> np.ndarray:
    q = _as_ensemble(grid, qoi)
    return np.tensordot(grid.weights, q, axes=(0, 0))


def _variance(grid: CollocationGrid, q: np.ndarray) -> np.ndarray:
    # shifting by one realization keeps constant QoIs exactly at zero variance
    d = q - q[0]
    m = np.tensordot(grid.weights, d, axes=(0, 0))
    return np.tensordot(grid.weights, (d - m) ** 2, axes=(0, 0))


def std_dev(grid: CollocationGrid, qoi) -> np.ndarray:
    return np.sqrt(_variance(grid, _as_ensemble(grid, qoi)))


def sobol_first_order(grid: CollocationGrid, qoi, tiny: float = 1e-20) -> np.ndarray:
    """First-order Sobol indices, shape (k, *qoi.shape[1:]).

    Where the total variance is below ``tiny`` the indices are undefined and
    returned as NaN.
    """
    q = _as_ensemble(grid, qoi)
    rest = q.shape[1:]
    qt = q.reshape(grid.shape + rest)
    mean = expectation(grid, q)
    var = _variance(grid, q)
    out = np.empty((grid.k,) + rest)
    for j in range(grid.k):
        x = np.moveaxis(qt, j, 0)
        for i in range(grid.k):
            if i == j:
                continue
            # remaining grid axes keep their order, so the next one is always axis 1
            x = np.einsum("ij...,j->i...", x, grid.dim_weights(i))
        cond = x  # (n, *rest): E[Q | xi_j at each node]
        out[j] = np.tensordot(grid.dim_weights(j), (cond - mean) ** 2, axes=(0, 0))
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(var >= tiny, out / np.where(var >= tiny, var, 1.0), np.nan)
    return s


def probability_of_failure(grid: CollocationGrid, h) -> np.ndarray:
    """Expectation of the absorbing 0/1 failure indicator, clipped to [0, 1]."""
    return np.clip(expectation(grid, h), 0.0, 1.0)


def sample_uniform(params: Sequence[RandomParam], n_samples: int, seed: int) -> np.ndarray:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    bounds = np.array([p.bounds for p in params])
    u = rng.random((n_samples, len(params)))
    return bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])


@dataclass
class MonteCarloResult:
    samples: np.ndarray
    values: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    pf: Optional[np.ndarray] = None


def sample_stats(values):
    values = np.asarray(values, dtype=float)
    mean = values.mean(axis=0)
    std = values.std(axis=0, ddof=1) if values.shape[0] > 1 else np.zeros_like(mean)
    return mean, std


def monte_carlo(
    params: Sequence[RandomParam],
    n_samples: int,
    seed: int,
    model: Callable[[Dict[str, float]], np.ndarray],
    indicator: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> MonteCarloResult:
    """Plain sampling estimate of mean, std and (optionally) failure fraction."""
    samples = sample_uniform(params, n_samples, seed)
    names = [p.name for p in params]
    values = np.array([np.asarray(model(dict(zip(names, map(float, s)))), dtype=float) for s in samples])
    mean, std = sample_stats(values)
    pf = None
    if indicator is not None:
        pf = np.mean([indicator(v) for v in values], axis=0)
    return MonteCarloResult(samples, values, mean, std, pf)


def relative_error(field, field_ref) -> float:
    field = np.asarray(field, dtype=float)
    field_ref = np.asarray(field_ref, dtype=float)
    if field.shape != field_ref.shape:
        raise ValueError(f"shape mismatch {field.shape} vs {field_ref.shape}")
    ref = np.linalg.norm(field_ref)
    if ref == 0.0:
        raise ValueError("reference field has zero norm")
    return float(np.linalg.norm(field - field_ref) / ref)
