"""Randomized self-checks against independent oracles, exposed to the CLI.

Each suite draws small random instances from a reported seed and verifies a
core identity against a method that does not share code with the production
path: enumeration for min-cut optimality, direct global evaluation for the
block decomposition, gather/average round-trips, and central finite
differences for the global-update stationarity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm import consensus_objective, solve_global
from .blockform import assemble_block_problems, block_objective
from .energy import EnergyModel, SparseWeights, build_potts_weights, evaluate_energy
from .grid import GridImage, GridShape
from .maxflow import solve_binary
from .partition import make_partition, reconstruct, select
from .solvers import exhaustive_minimize, pairwise_energy


@dataclass
class SuiteResult:
    name: str
    trials: int
    failures: int

    @property
    def passed(self) -> bool:
        return self.failures == 0


def random_shape(rng: np.random.Generator, max_dim: int = 8,
                 min_dim: int = 1) -> GridShape:
    return GridShape((int(rng.integers(min_dim, max_dim + 1)),
                      int(rng.integers(min_dim, max_dim + 1))))


def random_weights(rng: np.random.Generator, shape: GridShape,
                   neg_fraction: float = 0.0) -> SparseWeights:
    """Random kernel-3 neighborhood weights, optionally partly negative."""
    img = GridImage(shape, rng.random((shape.n, 1)))
    w = build_potts_weights(img, 3, sigma=0.5, contrast=False)
    vals = rng.random(w.npairs) + 0.05
    if neg_fraction > 0 and w.npairs:
        flip = rng.random(w.npairs) < neg_fraction
        vals = np.where(flip, -vals, vals)
    return SparseWeights(shape.n, w.rows, w.cols, vals,
                         allow_negative=neg_fraction > 0)


def random_model(rng: np.random.Generator, shape: GridShape,
                 neg_fraction: float = 0.0, unary_scale: float = 5.0,
                 lam_max: float = 2.0) -> EnergyModel:
    w = random_weights(rng, shape, neg_fraction)
    u = rng.uniform(-unary_scale, unary_scale, shape.n)
    return EnergyModel(u, w, float(rng.uniform(0.0, lam_max)))


def random_partition(rng: np.random.Generator, shape: GridShape):
    k_per_axis = tuple(int(rng.integers(1, max(2, d // 2 + 1))) for d in shape.dims)
    overlap = int(rng.choice([0, 10, 25]))
    return make_partition(shape, k_per_axis, overlap)


def check_mincut_optimality(seed: int, trials: int = 200) -> SuiteResult:
    """Min-cut labelings must reach the enumerated optimum exactly."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        shape = random_shape(rng, max_dim=4)
        model = random_model(rng, shape)
        labels, _ = solve_binary(model.unary, model.weights, model.lam)
        e = pairwise_energy(model.unary, model.weights, model.lam, labels)
        _, e_best = exhaustive_minimize(model.unary, model.weights, model.lam)
        if not np.isclose(e, e_best, rtol=0.0, atol=1e-9):
            failures += 1
    return SuiteResult("mincut-vs-exhaustive", trials, failures)


def check_block_decomposition(seed: int, trials: int = 200) -> SuiteResult:
    """Sum of block objectives equals the global energy for consistent labels."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        shape = random_shape(rng, max_dim=8)
        model = random_model(rng, shape, neg_fraction=float(rng.choice([0.0, 0.3])))
        partition = random_partition(rng, shape)
        problems = assemble_block_problems(model, partition)
        y = rng.integers(0, 2, shape.n).astype(np.float64)
        total = 0.0
        for bp in problems:
            yhat = select(bp.block, y)
            linear, pairwise, scale = block_objective(
                bp, y, np.zeros(bp.size), 0.0, model.lam)
            total += pairwise_energy(linear, pairwise, scale, yhat)
        e_global = evaluate_energy(model, y)
        if abs(total - e_global) > 1e-9 * (1.0 + abs(e_global)):
            failures += 1
    return SuiteResult("block-decomposition-identity", trials, failures)


def check_reconstruction(seed: int, trials: int = 500) -> SuiteResult:
    """Gathering a labeling into blocks and averaging back must be the identity."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        shape = random_shape(rng, max_dim=8)
        partition = random_partition(rng, shape)
        y = rng.integers(0, 2, shape.n).astype(np.float64)
        rec = reconstruct(partition, [select(b, y) for b in partition.blocks])
        if not np.array_equal(rec, y):
            failures += 1
    return SuiteResult("reconstruction-identity", trials, failures)


def check_global_update(seed: int, trials: int = 50) -> SuiteResult:
    """The closed-form global step must zero the objective gradient."""
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(trials):
        shape = random_shape(rng, max_dim=6, min_dim=2)
        model = random_model(rng, shape)
        partition = random_partition(rng, shape)
        problems = assemble_block_problems(model, partition)
        block_labels = [rng.integers(0, 2, b.size).astype(np.float64)
                        for b in partition.blocks]
        multipliers = [rng.normal(0.0, 0.5, b.size) for b in partition.blocks]
        mu = float(rng.uniform(1.0, 200.0))
        y = solve_global(problems, partition, block_labels, multipliers,
                         mu, model.lam)
        h = 1e-5
        coords = rng.integers(0, shape.n, size=min(10, shape.n))
        scale = 1.0 + mu * partition.counts.max()
        for c in coords:
            yp, ym = y.copy(), y.copy()
            yp[c] += h
            ym[c] -= h
            g = (consensus_objective(problems, partition, block_labels,
                                     multipliers, mu, model.lam, yp)
                 - consensus_objective(problems, partition, block_labels,
                                       multipliers, mu, model.lam, ym)) / (2 * h)
            if abs(g) > 1e-6 * scale:
                failures += 1
                break
    return SuiteResult("global-update-stationarity", trials, failures)


def run_oracle_check(seed: int = 0, trials: int | None = None) -> list:
    """Run every suite; returns the list of SuiteResult."""
    kw = {} if trials is None else {"trials": trials}
    kw_fd = {} if trials is None else {"trials": min(trials, 50)}
    return [
        check_mincut_optimality(seed, **kw),
        check_block_decomposition(seed, **kw),
        check_reconstruction(seed, **kw),
        check_global_update(seed, **kw_fd),
    ]
