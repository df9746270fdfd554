"""Consensus loop: parallel block solves, closed-form global update, multipliers.

Each iteration solves every block subproblem independently (optionally on a
worker pool), recombines the block labelings into a relaxed global labeling
by a count-weighted average corrected for cross-block couplings, then updates
the per-block multipliers with the remaining disagreement and grows the
penalty.  The loop stops once every block agrees with the gathered global
labeling to within eps, or after max_iters (returning the best iterate seen,
flagged as unconverged).
"""

from __future__ import annotations

import math
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blockform import assemble_block_problems, block_objective
from .energy import EnergyModel, evaluate_energy
from .partition import Partition, scatter_add, select
from .solvers import MAXFLOW, BlockSolverKind, solve_block


class BlockSolveError(RuntimeError):
    """A block solver failed; carries the block id."""

    def __init__(self, block_id: int, cause: BaseException):
        super().__init__(f"solver failed on block {block_id}: {cause}")
        self.block_id = block_id


@dataclass
class AdmmConfig:
    """Loop parameters.  mu0 and eps resolve per instance when left None.

    mu0 defaults to 100 on 2D grids and 500 on 3D grids; eps defaults to
    1e-3 * sqrt(mean block size) so the per-block residual guard scales
    with block dimension.
    """

    mu0: float | None = None
    mu_fact: float = 1.05
    eps: float | None = None
    max_iters: int = 50
    solver: BlockSolverKind = MAXFLOW
    threads: int = 1

    def __post_init__(self):
        if self.mu0 is not None and self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if self.mu_fact < 1:
            raise ValueError("mu_fact must be >= 1")
        if self.eps is not None and self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def resolved_mu0(self, ndim: int) -> float:
        if self.mu0 is not None:
            return float(self.mu0)
        return 500.0 if ndim == 3 else 100.0

    def resolved_eps(self, partition: Partition) -> float:
        if self.eps is not None:
            return float(self.eps)
        return 1e-3 * math.sqrt(partition.mean_block_size())


@dataclass
class TraceRecord:
    """One iteration of the loop, as reported to the CLI trace."""

    iteration: int
    mu: float
    energy: float                # global objective on the relaxed labeling
    residual_sq: float           # sum over blocks of ||yhat_k - S_k y||^2
    max_block_residual: float    # max over blocks of ||yhat_k - S_k y||
    wall_ms: float
    clamped: bool                # whether the [0,1] clamp was active


@dataclass
class AdmmState:
    """Mutable state of one run."""

    y: np.ndarray
    block_labels: list
    multipliers: list
    mu: float
    iteration: int = 0
    converged: bool = False
    best_iteration: int = 0
    clamped_last: bool = False
    trace: list = field(default_factory=list)


def init_state(partition: Partition, mu0: float) -> AdmmState:
    """Relaxed labeling at one half, zero multipliers, zero block labels."""
    n = partition.shape.n
    return AdmmState(
        y=np.full(n, 0.5),
        block_labels=[np.zeros(b.size, dtype=np.int8) for b in partition.blocks],
        multipliers=[np.zeros(b.size) for b in partition.blocks],
        mu=float(mu0),
    )


def update_blocks(state: AdmmState, problems: list, lam: float,
                  config: AdmmConfig) -> AdmmState:
    """Re-solve every block against the current relaxed labeling, in parallel."""

    def solve_one(k: int) -> np.ndarray:
        bp = problems[k]
        linear, pairwise, scale = block_objective(
            bp, state.y, state.multipliers[k], state.mu, lam)
        try:
            return solve_block(config.solver, linear, pairwise, scale,
                               init=state.block_labels[k])
        except Exception as exc:
            raise BlockSolveError(k, exc) from exc

    k_total = len(problems)
    if config.threads > 1 and k_total > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            state.block_labels = list(pool.map(solve_one, range(k_total)))
    else:
        state.block_labels = [solve_one(k) for k in range(k_total)]
    return state


def solve_global(problems: list, partition: Partition, block_labels: list,
                 multipliers: list, mu: float, lam: float) -> np.ndarray:
    """Unclamped closed-form minimizer of the consensus-plus-coupling objective.

    y = (1/mu) Q^-1 sum_k [ mu S_k'(yhat_k + a_k) - lam (C_k + R_k S_k)' yhat_k ]
    where Q is the diagonal block-count matrix.
    """
    if mu <= 0:
        raise ValueError("global update requires mu > 0")
    acc = np.zeros(partition.shape.n)
    for bp, yhat, a in zip(problems, block_labels, multipliers):
        yhat = np.asarray(yhat, dtype=np.float64)
        scatter_add(bp.block, mu * (yhat + a) - lam * (bp.r_diag * yhat), acc)
        if lam != 0.0 and bp.c_rows.nnz:
            acc -= lam * (bp.c_rows.T @ yhat)
    return acc / (mu * partition.counts)


def consensus_objective(problems: list, partition: Partition, block_labels: list,
                        multipliers: list, mu: float, lam: float,
                        y: np.ndarray) -> float:
    """Value of the objective minimized by solve_global at a given y.

    lam * sum_k yhat_k' (C_k + R_k S_k) y
      + mu/2 * sum_k || S_k y - (yhat_k + a_k) ||^2
    """
    total = 0.0
    for bp, yhat, a in zip(problems, block_labels, multipliers):
        yhat = np.asarray(yhat, dtype=np.float64)
        coupling = bp.c_rows @ y + bp.r_diag * select(bp.block, y)
        total += lam * float(np.dot(yhat, coupling))
        diff = select(bp.block, y) - (yhat + a)
        total += 0.5 * mu * float(np.dot(diff, diff))
    return total


def update_global(state: AdmmState, problems: list, partition: Partition,
                  lam: float) -> AdmmState:
    """Closed-form global step, clamped into [0, 1]."""
    y = solve_global(problems, partition, state.block_labels,
                     state.multipliers, state.mu, lam)
    state.clamped_last = bool((y < 0.0).any() or (y > 1.0).any())
    np.clip(y, 0.0, 1.0, out=y)
    state.y = y
    return state


def update_multipliers(state: AdmmState, partition: Partition,
                       mu_fact: float) -> AdmmState:
    """Standard dual ascent on the consensus constraints, then grow mu."""
    for k, block in enumerate(partition.blocks):
        state.multipliers[k] = state.multipliers[k] + (
            state.block_labels[k] - select(block, state.y))
    state.mu *= mu_fact
    return state


def block_residuals(state: AdmmState, partition: Partition) -> np.ndarray:
    """Per-block Euclidean consensus residuals ||yhat_k - S_k y||."""
    out = np.empty(partition.k)
    for k, block in enumerate(partition.blocks):
        diff = state.block_labels[k] - select(block, state.y)
        out[k] = math.sqrt(float(np.dot(diff, diff)))
    return out


def binarize(y: np.ndarray) -> np.ndarray:
    """Threshold a relaxed labeling at one half; exact ties go to 1."""
    return (np.asarray(y) >= 0.5).astype(np.int8)


def run(model: EnergyModel, partition: Partition, config: AdmmConfig,
        problems: list | None = None):
    """Full distributed minimization of the model over the partition.

    Returns (y_binary, state).  On convergence the returned labeling is the
    thresholded final relaxed labeling; if max_iters runs out first, the
    iterate with the lowest relaxed energy is returned and
    state.converged stays False.
    """
    if problems is None:
        problems = assemble_block_problems(model, partition)
    mu0 = config.resolved_mu0(partition.shape.ndim)
    eps = config.resolved_eps(partition)
    state = init_state(partition, mu0)
    lam = model.lam

    best_energy = np.inf
    best_y = state.y.copy()
    for it in range(1, config.max_iters + 1):
        t0 = _time.perf_counter()
        state.iteration = it
        mu_at_solve = state.mu
        update_blocks(state, problems, lam, config)
        update_global(state, problems, partition, lam)
        res = block_residuals(state, partition)
        energy = evaluate_energy(model, state.y)
        state.trace.append(TraceRecord(
            iteration=it,
            mu=mu_at_solve,
            energy=energy,
            residual_sq=float(np.dot(res, res)),
            max_block_residual=float(res.max()) if res.size else 0.0,
            wall_ms=(_time.perf_counter() - t0) * 1e3,
            clamped=state.clamped_last,
        ))
        if energy < best_energy:
            best_energy = energy
            best_y = state.y.copy()
            state.best_iteration = it
        update_multipliers(state, partition, config.mu_fact)
        if res.size == 0 or res.max() <= eps:
            state.converged = True
            break
    if not state.converged:
        state.y = best_y
    return binarize(state.y), state
