"""Pluggable block solvers: max-flow, exhaustive enumeration, greedy flips.

Every solver minimizes the same objective over binary labelings,

    linear . y + lam * sum_{i<j} w_ij (y_i - y_j)^2,

so the consensus loop can distribute whichever optimizer fits the weight
structure: max-flow for non-negative weights, local search otherwise,
enumeration as the exact small-instance oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import icm_sweep as _icm_sweep_kernel
from .energy import SparseWeights
from .maxflow import solve_binary

EXHAUSTIVE_MAX_VARS = 24


@dataclass(frozen=True)
class BlockSolverKind:
    """Solver selector plus local-search options."""

    kind: str
    max_sweeps: int = 100
    restarts: int = 1

    def __post_init__(self):
        if self.kind not in ("maxflow", "exhaustive", "icm"):
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.max_sweeps < 1 or self.restarts < 1:
            raise ValueError("max_sweeps and restarts must be positive")


MAXFLOW = BlockSolverKind("maxflow")
EXHAUSTIVE = BlockSolverKind("exhaustive")
ICM = BlockSolverKind("icm")


def pairwise_energy(linear: np.ndarray, pairwise: SparseWeights, lam: float,
                    labels: np.ndarray) -> float:
    """Objective value of one binary labeling."""
    y = np.asarray(labels, dtype=np.float64)
    quad = float(np.dot(pairwise.vals, (y[pairwise.rows] - y[pairwise.cols]) ** 2))
    return float(np.dot(np.asarray(linear, dtype=np.float64), y)) + lam * quad


def exhaustive_minimize(linear: np.ndarray, pairwise: SparseWeights, lam: float):
    """Exact minimum by enumerating all 2^m labelings.

    Codes are scanned ascending with variable 0 as the most significant
    bit, so ties resolve to the lexicographically smallest labeling.
    """
    linear = np.asarray(linear, dtype=np.float64)
    m = linear.size
    if m > EXHAUSTIVE_MAX_VARS:
        raise ValueError(f"exhaustive solver limited to {EXHAUSTIVE_MAX_VARS} variables, got {m}")
    if m == 0:
        return np.zeros(0, dtype=np.int8), 0.0
    shifts = (m - 1) - np.arange(m)
    best_energy = np.inf
    best_code = 0
    # keep the enumeration buffers around a few tens of MB
    chunk = max(1024, (1 << 22) // max(m, pairwise.npairs, 1))
    for start in range(0, 1 << m, chunk):
        codes = np.arange(start, min(start + chunk, 1 << m), dtype=np.int64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        e = bits @ linear
        if pairwise.npairs:
            diff = bits[:, pairwise.rows] - bits[:, pairwise.cols]
            e += lam * (diff * diff) @ pairwise.vals
        k = int(np.argmin(e))
        if e[k] < best_energy:
            best_energy = float(e[k])
            best_code = int(codes[k])
    labels = ((best_code >> shifts) & 1).astype(np.int8)
    return labels, best_energy


def icm_sweep(labels: np.ndarray, linear: np.ndarray, pairwise: SparseWeights,
              lam: float):
    """One greedy pass over the variables; returns (labels, improved)."""
    labels = np.ascontiguousarray(np.asarray(labels, dtype=np.uint8))
    indptr, indices, data = pairwise.adjacency()
    flips = _icm_sweep_kernel(labels, np.ascontiguousarray(linear, dtype=np.float64),
                              np.ascontiguousarray(indptr, dtype=np.int32),
                              np.ascontiguousarray(indices, dtype=np.int32),
                              np.ascontiguousarray(data, dtype=np.float64), float(lam))
    return labels.astype(np.int8), flips > 0


def _icm_descend(init: np.ndarray, linear: np.ndarray, pairwise: SparseWeights,
                 lam: float, max_sweeps: int):
    labels = np.ascontiguousarray(np.asarray(init, dtype=np.uint8))
    indptr, indices, data = pairwise.adjacency()
    indptr = np.ascontiguousarray(indptr, dtype=np.int32)
    indices = np.ascontiguousarray(indices, dtype=np.int32)
    data = np.ascontiguousarray(data, dtype=np.float64)
    lin = np.ascontiguousarray(linear, dtype=np.float64)
    for _ in range(max_sweeps):
        if _icm_sweep_kernel(labels, lin, indptr, indices, data, float(lam)) == 0:
            break
    return labels.astype(np.int8)


def solve_block(kind: BlockSolverKind, linear: np.ndarray, pairwise: SparseWeights,
                lam: float, init: np.ndarray | None = None) -> np.ndarray:
    """Dispatch one block instance to the selected solver.

    init seeds the local-search solver (all-zeros when absent) and is
    ignored by the exact solvers.
    """
    linear = np.asarray(linear, dtype=np.float64)
    m = linear.size
    if pairwise.n != m:
        raise ValueError("pairwise.n must match linear length")
    if kind.kind == "maxflow":
        labels, _ = solve_binary(linear, pairwise, lam)
        return labels
    if kind.kind == "exhaustive":
        labels, _ = exhaustive_minimize(linear, pairwise, lam)
        return labels
    # icm
    if init is None:
        init = np.zeros(m, dtype=np.int8)
    init = np.asarray(init, dtype=np.int8)
    if init.shape != (m,):
        raise ValueError("init length must match linear length")
    starts = [init]
    for extra in (np.zeros(m, dtype=np.int8), np.ones(m, dtype=np.int8),
                  (1 - init).astype(np.int8)):
        if len(starts) >= kind.restarts:
            break
        if not any(np.array_equal(extra, s) for s in starts):
            starts.append(extra)
    best, best_e = None, np.inf
    for s in starts[: kind.restarts]:
        cand = _icm_descend(s, linear, pairwise, lam, kind.max_sweeps)
        e = pairwise_energy(linear, pairwise, lam, cand)
        if e < best_e:
            best, best_e = cand, e
    return best
