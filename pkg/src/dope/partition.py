"""Overlapping block decomposition of the grid and the gather/scatter operators.

A block is an axis-aligned box; its selection operator is represented as a
gather map (the sorted global indices of its pixels), never as a matrix.
The per-pixel block count vector plays the role of the diagonal count
matrix: dividing an accumulated scatter by it averages overlapping labels,
which recovers any consistent global labeling exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .grid import GridShape

OVERLAP_CHOICES = (0, 10, 25)


@dataclass(frozen=True)
class Block:
    """One axis-aligned box of the partition."""

    id: int
    extent: tuple          # per-axis (lo, hi) half-open ranges
    pixels: np.ndarray     # sorted global pixel indices, the gather map

    @property
    def size(self) -> int:
        return self.pixels.size


@dataclass(frozen=True)
class Partition:
    """K blocks covering the grid, plus per-pixel membership counts."""

    shape: GridShape
    blocks: tuple
    counts: np.ndarray

    @property
    def k(self) -> int:
        return len(self.blocks)

    def mean_block_size(self) -> float:
        return float(np.mean([b.size for b in self.blocks]))


def _box_pixels(shape: GridShape, extent) -> np.ndarray:
    """Row-major linearization of a box; ascending by construction."""
    axes = [np.arange(lo, hi) for lo, hi in extent]
    grids = np.meshgrid(*axes, indexing="ij")
    lin = np.zeros([hi - lo for lo, hi in extent], dtype=np.int64)
    for g, s in zip(grids, shape.strides):
        lin += g * s
    return lin.ravel()


def _axis_ranges(dim: int, k: int, overlap_pct: int) -> list:
    """Split [0, dim) into k near-equal ranges, then grow each side for overlap."""
    if k > dim:
        raise ValueError(f"cannot split axis of size {dim} into {k} ranges")
    base, rem = divmod(dim, k)
    ranges = []
    lo = 0
    for r in range(k):
        length = base + (1 if r < rem else 0)
        if length == 0:
            raise ValueError("zero-length axis range")
        hi = lo + length
        grow = math.ceil(overlap_pct / 100.0 * length / 2.0)
        ranges.append((max(0, lo - grow), min(dim, hi + grow)))
        lo = hi
    return ranges


def make_partition(shape: GridShape, k_per_axis, overlap_pct: int = 0) -> Partition:
    """Split the grid into a box lattice of prod(k_per_axis) blocks.

    Each axis is cut into contiguous near-equal ranges (remainder going to
    the first ranges); every range is then grown by
    ceil(overlap_pct/100 * base_length / 2) on each side, clipped at the
    border.  Every pixel lands in at least one block by construction.
    """
    k_per_axis = tuple(int(k) for k in k_per_axis)
    if len(k_per_axis) != shape.ndim:
        raise ValueError(f"expected {shape.ndim} block counts, got {len(k_per_axis)}")
    if any(k < 1 for k in k_per_axis):
        raise ValueError("block counts must be positive")
    if overlap_pct not in OVERLAP_CHOICES:
        raise ValueError(f"overlap_pct must be one of {OVERLAP_CHOICES}")
    total_k = 1
    for k in k_per_axis:
        total_k *= k
    if total_k > shape.n:
        raise ValueError(f"more blocks ({total_k}) than pixels ({shape.n})")
    per_axis = [_axis_ranges(d, k, overlap_pct) for d, k in zip(shape.dims, k_per_axis)]
    blocks = []
    counts = np.zeros(shape.n, dtype=np.int64)
    for bid, extent in enumerate(itertools.product(*per_axis)):
        pixels = _box_pixels(shape, extent)
        counts[pixels] += 1
        blocks.append(Block(bid, tuple(extent), pixels))
    assert counts.min() >= 1
    return Partition(shape, tuple(blocks), counts)


def near_isotropic_factors(k_total: int, dims) -> tuple:
    """Factor a flat block count into per-axis counts giving near-cubic blocks.

    Enumerates every ordered factorization (block counts are small) and
    keeps the one whose block side lengths are most balanced; ties break
    to the lexicographically smallest tuple.
    """
    dims = tuple(int(d) for d in dims)
    k_total = int(k_total)
    if k_total < 1:
        raise ValueError("block count must be positive")

    def factorizations(remaining, axes):
        if axes == 1:
            if remaining <= dims[len(dims) - 1]:
                yield (remaining,)
            return
        axis = len(dims) - axes
        for f in range(1, min(remaining, dims[axis]) + 1):
            if remaining % f == 0:
                for rest in factorizations(remaining // f, axes - 1):
                    yield (f,) + rest

    best, best_score = None, None
    for cand in factorizations(k_total, len(dims)):
        sides = [d / f for d, f in zip(dims, cand)]
        score = max(sides) / min(sides)
        if best is None or score < best_score - 1e-12 or \
                (abs(score - best_score) <= 1e-12 and cand < best):
            best, best_score = cand, score
    if best is None:
        raise ValueError(f"cannot place {k_total} blocks on dims {dims}")
    return best


def select(block: Block, v: np.ndarray) -> np.ndarray:
    """Gather a global vector at the block's pixels."""
    v = np.asarray(v)
    if block.pixels.size and v.shape[0] <= block.pixels[-1]:
        raise ValueError("vector too short for this block")
    return v[block.pixels]


def scatter_add(block: Block, w: np.ndarray, acc: np.ndarray) -> np.ndarray:
    """Add a block-local vector into a global accumulator at the block's pixels."""
    w = np.asarray(w)
    if w.shape != (block.size,):
        raise ValueError(f"block vector has shape {w.shape}, expected ({block.size},)")
    acc[block.pixels] += w
    return acc


def reconstruct(partition: Partition, block_labels) -> np.ndarray:
    """Per-pixel mean of block labelings: the count-weighted scatter average."""
    acc = np.zeros(partition.shape.n)
    for block, lab in zip(partition.blocks, block_labels):
        scatter_add(block, np.asarray(lab, dtype=np.float64), acc)
    return acc / partition.counts
