"""Grid domain model: shapes, pixel indexing, neighborhood enumeration.

Pixels of a 2D or 3D grid are addressed by a row-major linear index in
[0, n).  All other modules rely on this single linearization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SUPPORTED_KERNELS = (3, 5, 7, 9)

SEED_NONE = 0
SEED_BG = 1
SEED_FG = 2


@dataclass(frozen=True)
class GridShape:
    """Dimensions of a 2D or 3D pixel grid."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise ValueError(f"grid must be 2D or 3D, got {len(dims)} axes")
        if any(d < 1 for d in dims):
            raise ValueError(f"all grid dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        p = 1
        for d in self.dims:
            p *= d
        return p

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def strides(self) -> tuple:
        """Row-major strides: index = sum(coord[a] * strides[a])."""
        s = [1] * len(self.dims)
        for a in range(len(self.dims) - 2, -1, -1):
            s[a] = s[a + 1] * self.dims[a + 1]
        return tuple(s)


def index_of(shape: GridShape, coords) -> int:
    """Row-major linear index of a coordinate tuple."""
    coords = tuple(int(c) for c in coords)
    if len(coords) != shape.ndim:
        raise ValueError(f"expected {shape.ndim} coordinates, got {len(coords)}")
    idx = 0
    for c, d, s in zip(coords, shape.dims, shape.strides):
        if not 0 <= c < d:
            raise ValueError(f"coordinate {coords} out of range for dims {shape.dims}")
        idx += c * s
    return idx


def coords_of(shape: GridShape, i: int) -> tuple:
    """Coordinates of linear index ``i`` (inverse of :func:`index_of`)."""
    i = int(i)
    if not 0 <= i < shape.n:
        raise ValueError(f"index {i} out of range [0, {shape.n})")
    out = []
    for s in shape.strides:
        out.append(i // s)
        i %= s
    return tuple(out)


@lru_cache(maxsize=None)
def kernel_offsets(ndim: int, kernel: int) -> tuple:
    """Coordinate offsets of the neighborhood window, excluding the center.

    2D uses the full square window of side ``kernel``; 3D keeps only
    offsets within Euclidean distance kernel/2 (a discrete ball).  The
    offset set is symmetric under negation, which makes the neighbor
    relation symmetric.
    """
    if kernel not in SUPPORTED_KERNELS:
        raise ValueError(f"unsupported kernel size {kernel}, expected one of {SUPPORTED_KERNELS}")
    h = (kernel - 1) // 2
    rng = range(-h, h + 1)
    offsets = []
    if ndim == 2:
        for dr in rng:
            for dc in rng:
                if (dr, dc) != (0, 0):
                    offsets.append((dr, dc))
    elif ndim == 3:
        r2 = (kernel / 2.0) ** 2
        for dx in rng:
            for dy in rng:
                for dz in rng:
                    if (dx, dy, dz) == (0, 0, 0):
                        continue
                    if dx * dx + dy * dy + dz * dz <= r2:
                        offsets.append((dx, dy, dz))
    else:
        raise ValueError(f"unsupported dimensionality {ndim}")
    return tuple(offsets)


def half_kernel_offsets(ndim: int, kernel: int) -> tuple:
    """Lexicographically positive half of the offsets (one per pixel pair)."""
    return tuple(o for o in kernel_offsets(ndim, kernel) if o > tuple([0] * ndim))


def neighbors(shape: GridShape, i: int, kernel: int) -> list:
    """All pixels within the kernel window of ``i``, clipped at borders."""
    base = coords_of(shape, i)
    out = []
    for off in kernel_offsets(shape.ndim, kernel):
        c = tuple(b + o for b, o in zip(base, off))
        if all(0 <= cc < d for cc, d in zip(c, shape.dims)):
            out.append(index_of(shape, c))
    out.sort()
    return out


@dataclass
class GridImage:
    """A grid of per-pixel feature vectors plus an optional seed mask.

    data is an (n, channels) float array with values in [0, 1].  seeds,
    when present, is an n-vector over {SEED_NONE, SEED_BG, SEED_FG}.
    """

    shape: GridShape
    data: np.ndarray
    seeds: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim == 1:
            self.data = self.data[:, None]
        if self.data.shape[0] != self.shape.n:
            raise ValueError(
                f"data has {self.data.shape[0]} rows, expected n={self.shape.n}")
        if self.data.shape[1] < 1:
            raise ValueError("image needs at least one channel")
        if self.seeds is not None:
            self.seeds = np.asarray(self.seeds, dtype=np.int8)
            if self.seeds.shape != (self.shape.n,):
                raise ValueError(
                    f"seed vector has shape {self.seeds.shape}, expected ({self.shape.n},)")
            bad = ~np.isin(self.seeds, (SEED_NONE, SEED_BG, SEED_FG))
            if bad.any():
                raise ValueError("seed vector contains values outside {0, 1, 2}")

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def n(self) -> int:
        return self.shape.n
