"""Global energy construction: pairwise weights, color-model unaries, evaluation.

The objective over binary labels y is  u.y + lambda * sum_{i<j} w_ij (y_i - y_j)^2,
i.e. the quadratic (graph Laplacian) form of a Potts-style model with each
unordered pixel pair counted once.  Relaxed y in [0, 1]^n is accepted by the
evaluator so per-iteration traces of a relaxed labeling can be reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import SEED_BG, SEED_FG, GridImage, half_kernel_offsets


class NonSubmodularError(ValueError):
    """Raised when negative pairwise weights reach a solver that cannot take them."""


@dataclass
class SparseWeights:
    """Symmetric sparse pairwise weights, each unordered pair stored once (i < j).

    Negative entries are rejected unless allow_negative is set; that mode is
    used for non-submodular models and is refused by the max-flow solver.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    allow_negative: bool = False

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int32)
        self.cols = np.asarray(self.cols, dtype=np.int32)
        self.vals = np.asarray(self.vals, dtype=np.float64)
        if not (self.rows.shape == self.cols.shape == self.vals.shape):
            raise ValueError("rows, cols and vals must have equal length")
        if self.rows.size:
            if self.rows.min() < 0 or self.cols.max() >= self.n:
                raise ValueError("pair index out of range")
            if (self.rows == self.cols).any():
                raise ValueError("diagonal entries are not allowed")
            # canonicalize to i < j
            swap = self.rows > self.cols
            if swap.any():
                r = np.where(swap, self.cols, self.rows)
                c = np.where(swap, self.rows, self.cols)
                self.rows, self.cols = r.astype(np.int32), c.astype(np.int32)
            if not np.isfinite(self.vals).all():
                raise ValueError("weights must be finite")
            if not self.allow_negative and (self.vals < 0).any():
                raise NonSubmodularError(
                    "negative pairwise weights require allow_negative=True")

    @property
    def npairs(self) -> int:
        return self.vals.size

    def degrees(self) -> np.ndarray:
        """Row sums of the symmetric weight matrix."""
        d = np.zeros(self.n)
        np.add.at(d, self.rows, self.vals)
        np.add.at(d, self.cols, self.vals)
        return d

    def to_csr(self) -> sp.csr_matrix:
        """Full symmetric matrix (both triangles) as scipy CSR."""
        i = np.concatenate([self.rows, self.cols])
        j = np.concatenate([self.cols, self.rows])
        v = np.concatenate([self.vals, self.vals])
        return sp.csr_matrix((v, (i, j)), shape=(self.n, self.n))

    def adjacency(self):
        """(indptr, indices, data) of the symmetric CSR form, for flip solvers."""
        m = self.to_csr()
        return m.indptr, m.indices, m.data

    def laplacian(self) -> sp.csr_matrix:
        w = self.to_csr()
        d = np.asarray(w.sum(axis=1)).ravel()
        return sp.diags(d).tocsr() - w

    @classmethod
    def from_symmetric(cls, mat, allow_negative: bool = False) -> "SparseWeights":
        """Build from a symmetric (sparse or dense) matrix, keeping i < j entries."""
        coo = sp.coo_matrix(mat)
        scale = 1.0 + (abs(coo).max() if coo.nnz else 0.0)
        if (abs(coo - coo.T) > 1e-12 * scale).nnz:
            raise ValueError("weight matrix is not symmetric")
        keep = coo.row < coo.col
        return cls(coo.shape[0], coo.row[keep], coo.col[keep], coo.data[keep],
                   allow_negative=allow_negative)


@dataclass
class EnergyModel:
    """Unary costs, pairwise weights and the regularization strength."""

    unary: np.ndarray
    weights: SparseWeights
    lam: float

    def __post_init__(self):
        self.unary = np.asarray(self.unary, dtype=np.float64)
        if self.unary.shape != (self.weights.n,):
            raise ValueError("unary length must equal weights.n")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")

    @property
    def n(self) -> int:
        return self.weights.n

    @property
    def nonsubmodular(self) -> bool:
        return bool(self.weights.npairs and (self.weights.vals < 0).any())


def build_potts_weights(image: GridImage, kernel: int, sigma: float,
                        contrast: bool = True) -> SparseWeights:
    """Neighborhood weights on the image grid.

    With contrast on, w_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)); otherwise
    every stored weight is 1.  Pairs are enumerated once per unordered
    neighbor pair, window clipped at the grid border.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    shape = image.shape
    rows_all, cols_all, vals_all = [], [], []
    coord_grids = np.meshgrid(*[np.arange(d) for d in shape.dims], indexing="ij")
    lin = np.zeros(shape.dims, dtype=np.int64)
    for g, s in zip(coord_grids, shape.strides):
        lin += g * s
    for off in half_kernel_offsets(shape.ndim, kernel):
        src = tuple(slice(max(0, -o), d - max(0, o)) for o, d in zip(off, shape.dims))
        dst = tuple(slice(max(0, o), d + min(0, o)) for o, d in zip(off, shape.dims))
        i = lin[src].ravel()
        j = lin[dst].ravel()
        if i.size == 0:
            continue
        if contrast:
            diff = image.data[i] - image.data[j]
            w = np.exp(-np.einsum("ij,ij->i", diff, diff) / (2.0 * sigma * sigma))
        else:
            w = np.ones(i.size)
        rows_all.append(i)
        cols_all.append(j)
        vals_all.append(w)
    if rows_all:
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        vals = np.concatenate(vals_all)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    return SparseWeights(shape.n, rows, cols, vals)


def estimate_sigma(image: GridImage, kernel: int) -> float:
    """RMS feature difference over neighbor pairs; 1.0 for constant images."""
    shape = image.shape
    total, count = 0.0, 0
    coord_grids = np.meshgrid(*[np.arange(d) for d in shape.dims], indexing="ij")
    lin = np.zeros(shape.dims, dtype=np.int64)
    for g, s in zip(coord_grids, shape.strides):
        lin += g * s
    for off in half_kernel_offsets(shape.ndim, kernel):
        src = tuple(slice(max(0, -o), d - max(0, o)) for o, d in zip(off, shape.dims))
        dst = tuple(slice(max(0, o), d + min(0, o)) for o, d in zip(off, shape.dims))
        i, j = lin[src].ravel(), lin[dst].ravel()
        if i.size:
            diff = image.data[i] - image.data[j]
            total += float(np.einsum("ij,ij->", diff, diff))
            count += i.size
    if count == 0:
        return 1.0
    ms = total / count
    return float(np.sqrt(ms)) if ms > 1e-12 else 1.0


def evaluate_energy(model: EnergyModel, y: np.ndarray) -> float:
    """u.y + lambda * sum_{i<j} w_ij (y_i - y_j)^2 for binary or relaxed y."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.n,):
        raise ValueError(f"labeling has shape {y.shape}, expected ({model.n},)")
    w = model.weights
    quad = float(np.dot(w.vals, (y[w.rows] - y[w.cols]) ** 2))
    return float(np.dot(model.unary, y)) + model.lam * quad


# ---------------------------------------------------------------------------
# seed-driven color model


@dataclass
class ColorModel:
    """Per-class mixture of k-means cluster centers fitted on seed pixels."""

    fg_centroids: np.ndarray
    bg_centroids: np.ndarray
    fg_weights: np.ndarray
    bg_weights: np.ndarray
    bandwidth: float

    def __post_init__(self):
        for w in (self.fg_weights, self.bg_weights):
            if w.min() < 0 or abs(w.sum() - 1.0) > 1e-9:
                raise ValueError("mixture weights must be non-negative and sum to 1")


N_COLOR_CLUSTERS = 5


def _lloyd_once(points: np.ndarray, k: int, rng: np.random.Generator,
                max_iters: int, tol: float):
    """One run of Lloyd's algorithm; returns (centroids, assignment, distortion)."""
    idx = rng.choice(points.shape[0], size=k, replace=False)
    centroids = points[idx].copy()
    assign = np.zeros(points.shape[0], dtype=np.int64)
    for _ in range(max_iters):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = np.argmin(d2, axis=1)  # argmin ties break to lowest index
        new_centroids = centroids.copy()
        for c in range(k):
            mask = assign == c
            if mask.any():
                new_centroids[c] = points[mask].mean(axis=0)
        # empty clusters grab the point farthest from its current centroid
        point_d = d2[np.arange(points.shape[0]), assign]
        for c in range(k):
            if not (assign == c).any():
                far = int(np.argmax(point_d))
                new_centroids[c] = points[far]
                point_d[far] = -np.inf
        move = float(np.max(np.abs(new_centroids - centroids)))
        centroids = new_centroids
        if move <= tol:
            break
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    assign = np.argmin(d2, axis=1)
    distortion = float(d2[np.arange(points.shape[0]), assign].sum())
    return centroids, assign, distortion


def kmeans(points: np.ndarray, k: int = N_COLOR_CLUSTERS, restarts: int = 10,
           max_iters: int = 100, tol: float = 1e-6,
           rng: np.random.Generator | None = None):
    """Lloyd's k-means with restarts; returns (centroids, assignment, distortion)."""
    if rng is None:
        rng = np.random.default_rng(0)
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] < k:
        raise ValueError(f"need at least {k} points, got {points.shape[0]}")
    best = None
    for _ in range(restarts):
        cand = _lloyd_once(points, k, rng, max_iters, tol)
        if best is None or cand[2] < best[2]:
            best = cand
    return best


def fit_color_model(image: GridImage, rng: np.random.Generator | None = None) -> ColorModel:
    """Fit the seed-derived foreground/background mixture model.

    Runs k-means separately on foreground- and background-seed features;
    a cluster's mixture weight is the fraction of that class's seeds it
    absorbed.  The shared bandwidth is the mean distance from a seed to
    the nearest centroid of its own class.
    """
    if image.seeds is None:
        raise ValueError("image has no seed mask")
    if rng is None:
        rng = np.random.default_rng(0)
    fg = image.data[image.seeds == SEED_FG]
    bg = image.data[image.seeds == SEED_BG]
    if fg.shape[0] < N_COLOR_CLUSTERS or bg.shape[0] < N_COLOR_CLUSTERS:
        raise ValueError(
            f"need at least {N_COLOR_CLUSTERS} seeds per class, "
            f"got fg={fg.shape[0]} bg={bg.shape[0]}")
    fg_c, fg_assign, _ = kmeans(fg, rng=rng)
    bg_c, bg_assign, _ = kmeans(bg, rng=rng)
    fg_w = np.bincount(fg_assign, minlength=N_COLOR_CLUSTERS) / fg.shape[0]
    bg_w = np.bincount(bg_assign, minlength=N_COLOR_CLUSTERS) / bg.shape[0]
    d_fg = np.sqrt(((fg[:, None, :] - fg_c[None]) ** 2).sum(axis=2)).min(axis=1)
    d_bg = np.sqrt(((bg[:, None, :] - bg_c[None]) ** 2).sum(axis=2)).min(axis=1)
    bandwidth = max(float(np.concatenate([d_fg, d_bg]).mean()), 1e-6)
    return ColorModel(fg_c, bg_c, fg_w, bg_w, bandwidth)


def _log_likelihood(x: np.ndarray, centroids: np.ndarray, weights: np.ndarray,
                    sigma: float) -> np.ndarray:
    """log sum_c w_c exp(-||x - c||^2 / (2 sigma^2)), up to a shared constant."""
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    logw = np.where(weights > 0, np.log(np.maximum(weights, 1e-300)), -np.inf)
    z = logw[None, :] - d2 / (2.0 * sigma * sigma)
    zmax = z.max(axis=1)
    return zmax + np.log(np.exp(z - zmax[:, None]).sum(axis=1))


def compute_unaries(image: GridImage, model: ColorModel) -> np.ndarray:
    """Log-posterior-ratio unaries; seeded pixels are pinned to a large cost.

    u_i = log Pr(label 0 | x_i) - log Pr(label 1 | x_i) under equal class
    priors, so negative values favor foreground.  Foreground seeds get
    -U, background seeds +U with U large enough to dominate any solver.
    """
    u = (_log_likelihood(image.data, model.bg_centroids, model.bg_weights, model.bandwidth)
         - _log_likelihood(image.data, model.fg_centroids, model.fg_weights, model.bandwidth))
    if image.seeds is not None:
        unseeded = image.seeds == 0
        base = float(np.abs(u[unseeded]).max()) if unseeded.any() else 0.0
        u_max = 1e6 * (1.0 + base)
        u[image.seeds == SEED_FG] = -u_max
        u[image.seeds == SEED_BG] = u_max
    return u
