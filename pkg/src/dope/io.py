"""File I/O: netpbm images (P5/P6), raw volumes with JSON descriptors, seeds,
probability-map unaries, label maps, traces and reports.

2D data travels as binary PGM/PPM with maxval 255.  3D data is a raw
little-endian array (float32 or uint8) next to a JSON descriptor named
<data>.json holding dims, channels and dtype.  Seed masks are PGM with
0 = unlabeled, 128 = background, 255 = foreground.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .grid import SEED_BG, SEED_FG, GridImage, GridShape

SEED_PIXEL_BG = 128
SEED_PIXEL_FG = 255


def _read_pnm_header(f):
    magic = f.read(2)
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"not a binary PGM/PPM file (magic {magic!r})")

    def next_token():
        tok = b""
        while True:
            ch = f.read(1)
            if not ch:
                raise ValueError("truncated netpbm header")
            if ch in b" \t\r\n":
                if tok:
                    return tok
                continue
            if ch == b"#":
                while ch and ch != b"\n":
                    ch = f.read(1)
                if tok:        # comment right after a token terminates it
                    return tok
                continue
            tok += ch

    width = int(next_token())
    height = int(next_token())
    maxval = int(next_token())
    if width < 1 or height < 1:
        raise ValueError("bad netpbm dimensions")
    if maxval != 255:
        raise ValueError(f"only maxval 255 is supported, got {maxval}")
    return magic, width, height, maxval


def read_pnm(path):
    """Read a binary PGM (P5) or PPM (P6); returns (height, width, channels, uint8 array)."""
    with open(path, "rb") as f:
        magic, width, height, _ = _read_pnm_header(f)
        channels = 1 if magic == b"P5" else 3
        raster = f.read(width * height * channels)
    if len(raster) != width * height * channels:
        raise ValueError(f"raster size mismatch in {path}")
    data = np.frombuffer(raster, dtype=np.uint8).reshape(height * width, channels)
    return height, width, channels, data


def write_pgm(path, values: np.ndarray, height: int, width: int):
    """Write a flat uint8 vector as binary PGM, row-major."""
    values = np.asarray(values, dtype=np.uint8)
    if values.size != height * width:
        raise ValueError("value count does not match PGM dimensions")
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(values.tobytes())


def write_ppm(path, values: np.ndarray, height: int, width: int):
    """Write an (n, 3) uint8 array as binary PPM, row-major."""
    values = np.asarray(values, dtype=np.uint8)
    if values.shape != (height * width, 3):
        raise ValueError("value array does not match PPM dimensions")
    with open(path, "wb") as f:
        f.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        f.write(values.tobytes())


def write_raw_volume(path, data: np.ndarray, dims, channels: int = 1,
                     dtype: str = "float32"):
    """Write a raw little-endian volume plus its JSON descriptor."""
    if dtype not in ("float32", "uint8"):
        raise ValueError(f"unsupported raw dtype {dtype!r}")
    arr = np.asarray(data).astype("<f4" if dtype == "float32" else np.uint8)
    n = 1
    for d in dims:
        n *= d
    if arr.size != n * channels:
        raise ValueError("data size does not match dims * channels")
    with open(path, "wb") as f:
        f.write(arr.tobytes())
    with open(str(path) + ".json", "w", encoding="utf-8") as f:
        json.dump({"dims": list(int(d) for d in dims),
                   "channels": int(channels), "dtype": dtype}, f, sort_keys=True)
        f.write("\n")


def read_raw_volume(path):
    """Read a raw volume through its sidecar descriptor; returns (dims, channels, float array)."""
    desc_path = str(path) + ".json"
    if not os.path.exists(desc_path):
        raise FileNotFoundError(f"missing volume descriptor {desc_path}")
    with open(desc_path, "r", encoding="utf-8") as f:
        desc = json.load(f)
    dims = tuple(int(d) for d in desc["dims"])
    channels = int(desc.get("channels", 1))
    dtype = desc.get("dtype", "float32")
    if dtype not in ("float32", "uint8"):
        raise ValueError(f"unsupported raw dtype {dtype!r}")
    n = 1
    for d in dims:
        n *= d
    raw = np.fromfile(path, dtype="<f4" if dtype == "float32" else np.uint8)
    if raw.size != n * channels:
        raise ValueError(
            f"raw file has {raw.size} values, descriptor implies {n * channels}")
    data = raw.astype(np.float64).reshape(n, channels)
    if dtype == "uint8":
        data /= 255.0
    elif data.size and (data.min() < -1e-6 or data.max() > 1.0 + 1e-6):
        raise ValueError("float32 volume values must lie in [0, 1]")
    return dims, channels, np.clip(data, 0.0, 1.0)


def load_image(path) -> GridImage:
    """Load a 2D PGM/PPM or a 3D raw+descriptor volume, normalized to [0, 1]."""
    s = str(path)
    if s.endswith(".pgm") or s.endswith(".ppm"):
        height, width, channels, data = read_pnm(path)
        return GridImage(GridShape((height, width)), data.astype(np.float64) / 255.0)
    dims, _, data = read_raw_volume(path)
    return GridImage(GridShape(dims), data)


def load_seeds(path, shape: GridShape) -> np.ndarray:
    """Load a PGM seed mask for a 2D grid; values must be 0, 128 or 255."""
    if shape.ndim != 2:
        raise ValueError("seed masks are only supported for 2D grids")
    height, width, channels, data = read_pnm(path)
    if channels != 1:
        raise ValueError("seed mask must be a single-channel PGM")
    if (height, width) != shape.dims:
        raise ValueError(
            f"seed mask is {height}x{width}, image is {shape.dims[0]}x{shape.dims[1]}")
    flat = data.ravel()
    legal = np.isin(flat, (0, SEED_PIXEL_BG, SEED_PIXEL_FG))
    if not legal.all():
        bad = sorted(set(int(v) for v in flat[~legal]))
        raise ValueError(f"seed mask contains illegal pixel values {bad}")
    seeds = np.zeros(shape.n, dtype=np.int8)
    seeds[flat == SEED_PIXEL_BG] = SEED_BG
    seeds[flat == SEED_PIXEL_FG] = SEED_FG
    return seeds


def write_seeds(path, seeds: np.ndarray, height: int, width: int):
    """Write a seed vector back to the PGM mask encoding."""
    pix = np.zeros(seeds.size, dtype=np.uint8)
    pix[np.asarray(seeds) == SEED_BG] = SEED_PIXEL_BG
    pix[np.asarray(seeds) == SEED_FG] = SEED_PIXEL_FG
    write_pgm(path, pix, height, width)


def load_unaries(path, n: int) -> np.ndarray:
    """Turn a raw float32 foreground-probability map into log-ratio unaries.

    u_i = log(1 - p_i) - log(p_i), with p clamped into [1e-6, 1 - 1e-6].
    """
    p = np.fromfile(path, dtype="<f4").astype(np.float64)
    if p.size != n:
        raise ValueError(f"probability map has {p.size} values, expected {n}")
    if np.isnan(p).any():
        raise ValueError("probability map contains NaN")
    p = np.clip(p, 1e-6, 1.0 - 1e-6)
    return np.log1p(-p) - np.log(p)


def write_unaries(path, probabilities: np.ndarray):
    """Write a foreground-probability map as raw little-endian float32."""
    np.asarray(probabilities, dtype="<f4").tofile(path)


def write_labels(path_base, labels: np.ndarray, shape: GridShape) -> str:
    """Write a binary label map: PGM for 2D, raw uint8 + descriptor for 3D."""
    labels = np.asarray(labels)
    if shape.ndim == 2:
        path = str(path_base) + ".pgm"
        write_pgm(path, labels.astype(np.uint8) * 255, shape.dims[0], shape.dims[1])
    else:
        path = str(path_base) + ".raw"
        write_raw_volume(path, labels.astype(np.uint8) * 255, shape.dims, 1, "uint8")
    return path


def read_labels(path, shape: GridShape) -> np.ndarray:
    """Read a label map written by write_labels."""
    if str(path).endswith(".pgm"):
        _, _, _, data = read_pnm(path)
        return (data.ravel() >= 128).astype(np.int8)
    _, _, data = read_raw_volume(path)
    return (data.ravel() >= 0.5).astype(np.int8)


TRACE_FIELDS = ("iter", "mu", "energy", "residual", "max_block_residual", "ms")


def write_trace(path, trace):
    """Write per-iteration records as CSV."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(TRACE_FIELDS)
        for r in trace:
            w.writerow([r.iteration, repr(r.mu), repr(r.energy), repr(r.residual_sq),
                        repr(r.max_block_residual), repr(r.wall_ms)])


def write_report(path, report: dict):
    """Write the run report as sorted JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, sort_keys=True, indent=2)
        f.write("\n")
