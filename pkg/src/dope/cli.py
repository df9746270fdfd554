"""Command-line front end: serial, distributed and comparison runs.

    dope serial   --image in.pgm --seeds marks.pgm --lambda 50 --out results/
    dope dope     --image in.pgm --seeds marks.pgm --lambda 50 --blocks 4x4
    dope compare  --image in.ppm --unaries prob.raw --lambda 50 --blocks 64
    dope oracle-check --seed 7

A JSON config file (--config) may supply any flag by its long name; explicit
flags win.  All outputs land in --out: label maps, the per-iteration trace
CSV and a JSON report.  Given the same inputs and --seed, outputs are
reproducible byte for byte except for recorded wall-clock times.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import io as dio
from ._kernels import backend_name
from .admm import AdmmConfig, run as admm_run
from .checks import run_oracle_check
from .energy import (EnergyModel, build_potts_weights, compute_unaries,
                     estimate_sigma, evaluate_energy, fit_color_model)
from .grid import GridImage
from .maxflow import solve_binary
from .metrics import ComparisonReport, dice, relative_energy_diff
from .partition import make_partition, near_isotropic_factors
from .solvers import BlockSolverKind


@dataclass
class RunConfig:
    """Everything one pipeline invocation needs."""

    mode: str
    image: str
    seeds: str | None = None
    unaries: str | None = None
    lam: float = 1.0
    kernel: int = 3
    blocks: str = "2x2"
    overlap: int = 0
    solver: str = "maxflow"
    sigma: float | None = None
    no_contrast: bool = False
    mu0: float | None = None
    mu_fact: float = 1.05
    eps: float | None = None
    max_iters: int = 50
    threads: int = 1
    out: str = "out"
    seed: int = 0

    def block_counts(self, dims) -> tuple:
        pattern = str(self.blocks).lower()
        if "x" in pattern:
            counts = tuple(int(p) for p in pattern.split("x"))
            if len(counts) != len(dims):
                raise ValueError(
                    f"--blocks has {len(counts)} axes but the grid has {len(dims)}")
            return counts
        return near_isotropic_factors(int(pattern), dims)

    def admm_config(self) -> AdmmConfig:
        return AdmmConfig(mu0=self.mu0, mu_fact=self.mu_fact, eps=self.eps,
                          max_iters=self.max_iters,
                          solver=BlockSolverKind(self.solver),
                          threads=self.threads)


def build_model(cfg: RunConfig) -> tuple:
    """Load inputs and assemble the energy model; returns (image, model)."""
    image = dio.load_image(cfg.image)
    if cfg.seeds is not None:
        image.seeds = dio.load_seeds(cfg.seeds, image.shape)
    if cfg.unaries is not None:
        u = dio.load_unaries(cfg.unaries, image.n)
    elif image.seeds is not None:
        rng = np.random.default_rng(cfg.seed)
        u = compute_unaries(image, fit_color_model(image, rng))
    else:
        raise ValueError("need --seeds or --unaries to define unary costs")
    sigma = cfg.sigma if cfg.sigma is not None else estimate_sigma(image, cfg.kernel)
    w = build_potts_weights(image, cfg.kernel, sigma, contrast=not cfg.no_contrast)
    return image, EnergyModel(u, w, cfg.lam)


def run_serial(model: EnergyModel):
    """Whole-image min-cut baseline; returns (labels, energy, seconds)."""
    t0 = time.perf_counter()
    labels, _ = solve_binary(model.unary, model.weights, model.lam)
    wall = time.perf_counter() - t0
    return labels, evaluate_energy(model, labels.astype(np.float64)), wall


def run_distributed(model: EnergyModel, image: GridImage, cfg: RunConfig):
    """Block-consensus run; returns (labels, energy, seconds, state)."""
    partition = make_partition(image.shape, cfg.block_counts(image.shape.dims),
                               cfg.overlap)
    t0 = time.perf_counter()
    labels, state = admm_run(model, partition, cfg.admm_config())
    wall = time.perf_counter() - t0
    return labels, evaluate_energy(model, labels.astype(np.float64)), wall, state


def _config_echo(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}


def run_compare(cfg: RunConfig) -> ComparisonReport:
    """Run the serial baseline and the distributed solver on one model.

    Both consume the identical energy model (same lambda, same weights);
    label maps, the iteration trace and report.json are written to cfg.out.
    """
    image, model = build_model(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    report: dict = {"config": _config_echo(cfg), "backend": backend_name(),
                    "n": image.n, "dims": list(image.shape.dims)}

    labels_s = energy_s = wall_s = None
    if cfg.mode in ("serial", "compare"):
        labels_s, energy_s, wall_s = run_serial(model)
        dio.write_labels(os.path.join(cfg.out, "labels_serial"), labels_s, image.shape)
        report["energy_serial"] = energy_s
        report["wall_serial_s"] = wall_s

    labels_d = energy_d = wall_d = None
    state = None
    if cfg.mode in ("dope", "compare"):
        labels_d, energy_d, wall_d, state = run_distributed(model, image, cfg)
        dio.write_labels(os.path.join(cfg.out, "labels_dope"), labels_d, image.shape)
        dio.write_trace(os.path.join(cfg.out, "trace.csv"), state.trace)
        report["energy_dope"] = energy_d
        report["wall_dope_s"] = wall_d
        report["iterations"] = state.iteration
        report["converged"] = state.converged

    if cfg.mode == "compare":
        # identical energies agree perfectly even when the baseline is 0,
        # where the relative difference is otherwise undefined
        delta = 0.0 if energy_s == energy_d else relative_energy_diff(energy_s, energy_d)
        rep = ComparisonReport(
            dsc=dice(labels_s, labels_d),
            delta_e_pct=delta,
            energy_serial=energy_s,
            energy_distributed=energy_d,
            iterations=state.iteration,
            wall_serial_s=wall_s,
            wall_distributed_s=wall_d,
        )
        report["dsc"] = rep.dsc
        report["delta_e_pct"] = rep.delta_e_pct
    else:
        rep = None
    dio.write_report(os.path.join(cfg.out, "report.json"), report)
    return rep


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--image", help="2D PGM/PPM file or 3D raw volume")
    p.add_argument("--seeds", help="PGM seed mask (0 none, 128 bg, 255 fg)")
    p.add_argument("--unaries", help="raw float32 foreground-probability map")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="pairwise regularization strength (required, per image)")
    p.add_argument("--kernel", type=int, choices=(3, 5, 7, 9), help="neighborhood size")
    p.add_argument("--blocks", help="per-axis block counts AxB[xC], or a flat count")
    p.add_argument("--overlap", type=int, choices=(0, 10, 25), help="block overlap percent")
    p.add_argument("--solver", choices=("maxflow", "icm", "exhaustive"))
    p.add_argument("--sigma", type=float, help="contrast bandwidth (default: estimated)")
    p.add_argument("--no-contrast", action="store_true", default=None,
                   help="use constant pairwise weights")
    p.add_argument("--mu0", type=float, help="initial penalty (default 100 2D / 500 3D)")
    p.add_argument("--mu-fact", dest="mu_fact", type=float, help="penalty growth factor")
    p.add_argument("--eps", type=float, help="per-block residual stop threshold")
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--threads", type=int, help="block-solve worker count")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="random seed (color model, reproducibility)")
    p.add_argument("--config", help="JSON file supplying any of the above by name")


def _merge_config(args: argparse.Namespace, mode: str) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as f:
            file_values = json.load(f)
        known = {f.name for f in fields(RunConfig)}
        bad = set(file_values) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        values.update(file_values)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    values["mode"] = mode
    if "image" not in values or values["image"] is None:
        raise ValueError("--image is required")
    if "lam" not in values or values["lam"] is None:
        raise ValueError("--lambda is required and chosen per image")
    if values.get("no_contrast") is None:
        values["no_contrast"] = False
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dope",
        description="distributed block-consensus minimization of binary "
                    "pairwise grid energies")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, t in (("serial", "whole-image min-cut baseline"),
                    ("dope", "distributed block-consensus run"),
                    ("compare", "run both and report agreement")):
        _add_run_flags(sub.add_parser(name, help=t))
    pc = sub.add_parser("oracle-check", help="randomized self-checks against oracles")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--trials", type=int, default=None)

    args = parser.parse_args(argv)
    if args.command == "oracle-check":
        results = run_oracle_check(args.seed, args.trials)
        ok = True
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"{status} {r.name}: {r.trials - r.failures}/{r.trials} trials ok "
                  f"(seed {args.seed})")
            ok = ok and r.passed
        return 0 if ok else 1

    try:
        cfg = _merge_config(args, args.command)
        rep = run_compare(cfg)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if rep is not None:
        print(f"DSC {rep.dsc:.4f}  dE {rep.delta_e_pct:+.4f}%  "
              f"E_serial {rep.energy_serial:.6g}  E_dist {rep.energy_distributed:.6g}  "
              f"iters {rep.iterations}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
