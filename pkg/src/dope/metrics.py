"""Agreement metrics between labelings and between energies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ComparisonReport:
    """Summary of a serial-vs-distributed run on one instance."""

    dsc: float
    delta_e_pct: float
    energy_serial: float
    energy_distributed: float
    iterations: int
    wall_serial_s: float
    wall_distributed_s: float

    def __post_init__(self):
        if not 0.0 <= self.dsc <= 1.0:
            raise ValueError("dsc must lie in [0, 1]")


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Overlap score 2|a & b| / (|a| + |b|); two empty masks count as 1.0."""
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / denom


def relative_energy_diff(e_serial: float, e_distributed: float) -> float:
    """(e_serial - e_distributed) / e_serial * 100.

    Negative values mean the distributed energy came out higher than the
    serial baseline.
    """
    if e_serial == 0:
        raise ZeroDivisionError("relative energy difference undefined for zero baseline")
    return (e_serial - e_distributed) / e_serial * 100.0
