"""Serial min-cut solver for unary + non-negative pairwise binary energies.

Used both as the per-block submodular solver and as the serial whole-image
baseline.  The energy-to-graph reduction maps positive linear costs to
source arcs, negative ones to sink arcs, and each pairwise weight to a
symmetric arc pair whose cut cost equals the penalty paid when the two
labels differ.
"""

from __future__ import annotations

import numpy as np

from ._kernels import bk_maxflow
from .energy import NonSubmodularError, SparseWeights


class FlowGraph:
    """A two-terminal flow network over pair arcs.

    Terminal capacities are netted per node (at most one of the source/sink
    capacities stays positive), the surplus flowing straight through as a
    constant added to the max-flow value.
    """

    def __init__(self, node_count: int):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        self.node_count = node_count
        self._tcap = np.zeros(node_count)
        self._pair_i = []
        self._pair_j = []
        self._cap_ij = []
        self._cap_ji = []
        self.flow_const = 0.0

    def add_terminal(self, i: int, cap_source: float, cap_sink: float):
        if cap_source < 0 or cap_sink < 0:
            raise ValueError("terminal capacities must be non-negative")
        net = min(cap_source, cap_sink)
        self.flow_const += net
        self._tcap[i] += cap_source - cap_sink

    def add_edge(self, i: int, j: int, cap: float, rev_cap: float):
        if i == j:
            raise ValueError("self-loops are not allowed")
        if cap < 0 or rev_cap < 0:
            raise ValueError("edge capacities must be non-negative")
        if not isinstance(self._pair_i, list):   # bulk-built graph: reopen
            self._pair_i = list(self._pair_i)
            self._pair_j = list(self._pair_j)
            self._cap_ij = list(self._cap_ij)
            self._cap_ji = list(self._cap_ji)
        self._pair_i.append(i)
        self._pair_j.append(j)
        self._cap_ij.append(cap)
        self._cap_ji.append(rev_cap)

    @property
    def terminal_caps(self) -> np.ndarray:
        """(node_count, 2) array of netted (cap_source, cap_sink)."""
        return np.stack([np.maximum(self._tcap, 0.0),
                         np.maximum(-self._tcap, 0.0)], axis=1)

    def arrays(self):
        return (self._tcap,
                np.asarray(self._pair_i, dtype=np.int32),
                np.asarray(self._pair_j, dtype=np.int32),
                np.asarray(self._cap_ij, dtype=np.float64),
                np.asarray(self._cap_ji, dtype=np.float64))


def build_graph(linear: np.ndarray, pairwise: SparseWeights, lam: float) -> FlowGraph:
    """Reduce  linear . y + lam * sum w_ij (y_i - y_j)^2  to a min-cut instance.

    Cutting the arc pair of (i, j) costs exactly lam * w_ij, so the minimum
    cut value equals the minimum energy shifted by sum_i min(linear_i, 0).
    Refuses negative pairwise weights: those instances have no equivalent
    cut problem and belong to the local-search solver (solvers.icm).
    """
    linear = np.asarray(linear, dtype=np.float64)
    if linear.shape != (pairwise.n,):
        raise ValueError("linear length must equal pairwise.n")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if pairwise.npairs and float(pairwise.vals.min()) < 0:
        raise NonSubmodularError(
            "pairwise weights contain negative entries; max-flow requires a "
            "submodular instance, use the icm solver instead")
    g = FlowGraph(pairwise.n)
    g._tcap[:] = linear
    g._pair_i = pairwise.rows
    g._pair_j = pairwise.cols
    caps = lam * pairwise.vals
    g._cap_ij = caps
    g._cap_ji = caps.copy()
    return g


def min_cut(graph: FlowGraph):
    """Solve the instance; returns (labels in {0,1}, flow).

    Ties between equal-cost labelings resolve toward label 0: only nodes
    that still reach the sink in the residual network get label 1.
    """
    tcap, pi, pj, cij, cji = graph.arrays()
    labels, flow = bk_maxflow(tcap.copy(), pi, pj, cij, cji)
    return labels.astype(np.int8), flow + graph.flow_const


def solve_binary(linear: np.ndarray, pairwise: SparseWeights, lam: float):
    """Convenience wrapper: build the graph and return (labels, flow)."""
    return min_cut(build_graph(linear, pairwise, lam))
